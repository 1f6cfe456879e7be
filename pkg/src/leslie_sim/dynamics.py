"""Constitutive stress, right-hand sides, incompressibility projection, and
the semi-implicit time stepper.

Scheme (one step, periodic grid):

1. director update: stiff elastic operator treated theta-implicitly,
   transport / rotation / penalty explicit;
2. form the two-point variational derivative (the exact discrete gradient of
   the free energy between the old and new director);
3. tentative velocity: theta-implicit viscous Helmholtz solve, explicit
   advection, Leslie stress and director force evaluated at the old director
   with the two-point q, plus forcing;
4. exact FFT Leray projection onto discretely divergence-free fields.

Evaluating the coupling terms at matching time levels makes the energy
exchange between the kinetic and free energies cancel identically in the
discrete balance, and theta < 1/2 makes the dissipative terms over-dissipate
relative to the trapezoid-recorded dissipation integrals, so the discrete
energy inequality residual stays one-sided.  Stability requires
dt <= 2 / ((1 - 2 theta) * kappa_max) for the stiffest mode (see
``stable_dt_bound``); the explicit penalty additionally needs
dt <= eps / (4 gamma).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import grid as g
from .energetics import (
    EnergyTrace,
    dissipation_channels,
    free_energy,
    variational_derivative,
)
from .grid import PERIODIC, Grid, ScalarField, TensorField, VectorField
from .material import ParameterSet, require_valid
from .tensor import ElasticTensor, outer, skw, sym


class ProjectionError(RuntimeError):
    """Pressure solve failed to reach the requested divergence residual."""


class SimulationError(RuntimeError):
    """Time integration aborted; carries the last finite state."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


@dataclass
class State:
    """One trajectory sample: time, velocity, director, projection pressure.

    The pressure is the discrete Leray multiplier divided by dt; it is an
    artifact of the projection, not a statement about the analytic pressure.
    """

    t: float
    v: VectorField
    d: VectorField
    p: ScalarField

    @classmethod
    def initial(cls, v: VectorField, d: VectorField, t: float = 0.0) -> "State":
        return cls(t=t, v=v, d=d, p=ScalarField.zeros(v.grid))

    def copy(self) -> "State":
        return State(self.t, self.v.copy(), self.d.copy(), self.p.copy())


@dataclass(frozen=True)
class StepperConfig:
    dt: float = 5e-4
    t_end: float = 0.5
    poisson_tol: float = 1e-10
    poisson_max_iter: int = 500
    output_every: int = 1
    theta: float = 0.3
    scheme: str = "semi_implicit_theta"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if not (0.0 < self.poisson_tol <= 1e-6):
            raise ValueError("poisson_tol must lie in (0, 1e-6]")
        if self.output_every < 1:
            raise ValueError("output_every must be >= 1")
        if not (0.0 <= self.theta < 0.5):
            raise ValueError("theta must lie in [0, 0.5) for a one-sided energy law")
        if self.scheme != "semi_implicit_theta":
            raise ValueError(f"unknown scheme {self.scheme!r}")


# ---------------------------------------------------------------------------
# spectral machinery (periodic grids)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _symbols(n: tuple, h: tuple):
    """Fourier symbols of the central first derivative per axis.

    D_a exp(2 pi i k x / L) has symbol i sigma_a with
    sigma_a = sin(2 pi k_a / n_a) / h_a.  Returned broadcastable over the
    frequency grid, together with sigma^2 summed (the wide-Laplacian symbol).
    """
    sigmas = []
    for axis, (na, ha) in enumerate(zip(n, h)):
        k = np.arange(na)
        s = np.sin(2.0 * np.pi * k / na) / ha
        # sin(pi) is not exactly zero in floating point; the k = 0 and
        # Nyquist symbols must vanish exactly or the inversion blows up
        s[(2 * k) % na == 0] = 0.0
        shape = [1] * len(n)
        shape[axis] = na
        sigmas.append(s.reshape(shape))
    sig_sq = sum(s**2 for s in sigmas)
    return tuple(sigmas), np.broadcast_to(sig_sq, n).copy()


def _fftn(values: np.ndarray, dim: int) -> np.ndarray:
    return np.fft.fftn(values, axes=tuple(range(dim)))


def _ifftn(values: np.ndarray, dim: int) -> np.ndarray:
    return np.fft.ifftn(values, axes=tuple(range(dim))).real


def project_divfree(u: VectorField, tol: float = 1e-10, max_iter: int = 500):
    """Discrete Leray projection: returns (u - grad p, p) with div(result) ~ 0.

    Periodic grids solve div grad p = div u exactly in Fourier space (the
    composite central-difference Laplacian is diagonal there); modes where
    every derivative symbol vanishes carry no divergence and are left alone.
    Dirichlet grids use a least-squares solve of the same composite operator.
    The mean of p is fixed to zero.
    """
    grid = u.grid
    div_u = g.divergence_vec(u)
    if grid.bc == PERIODIC:
        sigmas, sig_sq = _symbols(grid.n, grid.h)
        rhs_hat = _fftn(div_u.values, grid.dim)
        denom = -sig_sq
        with np.errstate(divide="ignore", invalid="ignore"):
            p_hat = np.where(denom != 0.0, rhs_hat / np.where(denom != 0.0, denom, 1.0), 0.0)
        p_values = _ifftn(p_hat, grid.dim)
        p_values -= p_values.mean()
        p = ScalarField(grid, p_values)
    else:
        p = _project_pressure_lsq(div_u, tol, max_iter)

    grad_p = np.zeros(grid.shape + (3,))
    for a in range(grid.dim):
        grad_p[..., a] = g._deriv(grid, p.values, axis=a)
    result = VectorField(grid, u.values - grad_p)

    res = math.sqrt(g.l2_norm_sq(g.divergence_vec(result)))
    target = tol * math.sqrt(g.l2_norm_sq(div_u)) + 1e-14 * (1.0 + math.sqrt(g.l2_norm_sq(u)))
    if res > target:
        raise ProjectionError(
            f"projection residual {res:.3e} exceeds target {target:.3e}"
        )
    return result, p


def _project_pressure_lsq(div_u: ScalarField, tol: float, max_iter: int) -> ScalarField:
    # Least squares on the composite div(grad .) operator built from the
    # one-sided Dirichlet stencils.  The operator is assembled densely; this
    # path targets the small desk-scale grids only.
    grid = div_u.grid
    count = grid.cell_count

    def apply_lap(flat):
        p = flat.reshape(grid.shape)
        out = np.zeros(grid.shape)
        for a in range(grid.dim):
            out += g._deriv(grid, g._deriv(grid, p, axis=a), axis=a)
        return out.ravel()

    dense = np.empty((count, count))
    basis = np.zeros(count)
    for j in range(count):
        basis[:] = 0.0
        basis[j] = 1.0
        dense[:, j] = apply_lap(basis)
    sol, *_ = np.linalg.lstsq(dense, div_u.values.ravel(), rcond=None)
    p_values = sol.reshape(grid.shape)
    p_values -= p_values.mean()
    return ScalarField(grid, p_values)


def solve_director_implicit(rhs: VectorField, tensor: ElasticTensor, alpha: float) -> VectorField:
    """Solve (I + alpha * (-div(L : grad .))) x = rhs on a periodic grid.

    The operator is block-diagonal in Fourier space: for each mode the 3x3
    matrix I + alpha * S(k) with S_ik = sum_jl L_ijkl sigma_j sigma_l, which
    strong ellipticity keeps positive definite.
    """
    grid = rhs.grid
    if grid.bc != PERIODIC:
        raise NotImplementedError("implicit director solve requires a periodic grid")
    mats = _director_matrices(grid, tensor, alpha)
    rhs_hat = _fftn(rhs.values, grid.dim)
    x_hat = np.linalg.solve(mats, rhs_hat[..., None])[..., 0]
    return VectorField(grid, _ifftn(x_hat, grid.dim))


_DIRECTOR_CACHE: dict = {}


def _director_matrices(grid: Grid, tensor: ElasticTensor, alpha: float) -> np.ndarray:
    key = (grid.n, grid.h, id(tensor), alpha)
    mats = _DIRECTOR_CACHE.get(key)
    if mats is None:
        sigmas, _ = _symbols(grid.n, grid.h)
        full = [np.broadcast_to(s, grid.n) for s in sigmas]
        while len(full) < 3:
            full.append(np.zeros(grid.n))
        sig = np.stack(full, axis=-1)  # (*n, 3)
        s_mat = np.einsum("ijkl,...j,...l->...ik", tensor.entries, sig, sig)
        mats = np.broadcast_to(np.eye(3), grid.n + (3, 3)) + alpha * s_mat
        mats = np.ascontiguousarray(mats, dtype=np.complex128)
        if len(_DIRECTOR_CACHE) > 64:
            _DIRECTOR_CACHE.clear()
        _DIRECTOR_CACHE[key] = mats
    return mats


def solve_helmholtz(rhs: VectorField, coeff: float) -> VectorField:
    """Solve (I + coeff * (-Lap)) x = rhs componentwise on a periodic grid,
    with the wide (composite central-difference) Laplacian."""
    grid = rhs.grid
    if grid.bc != PERIODIC:
        raise NotImplementedError("Helmholtz solve requires a periodic grid")
    _, sig_sq = _symbols(grid.n, grid.h)
    rhs_hat = _fftn(rhs.values, grid.dim)
    x_hat = rhs_hat / (1.0 + coeff * sig_sq)[..., None]
    return VectorField(grid, _ifftn(x_hat, grid.dim))


def max_stiff_rate(grid: Grid, tensor: ElasticTensor, p: ParameterSet) -> float:
    """Largest eigenvalue of the stiff linear operators (director elasticity
    scaled by gamma, and half the viscosity)."""
    sigmas, sig_sq = _symbols(grid.n, grid.h)
    full = [np.broadcast_to(s, grid.n) for s in sigmas]
    while len(full) < 3:
        full.append(np.zeros(grid.n))
    sig = np.stack(full, axis=-1)
    s_mat = np.einsum("ijkl,...j,...l->...ik", tensor.entries, sig, sig)
    eig_max = float(np.max(np.linalg.eigvalsh(0.5 * (s_mat + np.swapaxes(s_mat, -1, -2)))))
    return max(p.gamma * eig_max, 0.5 * p.mu4 * float(sig_sq.max()))


def stable_dt_bound(grid: Grid, tensor: ElasticTensor, p: ParameterSet, theta: float) -> float:
    """Documented step-size bound: theta-scheme stability of the stiff modes
    plus the explicit-penalty restriction dt <= eps / (4 gamma)."""
    kappa = max_stiff_rate(grid, tensor, p)
    stiff = math.inf if theta >= 0.5 else 2.0 / ((1.0 - 2.0 * theta) * kappa)
    return min(stiff, p.epsilon / (4.0 * p.gamma))


# ---------------------------------------------------------------------------
# right-hand sides and constitutive stress
# ---------------------------------------------------------------------------

def leslie_stress(v: VectorField, d: VectorField, q: VectorField, p: ParameterSet) -> TensorField:
    """Dissipative stress with the five coefficient channels:

    T = mu1 (d . Dv d) d x d + mu4 Dv - gamma(mu2+mu3) (d x q)_sym
        + (d x q)_skw + [(mu5+mu6) - lambda(mu2+mu3)] (d x (Dv d))_sym
    """
    grid = v.grid
    dv = sym(g.gradient_vec(v).values)
    dvd = np.einsum("...ij,...j->...i", dv, d.values)
    ddvd = np.einsum("...i,...i->...", d.values, dvd)
    dq = outer(d.values, q.values)
    values = (
        p.mu1 * ddvd[..., None, None] * outer(d.values, d.values)
        + p.mu4 * dv
        - p.gamma * p.mu23 * sym(dq)
        # orientation: (T_skw : grad v) = (q, (grad v)_skw d) pointwise, the
        # pairing that cancels the co-rotation term in the director equation
        - skw(dq)
        + p.directional_coeff * sym(outer(d.values, dvd))
    )
    return TensorField(grid, values)


def ericksen_force(d: VectorField, q: VectorField) -> VectorField:
    """Elastic director force with components (grad d)^T q, i.e. q . (d_a d)
    per axis a; the gradient-of-potential part is absorbed into the
    projection pressure.  Satisfies (force, v) = (q, (v . grad) d) pointwise.
    """
    grad = g.gradient_vec(d)
    return VectorField(d.grid, np.einsum("...ia,...i->...a", grad.values, q.values))


def director_rhs(v: VectorField, d: VectorField, q: VectorField, p: ParameterSet) -> VectorField:
    """-(v . grad) d + (grad v)_skw d - lambda (grad v)_sym d - gamma q."""
    grad_v = g.gradient_vec(v).values
    wv = skw(grad_v)
    dv = sym(grad_v)
    values = (
        -g.advect(v, d).values
        + np.einsum("...ij,...j->...i", wv, d.values)
        - p.lam * np.einsum("...ij,...j->...i", dv, d.values)
        - p.gamma * q.values
    )
    return VectorField(v.grid, values)


def momentum_rhs(
    v: VectorField,
    d: VectorField,
    q: VectorField,
    forcing_values,
    p: ParameterSet,
) -> VectorField:
    """-(v . grad) v + div(T_leslie) + ericksen force + g (pre-projection)."""
    values = (
        -g.advect(v, v).values
        + g.divergence_tensor(leslie_stress(v, d, q, p)).values
        + ericksen_force(d, q).values
    )
    if forcing_values is not None:
        values = values + forcing_values
    return VectorField(v.grid, values)


# ---------------------------------------------------------------------------
# the stepper
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    states: list  # sampled States (including the initial one)
    trace: EnergyTrace
    step_times: np.ndarray
    step_total_energy: np.ndarray


class Stepper:
    """Precomputes the spectral solves for one (grid, material, config) tuple."""

    def __init__(
        self,
        grid: Grid,
        cfg: StepperConfig,
        p: ParameterSet,
        tensor: ElasticTensor,
        forcing=None,
        allow_invalid: bool = False,
    ):
        if grid.bc != PERIODIC:
            raise NotImplementedError("time stepping is implemented for periodic grids")
        if not allow_invalid:
            require_valid(p)
        self.grid = grid
        self.cfg = cfg
        self.p = p
        self.tensor = tensor
        self.forcing = forcing
        self._cfl_warned = False

    def _forcing_values(self, t: float):
        if self.forcing is None:
            return None
        return self.forcing(self.grid, t).values

    def step(self, s: State) -> State:
        cfg, p, tensor = self.cfg, self.p, self.tensor
        dt, theta = cfg.dt, cfg.theta
        v, d = s.v, s.d

        vmax = float(np.max(np.abs(v.values)))
        if not self._cfl_warned and dt * vmax / min(self.grid.h) > 0.5:
            warnings.warn(
                f"advective CFL number {dt * vmax / min(self.grid.h):.2f} exceeds 0.5",
                RuntimeWarning,
            )
            self._cfl_warned = True

        # 1. director update: theta-implicit elasticity, rest explicit
        grad_v = g.gradient_vec(v).values
        wv, dv = skw(grad_v), sym(grad_v)
        dev = np.sum(d.values**2, axis=-1) - 1.0
        explicit = (
            -g.advect(v, d).values
            + np.einsum("...ij,...j->...i", wv, d.values)
            - p.lam * np.einsum("...ij,...j->...i", dv, d.values)
            - (p.gamma / p.epsilon) * dev[..., None] * d.values
            + (1.0 - theta) * p.gamma * g.laplacian_lambda(d, tensor).values
        )
        rhs_d = VectorField(self.grid, d.values + dt * explicit)
        d_new = solve_director_implicit(rhs_d, tensor, theta * dt * p.gamma)

        # 2. two-point variational derivative: the exact discrete gradient of
        # the free energy between d and d_new, so the coupling terms below
        # cancel the director transport and rotation terms identically in the
        # discrete energy balance
        d_mid = VectorField(self.grid, 0.5 * (d_new.values + d.values))
        s_mid = 0.5 * (
            np.sum(d_new.values**2, axis=-1) + np.sum(d.values**2, axis=-1)
        ) - 1.0
        q_half = VectorField(
            self.grid,
            -g.laplacian_lambda(d_mid, tensor).values
            + (s_mid[..., None] / p.epsilon) * d_mid.values,
        )

        # 3. tentative velocity: coupling terms at the old director with the
        # two-point q; viscous part theta-implicit as (mu4/2) Lap v
        stress = leslie_stress(v, d, q_half, p)
        stress_expl = TensorField(self.grid, stress.values - p.mu4 * dv)
        # skew-symmetric (split) advection: exactly energy-neutral under the
        # skew-adjoint central stencil, so the kinetic balance stays one-sided
        adv = 0.5 * (
            g.advect(v, v).values
            + g.divergence_tensor(
                TensorField(self.grid, outer(v.values, v.values))
            ).values
        )
        rhs_values = (
            v.values
            + dt
            * (
                -adv
                + g.divergence_tensor(stress_expl).values
                + ericksen_force(d, q_half).values
                + (1.0 - theta)
                * 0.5
                * p.mu4
                * _wide_laplacian(self.grid, v.values)
            )
        )
        fvals = self._forcing_values(s.t)
        if fvals is not None:
            rhs_values = rhs_values + dt * fvals
        v_star = solve_helmholtz(
            VectorField(self.grid, rhs_values), theta * dt * 0.5 * p.mu4
        )

        # 4. projection
        v_new, p_mult = project_divfree(v_star, cfg.poisson_tol, cfg.poisson_max_iter)
        pressure = ScalarField(self.grid, p_mult.values / dt)
        return State(t=s.t + dt, v=v_new, d=d_new, p=pressure)

    def run(self, initial: State) -> Trajectory:
        cfg = self.cfg
        n_steps = max(0, int(round((cfg.t_end - initial.t) / cfg.dt)))
        state = initial.copy()

        samples = [state.copy()]
        rows = [self._diagnostics(state)]
        step_times = [state.t]
        step_energy = [rows[0]["total"]]

        for k in range(1, n_steps + 1):
            state = self.step(state)
            if not (
                np.all(np.isfinite(state.v.values))
                and np.all(np.isfinite(state.d.values))
            ):
                raise SimulationError(
                    f"non-finite values at step {k} (t = {state.t:.6g})",
                    last_state=samples[-1],
                )
            fe = free_energy(state.d, self.tensor, self.p.epsilon)
            total = 0.5 * g.l2_norm_sq(state.v) + fe.elastic + fe.penalty
            step_times.append(state.t)
            step_energy.append(total)
            if k % cfg.output_every == 0 or k == n_steps:
                samples.append(state.copy())
                rows.append(self._diagnostics(state))

        trace = EnergyTrace(
            t=np.array([r["t"] for r in rows]),
            kinetic=np.array([r["kinetic"] for r in rows]),
            elastic=np.array([r["elastic"] for r in rows]),
            penalty=np.array([r["penalty"] for r in rows]),
            total=np.array([r["total"] for r in rows]),
            diss_mu1=np.array([r["diss_mu1"] for r in rows]),
            diss_mu4=np.array([r["diss_mu4"] for r in rows]),
            diss_dir=np.array([r["diss_dir"] for r in rows]),
            diss_q=np.array([r["diss_q"] for r in rows]),
            cross_term=np.array([r["cross_term"] for r in rows]),
            g_power=np.array([r["g_power"] for r in rows]),
        )
        return Trajectory(
            states=samples,
            trace=trace,
            step_times=np.array(step_times),
            step_total_energy=np.array(step_energy),
        )

    def _diagnostics(self, s: State) -> dict:
        p, tensor = self.p, self.tensor
        cellvol = self.grid.cell_volume
        q = variational_derivative(s.d, tensor, p.epsilon)
        dv, dvd, ddvd = dissipation_channels(s.v, s.d, q)
        fe = free_energy(s.d, tensor, p.epsilon)
        kinetic = 0.5 * g.l2_norm_sq(s.v)
        q_dvd = float(np.sum(q.values * dvd)) * cellvol
        fvals = self._forcing_values(s.t)
        g_power = 0.0 if fvals is None else float(np.sum(fvals * s.v.values)) * cellvol
        return {
            "t": s.t,
            "kinetic": kinetic,
            "elastic": fe.elastic,
            "penalty": fe.penalty,
            "total": kinetic + fe.elastic + fe.penalty,
            "diss_mu1": p.mu1 * float(np.sum(ddvd**2)) * cellvol,
            "diss_mu4": p.mu4 * float(np.sum(dv**2)) * cellvol,
            "diss_dir": p.directional_coeff * float(np.sum(dvd**2)) * cellvol,
            "diss_q": p.gamma * g.l2_norm_sq(q),
            "cross_term": p.cross_coeff * q_dvd,
            "g_power": g_power,
        }


def _wide_laplacian(grid: Grid, values: np.ndarray) -> np.ndarray:
    """div(grad .) built from the central first-derivative stencil twice."""
    out = np.zeros_like(values)
    for a in range(grid.dim):
        out += g._deriv(grid, g._deriv(grid, values, axis=a), axis=a)
    return out


def step(
    s: State,
    cfg: StepperConfig,
    p: ParameterSet,
    tensor: ElasticTensor,
    forcing=None,
    allow_invalid: bool = False,
) -> State:
    return Stepper(s.v.grid, cfg, p, tensor, forcing, allow_invalid).step(s)


def run(
    initial: State,
    cfg: StepperConfig,
    p: ParameterSet,
    tensor: ElasticTensor,
    forcing=None,
    allow_invalid: bool = False,
) -> Trajectory:
    return Stepper(initial.v.grid, cfg, p, tensor, forcing, allow_invalid).run(initial)
