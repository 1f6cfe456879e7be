"""Uniform collocated Cartesian grids (2D or 3D domains, 3-component vectors)
with second-order central difference operators and midpoint quadrature.

On periodic grids the discrete gradient and divergence are exactly adjoint
(summation by parts), which the energy and relative-energy diagnostics rely
on.  On a 2D domain, vector fields keep all three components and derivatives
in the absent direction are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import ElasticTensor

PERIODIC = "periodic"
DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class Grid:
    """Cell-centered uniform grid; ``n`` cells and spacing ``h`` per axis."""

    n: tuple
    h: tuple
    bc: str = PERIODIC

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        h = tuple(float(v) for v in self.h)
        if len(n) not in (2, 3):
            raise ValueError("grid dimension must be 2 or 3")
        if len(h) != len(n):
            raise ValueError("n and h must have the same length")
        if any(v < 4 for v in n):
            raise ValueError("need at least 4 cells per axis")
        if any(v <= 0.0 for v in h):
            raise ValueError("grid spacing must be positive")
        if self.bc not in (PERIODIC, DIRICHLET):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "h", h)

    @classmethod
    def unit_box(cls, n, dim: int = 2, bc: str = PERIODIC) -> "Grid":
        ns = tuple([int(n)] * dim)
        hs = tuple(1.0 / v for v in ns)
        return cls(n=ns, h=hs, bc=bc)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def lengths(self) -> tuple:
        return tuple(ni * hi for ni, hi in zip(self.n, self.h))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        return (np.arange(self.n[axis]) + 0.5) * self.h[axis]

    def coords(self):
        """Meshgrid (ij indexing) of cell-center coordinates, one array per axis."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")


def _check_values(grid: Grid, values: np.ndarray, trailing: tuple):
    expect = grid.shape + trailing
    if values.shape != expect:
        raise ValueError(f"field values shape {values.shape}, expected {expect}")


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        _check_values(self.grid, self.values, ())

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    grid: Grid
    values: np.ndarray  # shape grid.shape + (3,)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        _check_values(self.grid, self.values, (3,))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros(grid.shape + (3,)))

    @classmethod
    def constant(cls, grid: Grid, vec) -> "VectorField":
        values = np.broadcast_to(np.asarray(vec, dtype=np.float64), grid.shape + (3,))
        return cls(grid, values.copy())

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.values.copy())


@dataclass
class TensorField:
    grid: Grid
    values: np.ndarray  # shape grid.shape + (3, 3)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        _check_values(self.grid, self.values, (3, 3))

    @classmethod
    def zeros(cls, grid: Grid) -> "TensorField":
        return cls(grid, np.zeros(grid.shape + (3, 3)))

    def copy(self) -> "TensorField":
        return TensorField(self.grid, self.values.copy())


# ---------------------------------------------------------------------------
# derivative stencils
# ---------------------------------------------------------------------------

def _deriv(grid: Grid, values: np.ndarray, axis: int) -> np.ndarray:
    """Second-order first derivative along a spatial axis.

    Periodic: central differences with index wrap-around.  Dirichlet:
    central in the interior, one-sided second-order at the two boundary
    layers.  Trailing component axes pass through untouched.
    """
    h = grid.h[axis]
    if grid.bc == PERIODIC:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)

    out = np.empty_like(values)
    n = grid.n[axis]

    def sl(idx):
        s = [slice(None)] * values.ndim
        s[axis] = idx
        return tuple(s)

    out[sl(slice(1, n - 1))] = (
        values[sl(slice(2, n))] - values[sl(slice(0, n - 2))]
    ) / (2.0 * h)
    out[sl(0)] = (-3.0 * values[sl(0)] + 4.0 * values[sl(1)] - values[sl(2)]) / (2.0 * h)
    out[sl(n - 1)] = (
        3.0 * values[sl(n - 1)] - 4.0 * values[sl(n - 2)] + values[sl(n - 3)]
    ) / (2.0 * h)
    return out


def gradient_vec(f: VectorField) -> TensorField:
    """Jacobian with entry (i, j) = d f_i / d x_j; absent axes give zeros."""
    grid = f.grid
    out = np.zeros(grid.shape + (3, 3))
    for j in range(grid.dim):
        out[..., :, j] = _deriv(grid, f.values, axis=j)
    return TensorField(grid, out)


def divergence_vec(f: VectorField) -> ScalarField:
    grid = f.grid
    out = np.zeros(grid.shape)
    for a in range(grid.dim):
        out += _deriv(grid, f.values[..., a], axis=a)
    return ScalarField(grid, out)


def divergence_tensor(a: TensorField) -> VectorField:
    """(div A)_i = sum_j d A_ij / d x_j."""
    grid = a.grid
    out = np.zeros(grid.shape + (3,))
    for j in range(grid.dim):
        out += _deriv(grid, a.values[..., :, j], axis=j)
    return VectorField(grid, out)


def laplacian_lambda(d: VectorField, tensor: ElasticTensor) -> VectorField:
    """div(L : grad d); with isotropic L this is k times the componentwise Laplacian."""
    grad = gradient_vec(d)
    return divergence_tensor(TensorField(d.grid, tensor.apply(grad.values)))


def advect(v: VectorField, f: VectorField) -> VectorField:
    """(v . grad) f = (grad f) v per node."""
    if v.grid is not f.grid and v.grid != f.grid:
        raise ValueError("advect requires fields on the same grid")
    grad = gradient_vec(f)
    return VectorField(f.grid, np.einsum("...ij,...j->...i", grad.values, v.values))


# ---------------------------------------------------------------------------
# quadrature, norms, inner products
# ---------------------------------------------------------------------------

def integrate(f: ScalarField) -> float:
    """Midpoint rule: sum of nodal values times the cell volume."""
    return float(np.sum(f.values) * f.grid.cell_volume)


def _magnitude(f) -> np.ndarray:
    if isinstance(f, ScalarField):
        return np.abs(f.values)
    if isinstance(f, VectorField):
        return np.sqrt(np.sum(f.values**2, axis=-1))
    if isinstance(f, TensorField):
        return np.sqrt(np.sum(f.values**2, axis=(-2, -1)))
    raise TypeError(f"not a field: {type(f)!r}")


def lp_norm(f, p) -> float:
    """L^p norm with midpoint quadrature; p = inf gives the max norm."""
    mag = _magnitude(f)
    if p == math.inf or p == "inf":
        return float(np.max(mag))
    p = float(p)
    if p < 1.0:
        raise ValueError("p must satisfy 1 <= p <= inf")
    return float((np.sum(mag**p) * f.grid.cell_volume) ** (1.0 / p))


def w1p_seminorm(f: VectorField, p) -> float:
    """L^p norm of the pointwise Frobenius norm of grad f."""
    return lp_norm(gradient_vec(f), p)


def inner(a, b) -> float:
    """L^2 inner product; contracts all component axes."""
    if type(a) is not type(b):
        raise TypeError("inner product requires fields of the same kind")
    prod = a.values * b.values
    comp_axes = tuple(range(a.grid.dim, prod.ndim))
    if comp_axes:
        prod = np.sum(prod, axis=comp_axes)
    return float(np.sum(prod) * a.grid.cell_volume)


def l2_norm_sq(a) -> float:
    return inner(a, a)


# ---------------------------------------------------------------------------
# discrete integration-by-parts residuals
# ---------------------------------------------------------------------------

def ibp_divergence_residual(a: TensorField, phi: VectorField) -> float:
    """| (div A, phi) + (A : grad phi) |; zero to rounding on periodic grids."""
    return abs(inner(divergence_tensor(a), phi) + inner(a, gradient_vec(phi)))


def ibp_laplacian_residual(d: VectorField, phi: VectorField, tensor: ElasticTensor) -> float:
    """| (div(L : grad d), phi) + (L : grad d ; grad phi) |."""
    flux = TensorField(d.grid, tensor.apply(gradient_vec(d).values))
    return abs(inner(divergence_tensor(flux), phi) + inner(flux, gradient_vec(phi)))


def ibp_pair(a: TensorField, phi: VectorField) -> float:
    return ibp_divergence_residual(a, phi)
