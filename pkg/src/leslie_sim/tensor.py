"""Small fixed-dimension tensor algebra: R^3 vectors, 3x3 matrices, and the
constant rank-4 elasticity tensor.

All functions accept stacked arrays (leading axes are broadcast), so the same
routines serve both pointwise values and whole grid fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def sym(m: np.ndarray) -> np.ndarray:
    """Symmetric part (M + M^T)/2, acting on the trailing two axes."""
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def skw(m: np.ndarray) -> np.ndarray:
    """Skew-symmetric part (M - M^T)/2, acting on the trailing two axes."""
    return 0.5 * (m - np.swapaxes(m, -1, -2))


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Outer product a b^T with entries a_i b_j."""
    return a[..., :, None] * b[..., None, :]


def frobenius(a: np.ndarray, b: np.ndarray):
    """Double contraction A : B = sum_ij A_ij B_ij over the trailing axes."""
    return np.einsum("...ij,...ij->...", a, b)


class EllipticityError(ValueError):
    """Sampled ellipticity of an elasticity tensor is not strictly positive."""


@dataclass(frozen=True)
class ElasticTensor:
    """Constant rank-4 tensor with major symmetry L_ijkl = L_klij.

    ``eta`` is the (estimated) strong-ellipticity constant:
    (a x b) : L : (a x b) >= eta |a|^2 |b|^2 for unit a, b.
    """

    entries: np.ndarray
    eta: float

    MAJOR_SYMMETRY_RTOL = 1e-12

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        if entries.shape != (3, 3, 3, 3):
            raise ValueError(f"elasticity tensor must be 3x3x3x3, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("elasticity tensor has non-finite entries")
        scale = np.max(np.abs(entries))
        defect = np.max(np.abs(entries - entries.transpose(2, 3, 0, 1)))
        if defect > self.MAJOR_SYMMETRY_RTOL * max(scale, 1.0):
            raise ValueError(
                f"major symmetry violated: max |L_ijkl - L_klij| = {defect:.3e}"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def isotropic(cls, k: float = 1.0) -> "ElasticTensor":
        """L_ijkl = k delta_ik delta_jl, so L : A = k A and eta = k."""
        if k <= 0.0:
            raise ValueError("isotropic stiffness k must be positive")
        eye = np.eye(3)
        entries = k * np.einsum("ik,jl->ijkl", eye, eye)
        return cls(entries=entries, eta=float(k))

    @classmethod
    def from_entries(cls, entries, n_samples: int = 2000, seed: int = 0) -> "ElasticTensor":
        """Build from an explicit 81-entry list (row-major i,j,k,l).

        The ellipticity constant is estimated by sampling; construction fails
        if major symmetry is violated, and raises :class:`EllipticityError`
        if the sampled ellipticity is not strictly positive.
        """
        arr = np.asarray(entries, dtype=np.float64).reshape(3, 3, 3, 3)
        tensor = cls(entries=arr, eta=1.0)
        eta = ellipticity_check(tensor, n_samples=n_samples, seed=seed)
        if eta <= 0.0:
            raise EllipticityError(f"sampled ellipticity constant {eta:.3e} <= 0")
        return cls(entries=arr, eta=eta)

    def apply(self, a: np.ndarray) -> np.ndarray:
        """Contraction (L : A)_ij = sum_kl L_ijkl A_kl over trailing axes."""
        return np.einsum("ijkl,...kl->...ij", self.entries, a)


def lambda_apply(tensor: ElasticTensor, a: np.ndarray) -> np.ndarray:
    return tensor.apply(a)


def _sphere_grid(n_theta: int = 13, n_phi: int = 24) -> np.ndarray:
    theta = np.linspace(0.0, np.pi, n_theta)
    phi = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    dirs = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    )
    return dirs.reshape(-1, 3)


def ellipticity_check(tensor: ElasticTensor, n_samples: int = 1000, seed: int = 0) -> float:
    """Estimate the strong-ellipticity constant of ``tensor``.

    Returns min over sampled unit pairs (a, b) of (a x b) : L : (a x b),
    combining a deterministic coarse sphere grid with ``n_samples`` seeded
    random unit pairs.  Deterministic for a given seed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    grid = _sphere_grid()
    rng = np.random.default_rng(seed)
    rnd = rng.normal(size=(2 * n_samples, 3))
    rnd /= np.linalg.norm(rnd, axis=-1, keepdims=True)
    a_rnd, b_rnd = rnd[:n_samples], rnd[n_samples:]

    # (a x b) : L : (a x b) = L_ijkl a_i b_j a_k b_l
    grid_vals = np.einsum("ijkl,pi,qj,pk,ql->pq", tensor.entries, grid, grid, grid, grid)
    rnd_vals = np.einsum("ijkl,pi,pj,pk,pl->p", tensor.entries, a_rnd, b_rnd, a_rnd, b_rnd)
    return float(min(grid_vals.min(), rnd_vals.min()))
