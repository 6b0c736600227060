"""Dense SPD linear algebra built on a symmetric eigendecomposition."""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric
from .tolerances import TOL


def as_vec(x, dim=None, name="vector"):
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def as_mat(m, name="matrix"):
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _check_symmetric(m):
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix is not square: {m.shape}")
    if np.max(np.abs(m - m.T), initial=0.0) > TOL.symmetry * max(1.0, np.max(np.abs(m), initial=0.0)):
        raise NotSymmetric("matrix is not symmetric")


def eigh(m):
    """Symmetric eigendecomposition (cyclic Jacobi), eigenvalues ascending."""
    m = as_mat(m)
    _check_symmetric(m)
    return kernels.jacobi_eigh(0.5 * (m + m.T), TOL.jacobi)


@dataclass(frozen=True, eq=False)
class SpdFactorization:
    """Eigen-based factorization of a symmetric positive definite matrix."""

    source: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sqrt: np.ndarray
    inv_sqrt: np.ndarray
    inv: np.ndarray

    @property
    def dim(self):
        return self.source.shape[0]

    @property
    def log_det(self):
        return float(np.sum(np.log(self.eigenvalues)))

    def solve(self, b):
        return self.inv @ b

    def inv_norm(self, x):
        """||x|| in the V^{-1} norm."""
        return float(np.linalg.norm(self.inv_sqrt @ x))


def spd_sqrt(m):
    m = as_mat(m)
    w, Q = eigh(m)
    if w[0] <= TOL.min_eigenvalue:
        raise NotPositiveDefinite(f"minimum eigenvalue {w[0]:.3e} is not positive")
    QT = Q.T
    sqrt = (Q * np.sqrt(w)) @ QT
    inv_sqrt = (Q / np.sqrt(w)) @ QT
    inv = (Q / w) @ QT
    # symmetrize away rounding so the factors are exactly symmetric
    sqrt = 0.5 * (sqrt + sqrt.T)
    inv_sqrt = 0.5 * (inv_sqrt + inv_sqrt.T)
    inv = 0.5 * (inv + inv.T)
    for a in (m, w, Q, sqrt, inv_sqrt, inv):
        a.setflags(write=False)
    return SpdFactorization(m, w, Q, sqrt, inv_sqrt, inv)


def rank_one_update(v, x):
    v = as_mat(v)
    x = as_vec(x, v.shape[0], "x")
    if v.shape[0] != v.shape[1]:
        raise DimensionMismatch("matrix is not square")
    out = v + np.outer(x, x)
    # outer(x, x) is symmetric bit-for-bit, so symmetry of v carries over exactly
    return out


def weighted_norm(x, m):
    m = as_mat(m)
    x = as_vec(x, m.shape[0], "x")
    w, _ = eigh(m)
    if w[0] <= TOL.min_eigenvalue:
        raise NotPositiveDefinite("weight matrix is not positive definite")
    q = float(x @ m @ x)
    return float(np.sqrt(max(q, 0.0)))


def solve_spd(m, b):
    m = as_mat(m)
    b = as_vec(b, m.shape[0], "b")
    f = spd_sqrt(m)
    x = f.solve(b)
    # one step of iterative refinement
    return x + f.solve(b - m @ x)


def log_det(m):
    return spd_sqrt(m).log_det
