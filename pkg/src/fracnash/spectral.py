"""Weighted finite measure spaces with spectral functional calculus.

Everything downstream (semigroups, fractional powers, Nash ratios) runs on
a finite model of L^2(X, mu): n points carrying positive weights, an
operator given by its eigendecomposition, and all inner products, norms
and adjoints taken with respect to the weights.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "MeasureSpace",
    "SpectralOperator",
    "ScalarFunction",
    "eigendecompose",
    "apply_function",
    "quadratic_form",
    "norm_1_to_inf",
    "heat_semigroup",
    "fractional_semigroup",
]

EIG_TOL = 1e-10


@dataclass(frozen=True)
class MeasureSpace:
    """n points with strictly positive mu-masses."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(w <= 0):
            raise ValueError("all weights must be strictly positive")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def inner(self, f, g) -> float:
        return float(np.sum(self.weights * np.conj(f) * g).real)

    def norm(self, f, p: float = 2) -> float:
        f = np.asarray(f, dtype=float)
        if np.isinf(p):
            return float(np.max(np.abs(f)))
        return float(np.sum(self.weights * np.abs(f) ** p) ** (1.0 / p))

    @staticmethod
    def counting(n: int) -> "MeasureSpace":
        return MeasureSpace(np.ones(n))


@dataclass(frozen=True)
class ScalarFunction:
    """Evaluation rule x -> Phi(x) on [0, inf) with optional shape flags."""

    fn: Callable
    non_decreasing: bool = False
    convex: bool = False
    name: str = ""

    def __call__(self, x):
        return self.fn(x)

    def spot_check(self, grid, tol: float = 1e-9) -> None:
        """Verify the declared flags on a sample grid; raises on failure."""
        x = np.sort(np.asarray(grid, dtype=float))
        y = np.asarray([float(self.fn(v)) for v in x])
        if self.non_decreasing and np.any(np.diff(y) < -tol):
            raise ValueError(f"{self.name or 'function'} declared non-decreasing but is not on the grid")
        if self.convex:
            # discrete slopes must be non-decreasing
            slopes = np.diff(y) / np.diff(x)
            if np.any(np.diff(slopes) < -tol * max(1.0, np.max(np.abs(slopes)))):
                raise ValueError(f"{self.name or 'function'} declared convex but is not on the grid")


@dataclass(frozen=True)
class SpectralOperator:
    """Non-negative self-adjoint operator via eigenpairs orthonormal in mu."""

    space: MeasureSpace
    eigenvalues: np.ndarray   # ascending, >= 0
    eigenvectors: np.ndarray  # columns u_i, <u_i, u_j>_mu = delta_ij

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        u = np.asarray(self.eigenvectors, dtype=float)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", u)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def coefficients(self, f) -> np.ndarray:
        """Spectral coefficients <u_i, f>_mu."""
        return self.eigenvectors.T @ (self.space.weights * np.asarray(f, dtype=float))

    def matrix(self) -> np.ndarray:
        return apply_function(self, ScalarFunction(lambda x: x, name="identity"))


def eigendecompose(matrix, space: MeasureSpace, sym_tol: float = 1e-8) -> SpectralOperator:
    """Diagonalize a matrix that is self-adjoint in the weighted inner product.

    Self-adjointness means W M = M^T W for W = diag(weights); the similarity
    S = W^{1/2} M W^{-1/2} is then symmetric and LAPACK eigh applies.
    Eigenvalues in [-1e-10, 0) are clamped to 0, anything lower is rejected.
    """
    m = np.asarray(matrix, dtype=float)
    n = space.n
    if m.shape != (n, n):
        raise ValueError(f"matrix shape {m.shape} does not match space size {n}")
    w = space.weights
    wm = w[:, None] * m
    asym = float(np.max(np.abs(wm - wm.T)))
    scale = max(1.0, float(np.max(np.abs(wm))))
    if asym > sym_tol * scale:
        raise ValueError(f"matrix is not self-adjoint w.r.t. the weights (asymmetry {asym:.3e})")
    sqw = np.sqrt(w)
    sym = 0.5 * (wm + wm.T) / np.outer(sqw, sqw)
    lam, v = np.linalg.eigh(sym)
    if lam[0] < -EIG_TOL:
        raise ValueError(f"operator has a negative eigenvalue {lam[0]:.3e}; non-negativity required")
    lam = np.clip(lam, 0.0, None)
    u = v / sqw[:, None]
    return SpectralOperator(space, lam, u)


def apply_function(op: SpectralOperator, phi) -> np.ndarray:
    """Matrix of Phi(A) = sum_i Phi(lambda_i) u_i <u_i, .>_mu."""
    fn = phi.fn if isinstance(phi, ScalarFunction) else phi
    vals = np.empty(op.n)
    for i, lam in enumerate(op.eigenvalues):
        try:
            vals[i] = float(fn(lam))
        except Exception as exc:
            raise ValueError(f"function failed at eigenvalue {lam!r} (index {i}): {exc}") from exc
    if not np.all(np.isfinite(vals)):
        i = int(np.argmax(~np.isfinite(vals)))
        raise ValueError(f"function is not finite at eigenvalue {op.eigenvalues[i]!r} (index {i})")
    u = op.eigenvectors
    return (u * vals) @ (u.T * op.space.weights[None, :])


def quadratic_form(op: SpectralOperator, alpha: float, f) -> float:
    """(A^alpha f, f)_mu = sum_i lambda_i^alpha |<f, u_i>_mu|^2; alpha=0 gives ||f||_2^2."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    c = op.coefficients(f)
    lam = op.eigenvalues
    if alpha == 0:
        pw = np.ones_like(lam)
    else:
        pw = np.where(lam > 0, lam, 0.0) ** alpha
    return float(np.sum(pw * c * c))


def norm_1_to_inf(matrix, space: MeasureSpace) -> float:
    """L^1(mu) -> L^inf operator norm, max |K(i,j)| of the integral kernel.

    Kernel convention K(i,j) = M_ij / w_j, so (Tf)(i) = sum_j K(i,j) f(j) w_j.
    """
    m = np.asarray(matrix, dtype=float)
    return float(np.max(np.abs(m / space.weights[None, :])))


def heat_semigroup(op: SpectralOperator, t: float) -> np.ndarray:
    """e^{-tA} as a matrix."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return apply_function(op, ScalarFunction(lambda x: np.exp(-t * x), name=f"exp(-{t}x)"))


def fractional_semigroup(op: SpectralOperator, alpha: float, t: float) -> np.ndarray:
    """e^{-t A^alpha} via spectral calculus (the first of the two routes)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return apply_function(op, ScalarFunction(lambda x: np.exp(-t * x**alpha), name="frac-heat"))
