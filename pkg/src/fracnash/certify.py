"""Empirical certification of Nash-type inequalities and their transfers.

A certificate records, per normalized sample g = f/||f||_1, the ratio

    (A^alpha g, g) / (a ||g||_2^2 [B(b ||g||_2^2)]^alpha)

together with its infimum and witness.  The half-power integral check,
the quantified half-power transfer, and the Jensen transfer implement the
intermediate inequalities of the fractional-power argument so they can be
exercised sample by sample.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import panel_nodes
from .rates import RateFunction
from .spectral import ScalarFunction, SpectralOperator

__all__ = [
    "NashCertificate",
    "nash_ratio",
    "rho_shift",
    "halfpower_integral_check",
    "halfpower_transfer_check",
    "jensen_transfer_check",
    "bernstein_explore",
]


@dataclass(frozen=True)
class NashCertificate:
    """Result of a ratio optimization over an ensemble."""

    ratio_infimum: float
    witness: np.ndarray
    alpha: float
    ensemble: str
    ratios: np.ndarray
    skipped: int
    constant_a: float = 1.0
    constant_b: float = 1.0
    l1_norms: np.ndarray = field(default_factory=lambda: np.empty(0))
    l2sq_norms: np.ndarray = field(default_factory=lambda: np.empty(0))
    forms: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.ratios.size and not math.isclose(
            self.ratio_infimum, float(np.min(self.ratios)), rel_tol=1e-12, abs_tol=1e-300
        ):
            raise ValueError("certificate infimum must equal the minimum recorded ratio")

    def rows(self):
        """One record per scored sample: norms, form, ratio."""
        for i in range(self.ratios.size):
            yield {
                "sample": i,
                "l1": float(self.l1_norms[i]),
                "l2sq": float(self.l2sq_norms[i]),
                "form": float(self.forms[i]),
                "ratio": float(self.ratios[i]),
            }


def _normalized_l1(op: SpectralOperator, samples: np.ndarray) -> np.ndarray:
    w = op.space.weights
    l1 = np.abs(samples) @ w
    if np.any(l1 <= 0):
        raise ValueError("ensemble contains a sample with ||f||_1 = 0")
    return samples / l1[:, None]


def _rate_batch(B, xs: np.ndarray) -> np.ndarray:
    if isinstance(B, RateFunction):
        return B.eval_batch(xs)
    b_fn = B.fn if isinstance(B, ScalarFunction) else B
    return np.asarray([b_fn(x) for x in np.asarray(xs, dtype=float)], dtype=float)


def nash_ratio(op: SpectralOperator, B, alpha: float, ensemble,
               descriptor: str = "", a: float = 1.0, b: float = 1.0) -> NashCertificate:
    """Infimum of (A^alpha g, g) / (a ||g||_2^2 [B(b ||g||_2^2)]^alpha) over the ensemble.

    Samples whose denominator is <= 0 (B vanishing at small norms) are
    excluded and counted, mirroring the log_+ convention.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    samples = np.atleast_2d(np.asarray(ensemble, dtype=float))
    g = _normalized_l1(op, samples)
    w = op.space.weights
    coeffs = g @ (op.eigenvectors * w[:, None])
    lam_pow = np.where(op.eigenvalues > 0, op.eigenvalues, 0.0) ** alpha
    forms = coeffs**2 @ lam_pow
    l2sq = np.sum(coeffs**2, axis=1)
    bvals = _rate_batch(B, b * l2sq)
    denom = a * l2sq * np.where(bvals > 0, bvals, np.nan) ** alpha
    scored = np.isfinite(denom) & (denom > 0)
    skipped = int(np.sum(~scored))
    if not np.any(scored):
        raise ValueError("all ensemble samples have degenerate denominators")
    ratios = forms[scored] / denom[scored]
    witness_idx = np.flatnonzero(scored)[int(np.argmin(ratios))]
    return NashCertificate(
        ratio_infimum=float(np.min(ratios)),
        witness=g[witness_idx].copy(),
        alpha=alpha,
        ensemble=descriptor,
        ratios=ratios,
        skipped=skipped,
        constant_a=a,
        constant_b=b,
        l1_norms=np.ones(ratios.size),
        l2sq_norms=l2sq[scored],
        forms=forms[scored],
    )


def rho_shift(op: SpectralOperator, rho: float) -> SpectralOperator:
    """A + rho I: eigenvalues shift, eigenvectors stay."""
    if rho <= 0:
        raise ValueError("rho must be > 0")
    return SpectralOperator(op.space, op.eigenvalues + rho, op.eigenvectors)


def halfpower_integral_check(op: SpectralOperator, B, g, T: float, time_grid=None):
    """Both sides of int_{v(T)}^{v(0)} B(sqrt(x)) dx <= (A^{1/2} g, g)^2.

    phi(t) = ||e^{-t sqrt(A)} g||_2^2 is evaluated spectrally on the grid
    (monotonicity is the grid-coarseness guard), v = phi^2, and the x
    integral is done by adaptive quadrature on B(sqrt(.)).
    """
    if T <= 0:
        raise ValueError("T must be > 0")
    g = np.asarray(g, dtype=float)
    l1 = op.space.norm(g, 1)
    if l1 > 1.0 + 1e-10:
        raise ValueError("halfpower check requires ||g||_1 <= 1")
    if time_grid is None:
        time_grid = np.linspace(0.0, T, 65)
    time_grid = np.asarray(time_grid, dtype=float)
    c2 = op.coefficients(g) ** 2
    sq = np.sqrt(op.eigenvalues)
    phi = np.exp(-2.0 * np.outer(time_grid, sq)) @ c2
    if np.any(np.diff(phi) > 1e-12 * max(phi[0], 1e-300)):
        raise ValueError("time grid too coarse: phi is not numerically non-increasing")
    v0 = float(phi[0] ** 2)
    vt = float(np.exp(-2.0 * T * sq) @ c2) ** 2
    rhs = float(np.dot(sq, c2)) ** 2
    if v0 <= vt:
        return 0.0, rhs
    lhs = None
    # rates from measured profiles are sups of affine functions (kinks),
    # so panel refinement converges quadratically rather than spectrally
    for panels in (24, 48):
        nodes, weights = panel_nodes(vt, v0, panels, order=8)
        vals = _rate_batch(B, np.sqrt(nodes))
        est = float(np.dot(weights, vals))
        if lhs is not None and abs(est - lhs) > 1e-8 * max(1.0, abs(est)):
            raise ValueError("half-power integral quadrature did not converge")
        lhs = est
    return float(lhs), rhs


def halfpower_transfer_check(op: SpectralOperator, B, ensemble, eps_values=(0.25, 0.5, 0.75)):
    """Minimum slack of (1-eps^2)^{1/2} ||g||_2^2 [B(eps ||g||_2^2)]^{1/2} <= (A^{1/2} g, g).

    Returns (min_slack, rows); the inequality is the half-power transfer
    of a base Nash inequality and is only meaningful when the base has
    been certified for the whole sphere.
    """
    samples = np.atleast_2d(np.asarray(ensemble, dtype=float))
    g = _normalized_l1(op, samples)
    coeffs = g @ (op.eigenvectors * op.space.weights[:, None])
    forms_half = coeffs**2 @ np.sqrt(op.eigenvalues)
    l2sq = np.sum(coeffs**2, axis=1)
    min_slack = math.inf
    rows = []
    for eps in eps_values:
        bvals = np.maximum(_rate_batch(B, eps * l2sq), 0.0)
        lhs = math.sqrt(1.0 - eps**2) * l2sq * np.sqrt(bvals)
        slack = forms_half - lhs
        i = int(np.argmin(slack))
        rows.append({"eps": eps, "min_slack": float(slack[i]), "l2sq": float(l2sq[i])})
        min_slack = min(min_slack, float(slack[i]))
    return min_slack, rows


def jensen_transfer_check(op: SpectralOperator, lam_fn: ScalarFunction, phi: ScalarFunction,
                          ensemble):
    """Per-sample convexity transfer and the raw Jensen step.

    For each f normalized to ||f||_1 = 1: when ||f||_2^2 Lam(||f||_2^2)
    <= (Af,f) holds, so must ||f||_2^2 (Phi o Lam)(||f||_2^2) <= (Phi(A)f,f);
    the raw step Phi((Af,f)) <= (Phi(A)f,f) is checked at ||f||_2 = 1.
    Returns (min_transfer_slack, min_raw_slack, checked_count).
    """
    if not phi.non_decreasing or not phi.convex:
        raise ValueError("Phi must be declared convex and non-decreasing")
    lam_max = float(op.eigenvalues[-1])
    probe = np.linspace(0.0, max(lam_max, 1.0), 33)
    phi.spot_check(probe)
    if isinstance(lam_fn, ScalarFunction) and lam_fn.non_decreasing:
        lam_fn.spot_check(probe)

    samples = np.atleast_2d(np.asarray(ensemble, dtype=float))
    g = _normalized_l1(op, samples)
    w = op.space.weights
    coeffs = g @ (op.eigenvectors * w[:, None])
    lam = op.eigenvalues
    phi_lam = np.asarray([float(phi(l)) for l in lam])
    forms = coeffs**2 @ lam
    phi_forms = coeffs**2 @ phi_lam
    l2sq = np.sum(coeffs**2, axis=1)

    min_transfer = math.inf
    checked = 0
    for i in range(l2sq.size):
        lam_val = float(lam_fn(l2sq[i]))
        if l2sq[i] * lam_val <= forms[i]:
            checked += 1
            slack = phi_forms[i] - l2sq[i] * float(phi(lam_val))
            min_transfer = min(min_transfer, slack)

    # raw Jensen on the l2-normalized versions: spectral measure is then a
    # probability measure and Phi((Af,f)) <= (Phi(A)f,f) is exact
    c2n = coeffs**2 / l2sq[:, None]
    raw_forms = c2n @ lam
    raw_phi = c2n @ phi_lam
    raw_slack = raw_phi - np.asarray([float(phi(v)) for v in raw_forms])
    return min_transfer, float(np.min(raw_slack)), checked


def bernstein_explore(op: SpectralOperator, g_fn: ScalarFunction, B, ensemble,
                      descriptor: str = ""):
    """Empirical ratio statistics for (g(A)f,f) vs ||f||_2^2 (g o B)(||f||_2^2).

    Exploratory only: whether general Bernstein functions transfer Nash
    inequalities is an open question, so no pass/fail is attached.
    """
    if float(g_fn(0.0)) < 0:
        raise ValueError("Bernstein candidate must satisfy g(0) >= 0")
    lam_max = float(op.eigenvalues[-1])
    grid = np.linspace(0.0, max(lam_max, 1.0), 33)
    vals = np.asarray([float(g_fn(x)) for x in grid])
    if np.any(np.diff(vals) < -1e-12):
        raise ValueError("Bernstein candidate must be non-decreasing")
    slopes = np.diff(vals) / np.diff(grid)
    if np.any(np.diff(slopes) > 1e-9):
        raise ValueError("Bernstein candidate must be concave on the sampled grid")

    samples = np.atleast_2d(np.asarray(ensemble, dtype=float))
    gs = _normalized_l1(op, samples)
    coeffs = gs @ (op.eigenvectors * op.space.weights[:, None])
    g_lam = np.asarray([float(g_fn(l)) for l in op.eigenvalues])
    forms = coeffs**2 @ g_lam
    l2sq = np.sum(coeffs**2, axis=1)
    b_of = np.maximum(_rate_batch(B, l2sq), 0.0)
    denom = l2sq * np.asarray([float(g_fn(v)) for v in b_of])
    scored = denom > 0
    ratios = forms[scored] / denom[scored]
    return {
        "ensemble": descriptor,
        "count": int(ratios.size),
        "skipped": int(np.sum(~scored)),
        "infimum": float(np.min(ratios)) if ratios.size else math.nan,
        "median": float(np.median(ratios)) if ratios.size else math.nan,
        "max": float(np.max(ratios)) if ratios.size else math.nan,
    }
