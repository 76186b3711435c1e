"""Ornstein-Uhlenbeck model: Hermite truncation with Gauss-Hermite quadrature.

The generator is diagonal on the orthonormal Hermite basis of L^2(gamma_1)
with eigenvalues 0, 1, 2, ...; pointwise quantities (L^1/L^4 norms,
entropies) are evaluated on the Gauss-Hermite node space, which is itself
a finite probability measure space, so the Hoelder chain and Parseval
hold exactly on the model.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from .certify import NashCertificate
from .entropy import entropy
from .spectral import MeasureSpace, SpectralOperator

__all__ = [
    "HermiteModel",
    "HermiteTensorModel",
    "mixed_norm",
    "exponential_coefficients",
    "ou_lsi_check",
    "ou_log_nash_check",
    "hypercontractivity_probe",
]


def _hermite_matrix(nodes: np.ndarray, degree_count: int) -> np.ndarray:
    """Orthonormal (probabilists') Hermite values h_k(x), columns k < degree_count."""
    q = nodes.size
    h = np.empty((q, degree_count))
    h[:, 0] = 1.0
    if degree_count > 1:
        h[:, 1] = nodes
    for k in range(1, degree_count - 1):
        h[:, k + 1] = (nodes * h[:, k] - math.sqrt(k) * h[:, k - 1]) / math.sqrt(k + 1)
    return h


@dataclass(frozen=True)
class HermiteModel:
    """Degrees 0..n-1 over a q-node Gauss-Hermite grid for the standard Gaussian."""

    n: int
    q: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.q == 0:
            object.__setattr__(self, "q", max(2 * self.n, 24))
        if self.q < 2 * self.n:
            raise ValueError("need q >= 2n quadrature nodes for exact L^2/L^4 norms")

    @cached_property
    def _grid(self) -> tuple[np.ndarray, np.ndarray]:
        nodes, weights = np.polynomial.hermite_e.hermegauss(self.q)
        weights = weights / math.sqrt(2.0 * math.pi)
        if not np.all(np.isfinite(weights) & (weights > 0)):
            raise ValueError(f"hermegauss weights degenerate at q={self.q}; use q <= 256")
        return nodes, weights

    @property
    def nodes(self) -> np.ndarray:
        return self._grid[0]

    @property
    def weights(self) -> np.ndarray:
        return self._grid[1]

    @cached_property
    def hermite(self) -> np.ndarray:
        return _hermite_matrix(self.nodes, self.n)

    def space(self) -> MeasureSpace:
        return MeasureSpace(self.weights)

    def values(self, coeffs) -> np.ndarray:
        """Point values on the node grid; accepts one vector or a batch."""
        c = np.asarray(coeffs, dtype=float)
        return c @ self.hermite.T if c.ndim == 2 else self.hermite @ c

    def gram_error(self) -> float:
        """Max deviation of <h_i, h_j> from delta_ij under the quadrature."""
        h = self.hermite
        gram = h.T @ (self.weights[:, None] * h)
        return float(np.max(np.abs(gram - np.eye(self.n))))

    def energy(self, coeffs, alpha: float = 1.0) -> np.ndarray:
        """(A^alpha f, f) = sum_k k^alpha c_k^2, exact in coefficients."""
        c = np.atleast_2d(np.asarray(coeffs, dtype=float))
        lam = np.arange(self.n, dtype=float)
        pw = np.where(lam > 0, lam, 0.0) ** alpha
        return c**2 @ pw

    def spectral_operator(self, degrees: int = 0) -> SpectralOperator:
        """OU as a SpectralOperator on the node space (degrees default to n)."""
        d = degrees or self.n
        if d > self.q:
            raise ValueError("cannot resolve more degrees than quadrature nodes")
        h = _hermite_matrix(self.nodes, d)
        if d < self.q:
            # complete the basis on the orthogonal complement; those modes get
            # eigenvalue d (any non-negative value, unused by in-span data).
            # Two projection passes keep the complement orthogonal to 1e-15.
            w = self.weights
            hw = np.sqrt(w)[:, None] * h
            comp = np.random.default_rng(0).standard_normal((self.q, self.q - d))
            for _ in range(2):
                comp -= hw @ (hw.T @ comp)
                comp, _ = np.linalg.qr(comp)
            full = np.hstack([h, comp / np.sqrt(w)[:, None]])
            lam = np.concatenate([np.arange(d, dtype=float), np.full(self.q - d, float(d))])
            return SpectralOperator(self.space(), lam, full)
        lam = np.arange(self.q, dtype=float)
        return SpectralOperator(self.space(), lam, h)


def mixed_norm(model: HermiteModel, coeffs, p: float) -> float:
    """||f||_p w.r.t. gamma_1 via quadrature, f = sum c_k h_k; p in {1, 2, 4}."""
    if p not in (1, 2, 4):
        raise ValueError("supported exponents are p in {1, 2, 4}")
    if p * (model.n - 1) > 2 * model.q - 1 and p != 1:
        raise ValueError(f"q={model.q} too small for exact degree-{model.n - 1} L^{p} norms")
    vals = model.values(np.asarray(coeffs, dtype=float))
    return float(np.sum(model.weights * np.abs(vals) ** p) ** (1.0 / p))


def exponential_coefficients(theta: float, n: int) -> tuple[np.ndarray, float]:
    """First n Hermite coefficients of e^{theta x} and the relative tail mass.

    c_k = e^{theta^2/2} theta^k / sqrt(k!); ||e^{theta x}||_2^2 = e^{2 theta^2}.
    """
    ks = np.arange(n, dtype=float)
    log_mag = theta * theta / 2.0 + ks * math.log(abs(theta)) - 0.5 * gammaln(ks + 1.0) \
        if theta != 0 else np.where(ks == 0, theta * theta / 2.0, -np.inf)
    signs = np.ones(n) if theta >= 0 else (-1.0) ** ks
    coeffs = signs * np.exp(log_mag)
    head = float(np.sum(coeffs**2))
    total = math.exp(2.0 * theta * theta)
    tail_rel = max(0.0, 1.0 - head / total)
    return coeffs, tail_rel


def ou_lsi_check(model: HermiteModel, ensemble) -> float:
    """min over the ensemble of (Af, f) - entropy_gamma(f), the sharp LSI slack."""
    space = model.space()
    coeffs = np.atleast_2d(np.asarray(ensemble, dtype=float))
    energies = model.energy(coeffs, 1.0)
    vals = model.values(coeffs)
    worst = math.inf
    for i in range(coeffs.shape[0]):
        worst = min(worst, float(energies[i]) - entropy(vals[i], space))
    return worst


def ou_log_nash_check(model: HermiteModel, alpha: float, ensemble,
                      descriptor: str = "") -> NashCertificate:
    """Certificate for ||f||_2^2 (log ||f||_2)^alpha <= (A^alpha f, f).

    Samples are normalized to ||f||_1 = 1 on the quadrature space; only
    those with ||f||_2 > 1 are scored (log_+ convention), the rest are
    counted as skipped.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    coeffs = np.atleast_2d(np.asarray(ensemble, dtype=float)).copy()
    vals = model.values(coeffs)
    l1 = np.abs(vals) @ model.weights
    if np.any(l1 <= 0):
        raise ValueError("ensemble contains a zero sample")
    coeffs /= l1[:, None]
    l2sq = np.sum(coeffs**2, axis=1)
    forms = model.energy(coeffs, alpha)
    log_l2 = 0.5 * np.log(l2sq)
    scored = log_l2 > 0
    if not np.any(scored):
        raise ValueError("no samples with ||f||_2 > 1; nothing to score")
    ratios = forms[scored] / (l2sq[scored] * log_l2[scored] ** alpha)
    witness_idx = np.flatnonzero(scored)[int(np.argmin(ratios))]
    return NashCertificate(
        ratio_infimum=float(np.min(ratios)),
        witness=coeffs[witness_idx].copy(),
        alpha=alpha,
        ensemble=descriptor or "ou-coefficient ensemble",
        ratios=ratios,
        skipped=int(np.sum(~scored)),
        l1_norms=np.ones(int(np.sum(scored))),
        l2sq_norms=l2sq[scored],
        forms=forms[scored],
    )


DEFAULT_THETA_GRID = (0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)


def hypercontractivity_probe(n_list, alpha: float, t: float, theta_grid=DEFAULT_THETA_GRID,
                             ensemble_size: int = 50, seed: int = 0) -> list[dict]:
    """Growth table of sup ||T_{t,alpha} f||_4 / ||f||_2 over candidates, per n.

    Candidates are random coefficient vectors plus projected exponentials
    e^{theta x}.  Growth of the ratio with n is evidence (not proof) of
    unboundedness; no limit is asserted.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    rows = []
    rng = np.random.default_rng(seed)
    for n in n_list:
        model = HermiteModel(n)
        lam = np.arange(n, dtype=float)
        damp = np.exp(-t * lam**alpha)
        best = 0.0
        best_desc = ""
        best_tail = 0.0
        candidates = [(f"gauss[{i}]", c, 0.0) for i, c in
                      enumerate(rng.standard_normal((ensemble_size, n)))]
        for theta in theta_grid:
            c, tail = exponential_coefficients(theta, n)
            candidates.append((f"exp(theta={theta})", c, tail))
        for desc, c, tail in candidates:
            norm = math.sqrt(float(np.sum(c * c)))
            if norm == 0.0:
                continue
            ratio = mixed_norm(model, damp * (c / norm), 4)
            if ratio > best:
                best = ratio
                best_desc = desc
                best_tail = tail
        rows.append({"n": n, "ratio": best, "candidate": best_desc,
                     "projection_tail": best_tail})
    return rows


@dataclass(frozen=True)
class HermiteTensorModel:
    """d-dimensional tensor Gauss-Hermite model, d <= 3, n per axis <= 8."""

    d: int
    n_axis: int
    q_axis: int = 0

    def __post_init__(self):
        if not 1 <= self.d <= 3:
            raise ValueError("tensor model supports d in {1, 2, 3}")
        if not 1 <= self.n_axis <= 8:
            raise ValueError("tensor model supports n per axis <= 8")
        if self.q_axis == 0:
            object.__setattr__(self, "q_axis", 2 * self.n_axis)

    @cached_property
    def _parts(self):
        nodes, weights = np.polynomial.hermite_e.hermegauss(self.q_axis)
        weights = weights / math.sqrt(2.0 * math.pi)
        h = _hermite_matrix(nodes, self.n_axis)
        # tensor basis: rows = node tuples, cols = degree multi-indices
        basis = h
        w = weights
        degs = np.arange(self.n_axis, dtype=float)
        for _ in range(self.d - 1):
            basis = np.kron(basis, h)
            w = np.kron(w, weights)
            degs = (degs[:, None] + np.arange(self.n_axis, dtype=float)[None, :]).ravel()
        return basis, w, degs

    def space(self) -> MeasureSpace:
        return MeasureSpace(self._parts[1])

    def lsi_min_slack(self, count: int, seed: int = 0) -> float:
        """min (Af,f) - entropy over random coefficient tensors (dim-free LSI)."""
        basis, w, degs = self._parts
        space = MeasureSpace(w)
        rng = np.random.default_rng(seed)
        worst = math.inf
        dim = self.n_axis**self.d
        for _ in range(count):
            c = rng.standard_normal(dim)
            energy = float(np.sum(degs * c * c))
            vals = basis @ c
            worst = min(worst, energy - entropy(vals, space))
        return worst
