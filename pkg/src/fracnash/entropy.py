"""Entropy functionals, dyadic truncation machinery, and log-Sobolev checks.

The truncation f_k = (f - 2^k)^+ ∧ 2^k slices the range of a non-negative
function into dyadic layers; the layers reconstruct f, their Dirichlet
energies are superadditive, and the Markov-inequality step
||f_k||_1 <= 2^{-k} ||f_k||_2 (for ||f||_2 = 1) is exactly checkable.
"""

import math
from dataclasses import dataclass

import numpy as np

from .generators import GRAPH_KINDS, GeneratorSpec, dirichlet_energy
from .spectral import MeasureSpace, SpectralOperator

__all__ = [
    "EntropyReport",
    "truncate",
    "default_k_range",
    "truncation_energy_check",
    "truncation_l1_l2_check",
    "entropy",
    "logsob_check",
    "logsob_sweep",
]


@dataclass(frozen=True)
class EntropyReport:
    """One sample's entropy/energy bookkeeping for a log-Sobolev inequality."""

    entropy: float
    energy: float
    l2sq: float
    constant_used: float
    slack: float

    def __post_init__(self):
        expected = self.constant_used * (self.energy + self.l2sq) - self.entropy
        if not math.isclose(self.slack, expected, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError("slack must equal C*(energy + l2sq) - entropy")

    @classmethod
    def build(cls, entropy_val: float, energy: float, l2sq: float, c: float) -> "EntropyReport":
        return cls(entropy=entropy_val, energy=energy, l2sq=l2sq, constant_used=c,
                   slack=c * (energy + l2sq) - entropy_val)


def truncate(f, k: int) -> np.ndarray:
    """Dyadic slice (f - 2^k)^+ ∧ 2^k of a non-negative vector."""
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("truncation requires a non-negative function")
    level = 2.0**k
    return np.minimum(np.maximum(f - level, 0.0), level)


def default_k_range(f) -> range:
    """Dyadic window covering [min positive value, max value] of f."""
    f = np.asarray(f, dtype=float)
    pos = f[f > 0]
    if pos.size == 0:
        return range(0, 1)
    k_hi = int(math.ceil(math.log2(float(np.max(pos))))) + 1
    k_lo = int(math.floor(math.log2(float(np.min(pos))))) - 1
    return range(k_lo, k_hi + 1)


def truncation_energy_check(spec: GeneratorSpec, f, k_range=None) -> float:
    """Superadditivity slack E(f) - sum_k E(f_k) for a graph Dirichlet form."""
    if spec.kind not in GRAPH_KINDS:
        raise ValueError("truncation energy check requires a graph kind")
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("truncation requires a non-negative function")
    if k_range is None:
        k_range = default_k_range(f)
    total = sum(dirichlet_energy(spec, truncate(f, k)) for k in k_range)
    return dirichlet_energy(spec, f) - total


def truncation_l1_l2_check(f, space: MeasureSpace, k_range=None) -> float:
    """Worst violation of ||f_k||_1 <= 2^{-k} ||f_k||_2 over the window.

    Valid whenever ||f||_2 = 1; returns min over k of
    2^{-k} ||f_k||_2 - ||f_k||_1 (>= 0 means the chain holds).
    """
    f = np.asarray(f, dtype=float)
    if k_range is None:
        k_range = default_k_range(f)
    worst = math.inf
    for k in k_range:
        fk = truncate(f, k)
        l2 = space.norm(fk, 2)
        if l2 == 0.0:
            continue
        worst = min(worst, 2.0**-k * l2 - space.norm(fk, 1))
    return worst


def entropy(f, space: MeasureSpace) -> float:
    """sum_i w_i f_i^2 log(|f_i| / ||f||_2), with 0 log 0 = 0."""
    f = np.asarray(f, dtype=float)
    l2 = space.norm(f, 2)
    if l2 == 0.0:
        raise ValueError("entropy of the zero function is undefined")
    a = np.abs(f)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(a > 0, a * a * np.log(a / l2), 0.0)
    return float(np.sum(space.weights * terms))


def logsob_sweep(op: SpectralOperator, alpha: float, c: float, ensemble) -> list[EntropyReport]:
    """EntropyReport per sample for entropy <= C[(A^alpha f, f) + ||f||_2^2]."""
    samples = np.atleast_2d(np.asarray(ensemble, dtype=float))
    w = op.space.weights
    coeffs = samples @ (op.eigenvectors * w[:, None])
    lam_pow = np.where(op.eigenvalues > 0, op.eigenvalues, 0.0) ** alpha
    energies = coeffs**2 @ lam_pow
    l2sqs = np.sum(coeffs**2, axis=1)
    out = []
    for i in range(samples.shape[0]):
        ent = entropy(samples[i], op.space)
        out.append(EntropyReport.build(ent, float(energies[i]), float(l2sqs[i]), c))
    return out


def logsob_check(op: SpectralOperator, alpha: float, c: float, ensemble) -> EntropyReport:
    """Minimal-slack EntropyReport over the ensemble."""
    if not math.isclose(op.space.total_mass, 1.0, rel_tol=1e-9):
        raise ValueError("log-Sobolev check requires probability-normalized weights")
    reports = logsob_sweep(op, alpha, c, ensemble)
    return min(reports, key=lambda r: r.slack)
