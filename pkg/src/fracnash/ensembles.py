"""Test-function ensembles for the inequality certificates.

Four families, mixed by default: non-negative uniforms, signed Gaussians,
heat-smoothed Gaussians e^{-sA} xi at several smoothing times, and
near-indicator spikes.  Nash infima tend to be approached near spikes and
near-ground-state vectors, so mixing families guards against a lucky draw.
"""

import numpy as np

from .spectral import SpectralOperator

__all__ = ["standard_ensemble", "coefficient_ensemble"]

SMOOTHING_TIMES = (0.01, 0.1, 1.0)


def standard_ensemble(op: SpectralOperator, per_family: int = 200, seed: int = 0,
                      smoothing_times=SMOOTHING_TIMES):
    """Sample vectors on op's space; returns (samples, descriptor).

    samples has one row per function; nothing is normalized here.
    """
    rng = np.random.default_rng(seed)
    n = op.n
    blocks = []
    blocks.append(rng.uniform(0.0, 1.0, size=(per_family, n)))
    blocks.append(rng.standard_normal((per_family, n)))
    lam = op.eigenvalues
    u = op.eigenvectors
    w = op.space.weights
    for s in smoothing_times:
        xi = rng.standard_normal((per_family, n))
        coef = xi @ (u * w[:, None])          # <u_i, xi>_mu per row
        blocks.append((coef * np.exp(-s * lam)) @ u.T)
    spikes = np.zeros((per_family, n))
    idx = rng.integers(0, n, size=per_family)
    spikes[np.arange(per_family), idx] = 1.0 / w[idx]
    spikes += 0.01 * rng.uniform(0.0, 1.0, size=(per_family, n))
    blocks.append(spikes)
    samples = np.vstack(blocks)
    descriptor = (
        f"families=uniform+,gauss,heat-smoothed{tuple(smoothing_times)},spikes; "
        f"per_family={per_family}; seed={seed}"
    )
    return samples, descriptor


def coefficient_ensemble(n: int, count: int, seed: int = 0, nonneg_share: float = 0.25):
    """Plain coefficient-vector ensemble (Gaussian plus some non-negative rows)."""
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal((count, n))
    k = int(count * nonneg_share)
    if k:
        samples[:k] = np.abs(samples[:k])
    return samples
