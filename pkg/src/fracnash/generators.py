"""Constructors for the concrete generators used in the experiments.

Graph kinds (cycle, path, grid2d) build combinatorial Laplacians scaled by
1/h^2 on unit-weight spaces; `diagonal` takes an explicit spectrum; `ou`
is the Ornstein-Uhlenbeck generator represented spectrally on the Hermite
coefficient space, eigenvalues {0, 1, ..., n-1}.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .spectral import MeasureSpace, SpectralOperator, eigendecompose

__all__ = ["GeneratorSpec", "build", "dirichlet_energy", "GRAPH_KINDS"]

GRAPH_KINDS = ("cycle", "path", "grid2d")
_KINDS = GRAPH_KINDS + ("diagonal", "ou")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    size: int = 0
    h: float = 1.0
    eigenvalues: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {_KINDS}")
        if self.h <= 0:
            raise ValueError("lattice spacing h must be > 0")
        if self.kind == "diagonal":
            if self.eigenvalues is None or len(self.eigenvalues) == 0:
                raise ValueError("diagonal kind requires an explicit eigenvalue list")
            if any(l < 0 for l in self.eigenvalues):
                raise ValueError("diagonal eigenvalues must be >= 0")
        elif self.size < 2:
            raise ValueError("size must be >= 2")


def _edges(spec: GeneratorSpec) -> list[tuple[int, int]]:
    n = spec.size
    if spec.kind == "cycle":
        return [(i, (i + 1) % n) for i in range(n)]
    if spec.kind == "path":
        return [(i, i + 1) for i in range(n - 1)]
    if spec.kind == "grid2d":
        idx = lambda i, j: i * n + j
        out = []
        for i in range(n):
            for j in range(n):
                if i + 1 < n:
                    out.append((idx(i, j), idx(i + 1, j)))
                if j + 1 < n:
                    out.append((idx(i, j), idx(i, j + 1)))
        return out
    raise ValueError(f"{spec.kind} has no edge structure")


def build(spec: GeneratorSpec) -> SpectralOperator:
    """Instantiate the generator as a SpectralOperator."""
    if spec.kind == "diagonal":
        lam = np.sort(np.asarray(spec.eigenvalues, dtype=float))
        space = MeasureSpace.counting(lam.size)
        return SpectralOperator(space, lam, np.eye(lam.size))
    if spec.kind == "ou":
        lam = np.arange(spec.size, dtype=float)
        space = MeasureSpace.counting(spec.size)
        return SpectralOperator(space, lam, np.eye(spec.size))
    # graph Laplacian, L/h^2 on the unit-weight counting space
    npts = spec.size**2 if spec.kind == "grid2d" else spec.size
    mat = np.zeros((npts, npts))
    for i, j in _edges(spec):
        mat[i, i] += 1.0
        mat[j, j] += 1.0
        mat[i, j] -= 1.0
        mat[j, i] -= 1.0
    mat /= spec.h**2
    return eigendecompose(mat, MeasureSpace.counting(npts))


def dirichlet_energy(spec: GeneratorSpec, f) -> float:
    """Edge-sum Dirichlet form sum_edges (f_i - f_j)^2 / h^2 for graph kinds."""
    if spec.kind not in GRAPH_KINDS:
        raise ValueError(f"dirichlet_energy requires a graph kind, got {spec.kind!r}")
    f = np.asarray(f, dtype=float)
    e = np.asarray(_edges(spec))
    d = f[e[:, 0]] - f[e[:, 1]]
    return float(np.sum(d * d) / spec.h**2)
