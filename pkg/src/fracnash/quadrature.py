"""Composite Gauss-Legendre panels shared by the quadrature-heavy modules."""

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (x, w)
    return _GL_CACHE[order]


def panel_nodes(a: float, b: float, panels: int, order: int = 16):
    """Nodes and weights of `panels` equal Gauss-Legendre panels on [a, b]."""
    if not b > a:
        raise ValueError(f"empty interval [{a}, {b}]")
    x, w = _gl_rule(order)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_panels(f, a: float, b: float, panels: int, order: int = 16) -> float:
    nodes, weights = panel_nodes(a, b, panels, order)
    return float(np.dot(weights, f(nodes)))
