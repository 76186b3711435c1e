"""Decay profiles m(t) and the rate functions B they induce.

The central transform is B(x) = sup_{t>0} (t log x + t M(1/t)) with
M = -log m, which converts an ultracontractivity profile into a Nash
rate.  The module also carries condition (D), the profile preorder
m1 <= C1 m2(C2 .), the inverse direction (rate -> decay bound), and the
smoothing construction for regularly varying functions.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quadrature import panel_nodes
from .spectral import ScalarFunction, SpectralOperator

__all__ = [
    "DecayProfile",
    "RateFunction",
    "UltracontractivityBound",
    "NonIntegrableRateError",
    "power_profile",
    "stretched_profile",
    "measured_profile",
    "rate_power",
    "rate_stretched",
    "rate_log",
    "theta_from_profile",
    "rate_from_profile",
    "rate_function_from_profile",
    "check_condition_D",
    "profile_equivalence",
    "dominates",
    "ultracontractivity_from_nash",
    "smooth_regular_variation",
]


class NonIntegrableRateError(ValueError):
    """Raised when int^inf dx/(x B(x)) diverges: B too weak for ultracontractivity."""


@dataclass(frozen=True)
class DecayProfile:
    """A decreasing decay profile m with derivative rule and grid hints.

    `logm`/`dlogm` are optional log-scale rules; profiles that overflow in
    linear scale (stretched-exponential near t=0) must supply them so the
    rate transform can work on M = -log m directly.
    """

    m: Callable[[float], float]
    dm: Callable[[float], float]
    t_grid: np.ndarray = field(default_factory=lambda: np.geomspace(1e-3, 1e3, 61))
    name: str = ""
    logm: Optional[Callable[[float], float]] = None
    dlogm: Optional[Callable[[float], float]] = None
    logm_vec: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "t_grid", np.asarray(self.t_grid, dtype=float))

    def big_m(self, t: float) -> float:
        """M(t) = -log m(t)."""
        if self.logm is not None:
            return -self.logm(t)
        return -math.log(self.m(t))

    def big_m_vec(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized M over an array of times."""
        if self.logm_vec is not None:
            return -self.logm_vec(ts)
        return np.asarray([self.big_m(t) for t in ts])

    def dbig_m(self, t: float) -> float:
        """M'(t) = -m'(t)/m(t)."""
        if self.dlogm is not None:
            return -self.dlogm(t)
        return -self.dm(t) / self.m(t)

    def validate(self, rel_tol: float = 1e-5) -> None:
        """Check the profile invariants on the hint grid."""
        vals = np.asarray([self.m(t) for t in self.t_grid])
        if np.any(vals <= 0):
            raise ValueError("profile must be strictly positive")
        if np.any(np.diff(vals) >= 0):
            raise ValueError("profile must be strictly decreasing on its grid")
        # derivative consistency by central differences
        for t in self.t_grid[1:-1:5]:
            h = 1e-6 * t
            fd = (self.m(t + h) - self.m(t - h)) / (2 * h)
            dm = self.dm(t)
            scale = max(abs(dm), abs(fd), 1e-300)
            if abs(fd - dm) > rel_tol * scale:
                raise ValueError(f"derivative rule inconsistent at t={t}: fd={fd}, dm={dm}")


@dataclass(frozen=True)
class RateFunction:
    """Non-decreasing rate B on [0, inf); `superlogarithmic` claims B(x)/log x -> inf.

    `fn_logx`, when given, evaluates B(e^y) directly: the decay integral
    for slowly growing rates reaches arguments far beyond float range.
    """

    fn: Callable[[float], float]
    superlogarithmic: bool = False
    name: str = ""
    fn_logx: Optional[Callable[[float], float]] = None
    fn_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def eval_batch(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.fn_batch is not None:
            return np.asarray(self.fn_batch(xs), dtype=float)
        return np.asarray([self.fn(x) for x in xs], dtype=float)

    def __call__(self, x):
        return self.fn(x)

    def check_monotone(self, grid, tol: float = 1e-12) -> None:
        vals = np.asarray([self.fn(x) for x in np.sort(np.asarray(grid, dtype=float))])
        if np.any(np.diff(vals) < -tol):
            raise ValueError("rate function must be non-decreasing")

    def check_superlogarithmic(self, x_probe=(1e2, 1e4, 1e8, 1e12)) -> bool:
        ratios = [self.fn(x) / math.log(x) for x in x_probe]
        return all(b > a for a, b in zip(ratios, ratios[1:]))


# ---------------------------------------------------------------------------
# named closed-form families


def power_profile(n: float) -> DecayProfile:
    """m(t) = t^{-n/2}, the classical heat-kernel decay in dimension n."""
    half = n / 2.0
    return DecayProfile(
        m=lambda t: t**-half,
        dm=lambda t: -half * t ** (-half - 1.0),
        name=f"power(n={n})",
        logm=lambda t: -half * math.log(t),
        dlogm=lambda t: -half / t,
        logm_vec=lambda ts: -half * np.log(ts),
    )


def stretched_profile(gamma: float) -> DecayProfile:
    """m(t) = exp(t^{-gamma}), the stretched-exponential blow-up family."""
    return DecayProfile(
        m=lambda t: math.exp(t**-gamma),
        dm=lambda t: -gamma * t ** (-gamma - 1.0) * math.exp(t**-gamma),
        t_grid=np.geomspace(0.2, 1e3, 61),
        name=f"stretched(gamma={gamma})",
        logm=lambda t: t**-gamma,
        dlogm=lambda t: -gamma * t ** (-gamma - 1.0),
        logm_vec=lambda ts: ts**-gamma,
    )


def rate_power(n: float) -> RateFunction:
    """B(x) = (n/2e) x^{2/n}, the (be)-transform of t^{-n/2}."""
    c = n / (2.0 * math.e)
    return RateFunction(lambda x: c * x ** (2.0 / n), superlogarithmic=True,
                        name=f"power(n={n})", fn_logx=lambda y: c * math.exp(2.0 * y / n))


def rate_stretched(gamma: float) -> RateFunction:
    """B(x) = gamma (1+gamma)^{-(1+1/gamma)} (log_+ x)^{1+1/gamma}."""
    c = gamma * (1.0 + gamma) ** (-(1.0 + 1.0 / gamma))
    p = 1.0 + 1.0 / gamma
    return RateFunction(
        lambda x: c * max(math.log(x), 0.0) ** p if x > 0 else 0.0,
        superlogarithmic=True,
        name=f"stretched(gamma={gamma})",
        fn_logx=lambda y: c * max(y, 0.0) ** p,
    )


def rate_log() -> RateFunction:
    """B(x) = log_+ x, the non-ultracontractive (Ornstein-Uhlenbeck) rate."""
    return RateFunction(lambda x: max(math.log(x), 0.0) if x > 0 else 0.0,
                        superlogarithmic=False, name="log",
                        fn_logx=lambda y: max(y, 0.0))


def measured_profile(op: SpectralOperator, t_grid=None) -> DecayProfile:
    """Exact decay profile m(t) = ||e^{-tA}||_{1->inf} of a finite operator.

    The kernel max is evaluated spectrally; the derivative follows the
    entry attaining the max.  This is the profile whose (be)-transform
    gives a Nash rate valid for every f (log ||T_t f||_2^2 is convex in t).
    """
    u = op.eigenvectors
    w = op.space.weights
    lam = op.eigenvalues
    # kernel entries K(i,j) = sum_k e^{-t lam_k} u_ik u_jk; rows flattened
    pairs = np.einsum("ik,jk->ijk", u, u).reshape(-1, lam.size)

    def kernel_max(t: float) -> tuple[float, int]:
        vals = pairs @ np.exp(-t * lam)
        idx = int(np.argmax(np.abs(vals)))
        return float(np.abs(vals[idx])), idx

    def m(t: float) -> float:
        return kernel_max(t)[0]

    def dm(t: float) -> float:
        vals = pairs @ np.exp(-t * lam)
        idx = int(np.argmax(np.abs(vals)))
        deriv = float(pairs[idx] @ (-lam * np.exp(-t * lam)))
        return deriv if vals[idx] >= 0 else -deriv

    def logm_vec(ts: np.ndarray) -> np.ndarray:
        # shift by the smallest eigenvalue: the kernel max underflows for
        # t*lam_min beyond float range but its log stays linear
        ts = np.asarray(ts, dtype=float)
        lam0 = float(lam[0])
        kernels = pairs @ np.exp(-np.outer(lam - lam0, ts))
        return -lam0 * ts + np.log(np.max(np.abs(kernels), axis=0))

    if t_grid is None:
        lmax = float(lam[-1]) if lam[-1] > 0 else 1.0
        t_grid = np.geomspace(1e-3 / lmax, 50.0 / max(lmax, 1e-10), 41)
    return DecayProfile(m=m, dm=dm, t_grid=t_grid, name="measured", logm_vec=logm_vec)


# ---------------------------------------------------------------------------
# the (be) transform


_BE_TGRID = np.geomspace(1e-8, 1e8, 400)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
# x-independent grid part t * M(1/t), keyed by profile (kept alive by the dict)
_BE_CACHE: dict[int, tuple[DecayProfile, np.ndarray]] = {}


def _be_grid_part(profile: DecayProfile) -> np.ndarray:
    entry = _BE_CACHE.get(id(profile))
    if entry is None or entry[0] is not profile:
        part = _BE_TGRID * profile.big_m_vec(1.0 / _BE_TGRID)
        _BE_CACHE[id(profile)] = (profile, part)
        return part
    return entry[1]


def _be_sup_batch(profile: DecayProfile, xs: np.ndarray) -> np.ndarray:
    """sup_{t>0} (t log x + t M(1/t)) for a batch of x, grid plus golden refinement."""
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 0):
        raise ValueError("rate argument must be > 0")
    lx = np.log(xs)
    vals = np.outer(_BE_TGRID, lx) + _be_grid_part(profile)[:, None]
    idx = np.argmax(vals, axis=0)
    last = _BE_TGRID.size - 1
    bad = (idx == last) & (vals[last] > vals[last - 1])
    if np.any(bad):
        raise ValueError(
            f"profile incompatible with (be): objective unbounded above at x={xs[bad][0]!r}"
        )
    grid_best = vals[idx, np.arange(xs.size)]
    log_t = np.log(_BE_TGRID)

    def objective(ts: np.ndarray) -> np.ndarray:
        return ts * lx + ts * profile.big_m_vec(1.0 / ts)

    # vectorized golden-section on log t; the bracket shrinks ~0.62^k, so 16
    # steps leave a locally-quadratic value error ~1e-9, far below the
    # 1e-6 relative target
    a = log_t[np.maximum(idx - 1, 0)]
    b = log_t[np.minimum(idx + 1, last)]
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = objective(np.exp(c))
    fd = objective(np.exp(d))
    for _ in range(16):
        take = fc > fd  # keep [a, d] where True, [c, b] where False
        b = np.where(take, d, b)
        a = np.where(take, a, c)
        width = b - a
        c_next = np.where(take, b - _INV_PHI * width, d)
        d_next = np.where(take, c, a + _INV_PHI * width)
        probe = np.where(take, c_next, d_next)
        f_probe = objective(np.exp(probe))
        fc, fd = np.where(take, f_probe, fd), np.where(take, fc, f_probe)
        c, d = c_next, d_next
    best = np.maximum(grid_best, np.maximum(fc, fd))
    return np.maximum(best, 0.0)


def _be_sup(profile: DecayProfile, x: float) -> float:
    return float(_be_sup_batch(profile, np.asarray([x]))[0])


def rate_from_profile(profile: DecayProfile, x: float) -> float:
    """B(x) = sup_{t>0}(t log x + t M(1/t)) for x > 1."""
    if x <= 1.0:
        raise ValueError("rate_from_profile requires x > 1")
    return _be_sup(profile, x)


def rate_function_from_profile(profile: DecayProfile, name: str = "") -> RateFunction:
    """The (be)-transform packaged as a RateFunction, defined for all x > 0."""
    return RateFunction(
        lambda x: _be_sup(profile, x) if x > 0 else 0.0,
        superlogarithmic=False,
        name=name or f"be[{profile.name}]",
        fn_batch=lambda xs: _be_sup_batch(profile, xs),
    )


def theta_from_profile(profile: DecayProfile, x: float) -> float:
    """Theta(x) = -m'(m^{-1}(x)); m^{-1} by bisection to 1e-10 relative."""
    lo, hi = float(profile.t_grid[0]), float(profile.t_grid[-1])
    # expand the bracket until m(lo) >= x >= m(hi)
    for _ in range(200):
        if profile.m(lo) >= x:
            break
        lo /= 2.0
        if lo < 1e-300:
            raise ValueError(f"x={x} outside the range of m (m(0+) too small)")
    else:
        raise ValueError(f"x={x} outside the range of m")
    for _ in range(200):
        if profile.m(hi) <= x:
            break
        hi *= 2.0
        if hi > 1e300:
            raise ValueError(f"x={x} outside the range of m (m never decays to x)")
    else:
        raise ValueError(f"x={x} outside the range of m")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if profile.m(mid) >= x:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * max(abs(lo), abs(hi)):
            break
    t_inv = 0.5 * (lo + hi)
    return -profile.dm(t_inv)


def check_condition_D(profile: DecayProfile, t_grid=None, n_u: int = 64) -> float:
    """Best constant c = inf_{t, u in [t,2t]} M'(u)/M'(t) on the sampled grid."""
    if t_grid is None:
        t_grid = profile.t_grid
    t_grid = np.asarray(t_grid, dtype=float)
    best = math.inf
    for t in t_grid:
        dmt = profile.dbig_m(t)
        if dmt <= 0:
            raise ValueError(f"M'({t}) <= 0: profile is not decreasing there")
        u_samples = np.geomspace(t, 2.0 * t, n_u)
        ratios = np.asarray([profile.dbig_m(u) for u in u_samples]) / dmt
        if np.any(ratios <= 0):
            raise ValueError("M' changes sign inside a doubling window")
        best = min(best, float(np.min(ratios)))
    return best


def _logm(profile: DecayProfile, t: float) -> float:
    if profile.logm is not None:
        return profile.logm(t)
    return math.log(profile.m(t))


def dominates(p1: DecayProfile, p2: DecayProfile, c1: float, c2: float,
              grid, tol: float = 1e-12) -> bool:
    """Does m1(t) <= C1 m2(C2 t) hold on the grid (checked in log scale)?"""
    lc1 = math.log(c1)
    for t in np.asarray(grid, dtype=float):
        if _logm(p1, t) > lc1 + _logm(p2, c2 * t) + tol:
            return False
    return True


def profile_equivalence(p1: DecayProfile, p2: DecayProfile, grid=None,
                        c2_grid=None, cap: float = 1e6) -> Optional[tuple[float, float]]:
    """Search for a certificate m1(t) <= C1 m2(C2 t) on the grid.

    For each candidate C2 the minimal valid C1 is the grid max of
    m1(t)/m2(C2 t).  The returned pair minimizes the certificate size
    max(C1,1)*max(C2,1/C2), ties broken toward C2 = 1, so identical
    profiles report exactly (1, 1).  Returns None when every candidate
    exceeds the cap.
    """
    if grid is None:
        grid = p1.t_grid
    grid = np.asarray(grid, dtype=float)
    if c2_grid is None:
        c2_grid = np.geomspace(1e-3, 1e3, 61)
    lm1 = np.asarray([_logm(p1, t) for t in grid])
    candidates = []
    for c2 in np.asarray(c2_grid, dtype=float):
        lm2 = np.asarray([_logm(p2, c2 * t) for t in grid])
        c1 = float(np.exp(np.max(lm1 - lm2)))
        if math.isfinite(c1) and c1 <= cap:
            size = max(c1, 1.0) * max(c2, 1.0 / c2)
            candidates.append((size, abs(math.log(c2)), c1, c2))
    if not candidates:
        return None
    min_size = min(c[0] for c in candidates)
    near = [c for c in candidates if c[0] <= min_size * (1.0 + 1e-9)]
    _, _, c1, c2 = min(near, key=lambda c: c[1])
    return c1, c2


# ---------------------------------------------------------------------------
# Nash rate -> ultracontractivity bound


@dataclass(frozen=True)
class UltracontractivityBound:
    """Solution record for the decay integral equation at one time.

    U(t) solves int_U^{X_max} dx/(x B(x)) = 2t and bounds ||T_t||_{1->2}^2;
    `one_to_inf` is the symmetry-doubled bound U(t/2) for ||T_t||_{1->inf}.
    Logs are primary since slowly-growing rates put U beyond float range.
    """

    t: float
    log_u: float
    log_one_to_inf: float
    log_x_max: float
    tail_estimate: float

    @property
    def u(self) -> float:
        return math.exp(self.log_u) if self.log_u < 709.0 else math.inf

    @property
    def one_to_inf(self) -> float:
        return math.exp(self.log_one_to_inf) if self.log_one_to_inf < 709.0 else math.inf

    def __float__(self):
        return self.u


def _g_of_y(B):
    """Evaluator y -> 1/B(e^y), preferring a log-argument rule when present."""
    fn_logx = getattr(B, "fn_logx", None)
    if fn_logx is not None:
        base = fn_logx
    else:
        b_fn = B.fn if isinstance(B, RateFunction) else B

        def base(y: float) -> float:
            if y > 709.0:
                raise ValueError("rate integration beyond float range; provide fn_logx")
            return b_fn(math.exp(y))

    def g(y: float) -> float:
        b = base(y)
        return 1.0 / b if b > 0 else math.inf

    return g


def _segment_integral(g, a: float, b: float, panels: int = 8) -> float:
    if b <= a:
        return 0.0
    nodes, weights = panel_nodes(a, b, panels, order=16)
    vals = np.asarray([g(v) for v in nodes])
    return float(np.dot(weights, vals))


def _rate_tail(g, y_start: float, tol: float = 1e-12):
    """Integrate g = 1/B(e^y) outward over doubling windows.

    Returns (segments, y_max, tail_estimate); raises NonIntegrableRateError
    when the window contributions fail to decay geometrically.
    """
    segments = []
    y = y_start
    prev = None
    ratio = None
    for _ in range(160):
        y_next = 2.0 * y
        contrib = _segment_integral(g, y, y_next)
        if not math.isfinite(contrib):
            raise ValueError("rate function must be positive on the tail range")
        segments.append((y, y_next, contrib))
        if prev is not None:
            ratio = contrib / prev if prev > 0 else 0.0
            if len(segments) >= 4 and ratio >= 0.98:
                raise NonIntegrableRateError(
                    "B too weak for ultracontractivity: int dx/(x B(x)) does not converge"
                )
        prev = contrib
        if contrib < tol and (ratio is None or ratio < 0.9):
            tail = contrib * (ratio / (1.0 - ratio)) if ratio else contrib
            return segments, y_next, tail
        y = y_next
    raise NonIntegrableRateError(
        "B too weak for ultracontractivity: tail integral decays too slowly"
    )


def ultracontractivity_from_nash(B, t: float, y_start: float = 2.0) -> UltracontractivityBound:
    """Invert the Nash rate into a decay bound by solving the integral equation.

    U(t) solves int_U^{X_max} dx/(x B(x)) = 2t with X_max fixed by a
    certified tail; for the rate of t^{-n/2} this reproduces
    U(t) = (e/(2t))^{n/2}.  The 1->inf bound is the doubled U(t/2).
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    g = _g_of_y(B)
    segments, y_max, tail = _rate_tail(g, y_start)

    def solve(target: float) -> float:
        # walk the segments from y_max down until the cumulative integral
        # brackets the target, then bisect inside the bracketing window
        cum = 0.0
        lo_seg = None
        for a, b, contrib in reversed(segments):
            if cum + contrib >= target:
                lo_seg = (a, b, cum)
                break
            cum += contrib
        if lo_seg is None:
            # extend below y_start with unit windows
            a = y_start
            while True:
                b = a
                a = b - 1.0
                contrib = _segment_integral(g, a, b)
                if not math.isfinite(contrib) or cum + contrib >= target:
                    lo_seg = (a, b, cum)
                    break
                cum += contrib
                if a < -2000.0:
                    raise ValueError("rate equation has no solution above x = e^-2000")
        a, b, cum = lo_seg
        lo, hi = a, b
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            val = cum + _segment_integral(g, mid, b)
            if val >= target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * max(1.0, abs(hi)):
                break
        return 0.5 * (lo + hi)

    y_t = solve(2.0 * t)
    y_half = solve(t)  # 2 * (t/2)
    return UltracontractivityBound(
        t=t, log_u=y_t, log_one_to_inf=y_half, log_x_max=y_max, tail_estimate=tail,
    )


# ---------------------------------------------------------------------------
# smoothing of regularly varying functions


def smooth_regular_variation(alpha: float, ell, x_grid, asym_rtol: float = 0.05) -> ScalarFunction:
    """Increasing convex Phi with Phi(x) ~ x^alpha ell(x), via double integration.

    Phi(x) = int_0^x int_0^tau a(a-1) s^{a-2} ell(s) ds dtau; the inner
    integral is computed in the variable u = s^{a-1} which removes the
    endpoint singularity for 1 < a < 2.  The asymptote check at the top
    grid point uses `asym_rtol`; for log-type ell the convergence is
    logarithmic, so the grid must extend far out for the default 5%.
    """
    if alpha <= 1.0:
        raise ValueError("smoothing requires index alpha > 1 (inner integral diverges)")
    ell_fn = ell.fn if isinstance(ell, ScalarFunction) else ell
    x_grid = np.sort(np.asarray(x_grid, dtype=float))
    if np.any(x_grid <= 0):
        raise ValueError("x_grid must be strictly positive")
    am1 = alpha - 1.0

    def inner(tau: float) -> float:
        if tau <= 0:
            return 0.0
        u_hi = tau**am1
        nodes, weights = panel_nodes(0.0, u_hi, panels=16, order=8)
        vals = np.asarray([ell_fn(u ** (1.0 / am1)) for u in nodes])
        return alpha * float(np.dot(weights, vals))

    def phi(x: float) -> float:
        if x <= 0:
            return 0.0
        nodes, weights = panel_nodes(0.0, x, panels=24, order=8)
        vals = np.asarray([inner(tau) for tau in nodes])
        return float(np.dot(weights, vals))

    result = ScalarFunction(phi, non_decreasing=True, convex=True, name=f"smooth-rv({alpha})")
    result.spot_check(x_grid)
    top = x_grid[-1]
    ratio = phi(top) / (top**alpha * ell_fn(top))
    if not 1.0 - asym_rtol <= ratio <= 1.0 + asym_rtol:
        raise ValueError(f"smoothed function misses the x^alpha ell(x) asymptote: ratio {ratio:.4f}")
    return result
