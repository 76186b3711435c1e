"""The acceptance suite: one function per criterion, shared by pytest and selftest.

Every criterion runs at its pinned tolerance and reports a structured
result; nothing here is calibrated after the fact.  Seeds derive from a
single base seed so reruns are bit-reproducible.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import certify, generators, ou, rates, subordinator, torus
from .entropy import truncate, truncation_energy_check, truncation_l1_l2_check
from .spectral import MeasureSpace, ScalarFunction, SpectralOperator, fractional_semigroup

__all__ = ["CriterionResult", "run_all", "CRITERIA"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    rows: list = field(default_factory=list)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.number:2d} [{self.name}]: {self.detail}"


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def criterion_01_route_equivalence(seed: int = 0) -> CriterionResult:
    op = generators.build(generators.GeneratorSpec("cycle", 64))
    rows = []
    worst = 0.0
    worst_half = 0.0
    ok = True
    for alpha in (0.3, 0.5, 0.7, 0.9):
        for t in (0.1, 1.0, 10.0):
            quad_route = subordinator.subordinate_semigroup(op, alpha, t)
            spectral = fractional_semigroup(op, alpha, t)
            dev = float(np.max(np.abs(quad_route - spectral)))
            worst = max(worst, dev)
            ok &= dev <= 1e-6
            rows.append({"alpha": alpha, "t": t, "route_dev": dev})
            if alpha == 0.5:
                poisson = subordinator.poisson_semigroup(op, t)
                dev_half = float(np.max(np.abs(quad_route - poisson)))
                worst_half = max(worst_half, dev_half)
                ok &= dev_half <= 1e-8
                rows[-1]["poisson_dev"] = dev_half
    detail = f"max route dev {_fmt(worst)} (tol 1e-6); alpha=1/2 vs Poisson kernel {_fmt(worst_half)} (tol 1e-8)"
    return CriterionResult(1, "route equivalence", ok, detail, rows)


def criterion_02_stable_oracle(seed: int = 0) -> CriterionResult:
    rows = []
    ok = True
    worst = {0.5: 0.0, 0.3: 0.0, 0.7: 0.0}
    for alpha in (0.5, 0.3, 0.7):
        tol = 1e-8 if alpha == 0.5 else 1e-6
        for t in (0.5, 2.0):
            sub = subordinator.StableSubordinator(alpha, t)
            for lam in (0.1, 1.0, 10.0):
                dev = subordinator.laplace_check(sub, lam)
                worst[alpha] = max(worst[alpha], dev)
                ok &= dev <= tol
                rows.append({"alpha": alpha, "t": t, "lambda": lam, "deviation": dev})
    detail = (f"laplace deviations: alpha=1/2 max {_fmt(worst[0.5])} (tol 1e-8), "
              f"alpha=0.3/0.7 max {_fmt(max(worst[0.3], worst[0.7]))} (tol 1e-6)")
    return CriterionResult(2, "stable-density oracle", ok, detail, rows)


def criterion_03_rate_closed_forms(seed: int = 0) -> CriterionResult:
    rows = []
    worst = 0.0
    xs = (math.e**2, math.e**5, math.e**10)
    for n in (2, 4):
        prof = rates.power_profile(n)
        for x in xs:
            expected = n / (2.0 * math.e) * x ** (2.0 / n)
            got = rates.rate_from_profile(prof, x)
            rel = abs(got - expected) / expected
            worst = max(worst, rel)
            rows.append({"family": f"power(n={n})", "x": x, "B": got, "rel_err": rel})
    for gamma in (1.0, 2.0):
        prof = rates.stretched_profile(gamma)
        for x in xs:
            expected = gamma * (1 + gamma) ** (-(1 + 1 / gamma)) * math.log(x) ** (1 + 1 / gamma)
            got = rates.rate_from_profile(prof, x)
            rel = abs(got - expected) / expected
            worst = max(worst, rel)
            rows.append({"family": f"stretched(gamma={gamma})", "x": x, "B": got, "rel_err": rel})
    ok = worst <= 1e-5
    return CriterionResult(3, "rate closed forms", ok,
                           f"max relative error {_fmt(worst)} (tol 1e-5)", rows)


def _transfer_operators() -> list[SpectralOperator]:
    cases = [
        (np.array([0.8, 1.5, 2.5, 4.0]), np.array([0.2, 0.7, 1.5, 3.0])),
        (np.array([0.5, 0.9, 1.3, 2.0, 3.1, 5.0]), np.array([0.1, 0.25, 0.5, 1.0, 2.0, 4.0])),
        (np.geomspace(0.6, 6.0, 8), np.geomspace(0.15, 5.0, 8)),
    ]
    ops = []
    for lam, w in cases:
        ops.append(SpectralOperator(MeasureSpace(w), lam, np.eye(lam.size) / np.sqrt(w)[:, None]))
    return ops


def criterion_04_halfpower_transfer(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 4)
    rows = []
    ok = True
    worst_slack = math.inf
    for op in _transfer_operators():
        B = rates.rate_function_from_profile(rates.measured_profile(op))
        oracle = rng.standard_normal((100_000, op.n))
        base = certify.nash_ratio(op, B, 1.0, oracle, "1e5 sphere oracle")
        certified = base.ratio_infimum >= 1.0 - 1e-9
        fresh = rng.standard_normal((10_000, op.n))
        slack, eps_rows = certify.halfpower_transfer_check(op, B, fresh, (0.25, 0.5, 0.75))
        worst_slack = min(worst_slack, slack)
        ok &= certified and slack >= -1e-8
        rows.append({"n": op.n, "base_infimum": base.ratio_infimum,
                     "certified": certified, "min_slack": slack})
        rows.extend({"n": op.n, **r} for r in eps_rows)
    detail = f"min transfer slack {_fmt(worst_slack)} (tol -1e-8), base Nash certified on all ops"
    return CriterionResult(4, "half-power transfer", ok, detail, rows)


def criterion_05_integral_inequality(seed: int = 0) -> CriterionResult:
    lam = 2.5
    one = SpectralOperator(MeasureSpace.counting(1), np.array([lam]), np.eye(1))
    lhs, rhs = certify.halfpower_integral_check(
        one, rates.RateFunction(lambda x: lam), np.array([1.0]), T=200.0
    )
    eq_err = abs(lhs - rhs)
    ok = eq_err <= 1e-12
    op = generators.build(generators.GeneratorSpec("cycle", 32))
    B = rates.rate_function_from_profile(rates.measured_profile(op))
    rng = np.random.default_rng(seed + 5)
    rows = [{"case": "one-point", "lhs": lhs, "rhs": rhs, "slack": rhs - lhs}]
    worst = math.inf
    for i in range(50):
        g = rng.standard_normal(32)
        g /= op.space.norm(g, 1)
        lhs, rhs = certify.halfpower_integral_check(op, B, g, T=50.0)
        worst = min(worst, rhs - lhs)
        ok &= lhs <= rhs + 1e-8
        rows.append({"case": f"cycle32[{i}]", "lhs": lhs, "rhs": rhs, "slack": rhs - lhs})
    detail = f"one-point |lhs-rhs| {_fmt(eq_err)} (tol 1e-12); cycle32 min slack {_fmt(worst)} (tol -1e-8)"
    return CriterionResult(5, "integral inequality", ok, detail, rows)


def criterion_06_jensen(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 6)
    diag = generators.build(
        generators.GeneratorSpec("diagonal", eigenvalues=np.sort(rng.uniform(0.0, 5.0, 12)))
    )
    cyc = generators.build(generators.GeneratorSpec("cycle", 12))
    phis = {
        "x^2": ScalarFunction(lambda x: x * x, non_decreasing=True, convex=True),
        "x^3": ScalarFunction(lambda x: x**3, non_decreasing=True, convex=True),
        "e^x": ScalarFunction(math.exp, non_decreasing=True, convex=True),
    }
    lam0 = ScalarFunction(lambda x: 0.0, non_decreasing=True)
    rows = []
    worst = math.inf
    ok = True
    for op_name, op in (("diagonal", diag), ("cycle", cyc)):
        ens = rng.standard_normal((1000, 12))
        for name, phi in phis.items():
            _, raw, _ = certify.jensen_transfer_check(op, lam0, phi, ens)
            worst = min(worst, raw)
            ok &= raw >= -1e-12
            rows.append({"operator": op_name, "phi": name, "min_raw_slack": raw})
    return CriterionResult(6, "Jensen exactness", ok,
                           f"min raw Jensen slack {_fmt(worst)} (tol -1e-12)", rows)


def criterion_07_ultracontractivity(seed: int = 0) -> CriterionResult:
    ts = np.geomspace(0.05, 1.0, 9)
    rows = []
    ok = True
    details = []
    for n in (2, 4):
        log_us = [rates.ultracontractivity_from_nash(rates.rate_power(n), t).log_u for t in ts]
        slope = float(np.polyfit(np.log(1.0 / ts), log_us, 1)[0])
        rel = abs(slope - n / 2.0) / (n / 2.0)
        ok &= rel <= 0.01
        rows.append({"family": f"power(n={n})", "slope": slope, "target": n / 2.0, "rel_err": rel})
        details.append(f"n={n}: {_fmt(slope)}")
    for gamma in (1.0, 2.0):
        log_us = [rates.ultracontractivity_from_nash(rates.rate_stretched(gamma), t).log_u for t in ts]
        slope = float(np.polyfit(np.log(1.0 / ts), np.log(log_us), 1)[0])
        rel = abs(slope - gamma) / gamma
        ok &= rel <= 0.03
        rows.append({"family": f"stretched(gamma={gamma})", "slope": slope,
                     "target": gamma, "rel_err": rel})
        details.append(f"gamma={gamma}: {_fmt(slope)}")
    try:
        rates.ultracontractivity_from_nash(rates.rate_log(), 1.0)
        log_raises = False
    except rates.NonIntegrableRateError:
        log_raises = True
    ok &= log_raises
    rows.append({"family": "log", "slope": math.nan, "target": math.nan,
                 "rel_err": math.nan, "non_integrable_raised": log_raises})
    detail = ("decay exponents " + ", ".join(details)
              + f"; log rate raises: {log_raises}")
    return CriterionResult(7, "ultracontractivity integration", ok, detail, rows)


def criterion_08_condition_d(seed: int = 0) -> CriterionResult:
    grid = np.geomspace(1e-2, 1e2, 1000)
    rows = []
    ok = True
    for n in (2, 4):
        c = rates.check_condition_D(rates.power_profile(n), grid)
        err = abs(c - 0.5)
        ok &= err <= 1e-3
        rows.append({"family": f"power(n={n})", "c": c, "target": 0.5, "abs_err": err})
    for gamma in (1.0, 2.0):
        c = rates.check_condition_D(rates.stretched_profile(gamma), grid)
        target = 2.0 ** (-(gamma + 1.0))
        err = abs(c - target)
        ok &= err <= 1e-3
        rows.append({"family": f"stretched(gamma={gamma})", "c": c, "target": target, "abs_err": err})
    worst = max(r["abs_err"] for r in rows)
    return CriterionResult(8, "condition (D) constants", ok,
                           f"max |c - target| {_fmt(worst)} (tol 1e-3)", rows)


def criterion_09_torus_trichotomy(seed: int = 0) -> CriterionResult:
    spec = torus.TorusSpectrum(1.0, 1024)
    rows = []
    ok = True
    t_sweep = np.geomspace(1e-3, 10.0, 7)
    for t in t_sweep:
        res = torus.subordinated_log_density(spec, 0.3, t, compute_value=False)
        ok &= res.status == "divergent"
        rows.append({"alpha": 0.3, "t": float(t), "status": res.status})
    for t in t_sweep:
        res = torus.subordinated_log_density(spec, 0.75, t, compute_value=False)
        ok &= res.status == "finite"
        rows.append({"alpha": 0.75, "t": float(t), "status": res.status})
    beta_hat, resid = torus.decay_exponent_fit(spec, 0.75, np.geomspace(0.05, 0.5, 7))
    beta_ok = abs(beta_hat - 2.0) / 2.0 <= 0.15
    ok &= beta_ok
    rows.append({"alpha": 0.75, "beta_hat": beta_hat, "beta_target": 2.0, "residual": resid})
    t_hat = torus.threshold_time(spec)
    above = torus.subordinated_log_density(spec, 0.5, t_hat * 1.3)
    below = torus.subordinated_log_density(spec, 0.5, t_hat / 1.3)
    t_hat2 = torus.threshold_time(spec, k_base=2048)
    stable = abs(t_hat2 - t_hat) <= 0.1 * t_hat
    ok &= above.status == "finite" and below.status == "divergent" and stable
    rows.append({"alpha": 0.5, "t_hat": t_hat, "t_hat_2K": t_hat2,
                 "above": above.status, "below": below.status})
    detail = (f"alpha=0.3 divergent, alpha=0.75 finite with beta {_fmt(beta_hat)} (target 2, tol 15%), "
              f"t_hat {_fmt(t_hat)} stable under 2K ({_fmt(abs(t_hat2 - t_hat) / t_hat)} rel)")
    return CriterionResult(9, "torus trichotomy", ok, detail, rows)


def criterion_10_torus_small_time(seed: int = 0) -> CriterionResult:
    rows = []
    ok = True
    for gamma, window in ((1.0, (0.01, 0.1)), (2.0, (0.1, 0.5))):
        slope = torus.small_time_exponent_fit(
            torus.TorusSpectrum(gamma, 64), np.geomspace(*window, 7)
        )
        rel = abs(slope - gamma) / gamma
        ok &= rel <= 0.10
        rows.append({"gamma": gamma, "slope": slope, "rel_err": rel})
    detail = ", ".join(f"gamma={r['gamma']}: slope {_fmt(r['slope'])}" for r in rows) + " (tol 10%)"
    return CriterionResult(10, "torus small-t law", ok, detail, rows)


def criterion_11_ou_suite(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 11)
    model = ou.HermiteModel(16)
    samples = rng.standard_normal((500, 16))
    pars_err = max(
        abs(ou.mixed_norm(model, c, 2) - float(np.linalg.norm(c))) for c in samples[:200]
    )
    lsi_slack = ou.ou_lsi_check(model, samples)
    cert = ou.ou_log_nash_check(model, 1.0, rng.standard_normal((500, 16)))
    t_nelson = math.log(math.sqrt(3.0)) * 1.01
    nelson = ou.hypercontractivity_probe([32], 1.0, t_nelson, seed=seed + 11)[0]
    growth = ou.hypercontractivity_probe([16, 64], 0.5, 0.1, ensemble_size=0, seed=seed + 11)
    growth_ratio = growth[1]["ratio"] / growth[0]["ratio"]
    ok = (
        pars_err <= 1e-9
        and lsi_slack >= -1e-9
        and cert.ratio_infimum >= 0.5
        and nelson["ratio"] <= 1.0 + 1e-6
        and growth_ratio > 1.5
    )
    rows = [
        {"check": "parseval", "value": pars_err, "tol": 1e-9},
        {"check": "lsi_slack", "value": lsi_slack, "tol": -1e-9},
        {"check": "log_nash_infimum", "value": cert.ratio_infimum, "tol": 0.5},
        {"check": "nelson_ratio", "value": nelson["ratio"], "tol": 1.0 + 1e-6},
        {"check": "growth_ratio", "value": growth_ratio, "tol": 1.5},
    ]
    detail = (f"parseval {_fmt(pars_err)}, lsi slack {_fmt(lsi_slack)}, "
              f"log-nash inf {_fmt(cert.ratio_infimum)}, nelson {_fmt(nelson['ratio'])}, "
              f"growth {_fmt(growth_ratio)}")
    return CriterionResult(11, "Ornstein-Uhlenbeck suite", ok, detail, rows)


def criterion_12_truncation(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 12)
    spec = generators.GeneratorSpec("cycle", 32)
    space = MeasureSpace.counting(32)
    recon_err = 0.0
    for _ in range(50):
        f = rng.uniform(0.0, 100.0, size=32)
        total = sum(truncate(f, k) for k in range(-20, 21))
        recon_err = max(recon_err, float(np.max(np.abs(total - f))))
    energy_worst = math.inf
    for _ in range(1000):
        f = rng.uniform(0.0, 10.0, size=32)
        energy_worst = min(energy_worst, truncation_energy_check(spec, f))
    markov_worst = math.inf
    for _ in range(200):
        f = rng.uniform(0.0, 5.0, size=32)
        f /= space.norm(f, 2)
        markov_worst = min(markov_worst, truncation_l1_l2_check(f, space))
    ok = recon_err <= 2.0**-20 + 1e-12 and energy_worst >= -1e-12 and markov_worst >= -1e-12
    rows = [
        {"check": "reconstruction", "value": recon_err, "tol": 2.0**-20},
        {"check": "energy_superadditivity", "value": energy_worst, "tol": -1e-12},
        {"check": "markov_l1_l2", "value": markov_worst, "tol": -1e-12},
    ]
    detail = (f"reconstruction {_fmt(recon_err)} (tol 2^-20), energy slack {_fmt(energy_worst)}, "
              f"markov chain slack {_fmt(markov_worst)}")
    return CriterionResult(12, "truncation machinery", ok, detail, rows)


CRITERIA = [
    criterion_01_route_equivalence,
    criterion_02_stable_oracle,
    criterion_03_rate_closed_forms,
    criterion_04_halfpower_transfer,
    criterion_05_integral_inequality,
    criterion_06_jensen,
    criterion_07_ultracontractivity,
    criterion_08_condition_d,
    criterion_09_torus_trichotomy,
    criterion_10_torus_small_time,
    criterion_11_ou_suite,
    criterion_12_truncation,
]


def run_all(seed: int = 0) -> list[CriterionResult]:
    """Run criteria 1-12 (13, determinism, is a property of the CLI output)."""
    return [fn(seed) for fn in CRITERIA]
