"""Acceptance suite: every criterion at its pinned tolerance.

Criteria 1-12 run through the shared acceptance module (one pass, cached
module-wide); criterion 13 exercises the CLI selftest twice and compares
output bytes.
"""

import subprocess
import sys

from fracnash.acceptance import run_all

from conftest import ACCEPTANCE_LINES

SEED = 20240811

_RESULTS = {}


def _result(number):
    if not _RESULTS:
        for r in run_all(SEED):
            _RESULTS[r.number] = r
    return _RESULTS[number]


def _check(number):
    r = _result(number)
    print(r.line())
    ACCEPTANCE_LINES.append(r.line())
    assert r.passed, r.line()


def test_criterion_01_route_equivalence():
    _check(1)


def test_criterion_02_stable_density_oracle():
    _check(2)


def test_criterion_03_rate_function_closed_forms():
    _check(3)


def test_criterion_04_halfpower_transfer():
    _check(4)


def test_criterion_05_integral_inequality():
    _check(5)


def test_criterion_06_jensen_exactness():
    _check(6)


def test_criterion_07_ultracontractivity_integration():
    _check(7)


def test_criterion_08_condition_d_constants():
    _check(8)


def test_criterion_09_torus_trichotomy():
    _check(9)


def test_criterion_10_torus_small_time_law():
    _check(10)


def test_criterion_11_ou_suite():
    _check(11)


def test_criterion_12_truncation_machinery():
    _check(12)


def test_criterion_13_selftest_determinism(tmp_path):
    config = tmp_path / "selftest.ini"
    config.write_text(f"[experiment]\ncommand = selftest\nseed = {SEED}\n")
    outputs = []
    for run_dir in ("a", "b"):
        out = tmp_path / run_dir
        proc = subprocess.run(
            [sys.executable, "-m", "fracnash.cli", "--config", str(config), "--out", str(out)],
            capture_output=True, text=True, timeout=900,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        outputs.append((out / "acceptance.csv").read_bytes())
    assert outputs[0] == outputs[1]
    line = "PASS criterion 13 [determinism]: selftest CSVs byte-identical across reruns"
    print(line)
    ACCEPTANCE_LINES.append(line)
