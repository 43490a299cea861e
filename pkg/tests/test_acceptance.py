"""Full-size acceptance runs. Each test prints one PASS/FAIL line with its counts and wall time."""

import time
from fractions import Fraction as F

import pytest

from diogame import suites
from diogame.suites import WEIGHTS_2D, WEIGHTS_3D, haw_grid

pytestmark = pytest.mark.acceptance


def _check(capsys, label, results, limit):
    """Print the verdict line, then assert on it."""
    seconds = sum(r.seconds for r in results)
    checked = sum(r.checked for r in results)
    bad = sum(len(r.violations) for r in results)
    ok = all(r.passed for r in results) and seconds <= limit
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {label}: {checked} checked, {bad} violations, {seconds:.1f}s (limit {limit}s)")
    for r in results:
        assert r.passed, (r.name, r.violations[:3], r.notes)
    assert seconds <= limit


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    res = fn(*args, **kwargs)
    res.seconds = time.perf_counter() - t0
    return res


def test_a1_minkowski_exhaustive(capsys):
    res = [
        _timed(suites.minkowski_exhaustive, 2, 50, WEIGHTS_2D),
        _timed(suites.minkowski_exhaustive, 3, 20, WEIGHTS_3D),
    ]
    _check(capsys, "1 minkowski d=2 q<=50, d=3 q<=20", res, 120)


def test_a2_line_existence(capsys):
    res = _timed(suites.line_existence, 10**4, 10**4, 100, 400, WEIGHTS_2D)
    assert res.notes.get("big_integer_points", 100) >= 100
    _check(capsys, "2 line existence", [res], 300)


def test_a3_decomposition_sampling(capsys):
    res = _timed(suites.decomposition_sampling, 1000)
    assert all(v >= 1000 for v in res.notes["samples_per_regime"].values())
    _check(capsys, "3 decomposition", [res], 300)


def test_a4_k1_pairs(capsys):
    res = _timed(suites.k1_pairs, 20)
    assert res.checked >= 20
    _check(capsys, "4 k=1 pairs", [res], 600)


def test_a5_coverage_custom_constants(capsys):
    res = _timed(suites.coverage, 70, R=F(3), c=F(1, 10))
    assert res.notes["balls_with_critical_points"] >= 50
    _check(capsys, "5 coverage R=3 c=1/10", [res], 120)


def test_a6_haw_reduction(capsys):
    pairs = haw_grid(F(1, 10))
    assert len(pairs) >= 25
    res = _timed(suites.haw_reduction, pairs, 200)
    assert res.notes["matches"] == 2 * len(pairs)
    _check(capsys, f"6 HAW reduction {len(pairs)} pairs x 200 rounds", [res], 300)


def test_a7_hpw_run(capsys):
    res = _timed(suites.hpw_run, 150)
    assert res.checked == 150
    _check(capsys, "7 HPW M=150 r=(2/3,1/3)", [res], 600)


def test_a8_certify_oracle(capsys):
    res = _timed(suites.certify_oracle)
    _check(capsys, "8 certify oracle", [res], 60)


def test_a9_dynamics(capsys):
    res = _timed(suites.dynamics_sanity, 20)
    _check(capsys, "9 dynamics e^t in 2..2^20", [res], 60)
