import math
import random
from fractions import Fraction as F

import mpmath
from hypothesis import given, settings, strategies as st

from diogame.certify import (
    AlgebraicNumber,
    badness_profile,
    distance_range,
    membership_verdict,
    nearest_distance,
    parse_coordinate,
)
from diogame.core import validate_weight
from diogame.exact import sign_of
from diogame.suites import ORACLE_HI, ORACLE_LO, ORACLE_Q_STAR

HALF = validate_weight([F(1, 2), F(1, 2)])
WEIGHTS = [HALF, validate_weight([F(2, 3), F(1, 3)]), validate_weight([1, 0])]
reals = st.fractions(min_value=-5, max_value=5, max_denominator=64)


@settings(max_examples=150)
@given(reals, st.fractions(min_value=0, max_value=3, max_denominator=64))
def test_distance_range_matches_sampling(a, width):
    b = a + width
    lo, hi = distance_range(a, b)
    samples = [a + width * F(i, 128) for i in range(129)]
    vals = [nearest_distance(t) for t in samples]
    assert lo <= min(vals) and max(vals) <= hi
    # the extremes are attained at endpoints, integers or half-integers
    special = [t for t in (math.floor(a) + F(k, 2) for k in range(-2, 4 * (math.ceil(width) + 3))) if a <= t <= b]
    attained = {nearest_distance(t) for t in [a, b] + special}
    assert lo in attained and hi in attained


def test_rational_examples():
    prof = badness_profile([F(1, 3), F(2, 3)], HALF, 3)
    assert prof.exact and prof.eps_at(3) == 0 and prof.eps_at(2) > 0
    prof = badness_profile([0, 0], HALF, 10)
    assert prof.eps_at(1) == 0 and prof.argmin[0] == 1
    assert str(membership_verdict(prof, 0)) == "InBadUpToHorizon"
    assert str(membership_verdict(prof, F(1, 10))) == "ExcludedAt(1)"


def _mp_badness(x, w, Q_):
    best = None
    for q in range(1, Q_ + 1):
        v = max(mpmath.mpf(q) ** (mpmath.mpf(r.numerator) / r.denominator) * abs(q * xi - mpmath.nint(q * xi)) for xi, r in zip(x, w.r))
        best = v if best is None else min(best, v)
    return best


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(0, 59), st.integers(0, 59), st.sampled_from(WEIGHTS), st.integers(1, 40))
def test_exact_profile_matches_high_precision(q, p1, p2, w, Q_):
    x = [F(p1 % q, q), F(p2 % q, q)]
    prof = badness_profile(x, w, Q_)
    with mpmath.workprec(200):
        ref = _mp_badness([mpmath.mpf(t.numerator) / t.denominator for t in x], w, Q_)
        got = prof.eps_at(Q_)
        assert abs(mpmath.mpf(float(got)) - ref) < mpmath.mpf(10) ** -12
    # nonincreasing
    vals = prof.eps
    assert all(sign_of([b, -a]) <= 0 for a, b in zip(vals, vals[1:]))


def test_rational_vanishes_at_its_denominator():
    rng = random.Random(2)
    for _ in range(30):
        q = rng.randint(2, 50)
        x = [F(rng.randrange(q), q), F(rng.randrange(q), q)]
        qx = math.lcm(*(t.denominator for t in x))
        prof = badness_profile(x, HALF, qx)
        zeros = [i for i, v in enumerate(prof.values, start=1) if v == 0]
        assert zeros[0] == qx
        assert str(membership_verdict(prof, F(1, 10**9))) == f"ExcludedAt({qx})"


def test_verdict_monotone_in_eps():
    x = [AlgebraicNumber.sqrt(2, -1), AlgebraicNumber.sqrt(3, -1)]
    prof = badness_profile(x, HALF, 60)
    excluded = False
    for k in range(1, 40):
        v = membership_verdict(prof, F(k, 40))
        if excluded:
            assert v.kind == "ExcludedAt"
        excluded = v.kind == "ExcludedAt"


def test_irrational_enclosures_contain_reference():
    x = [AlgebraicNumber.sqrt(2, -1), AlgebraicNumber.sqrt(3, -1)]
    prof = badness_profile(x, HALF, 50, width_bits=80)
    with mpmath.workprec(300):
        xs = [mpmath.sqrt(2) - 1, mpmath.sqrt(3) - 1]
        for Qp in (1, 7, 23, 50):
            ref = _mp_badness(xs, HALF, Qp)
            lo, hi = prof.eps_at(Qp)
            assert mpmath.mpf(lo.numerator) / lo.denominator <= ref <= mpmath.mpf(hi.numerator) / hi.denominator
            assert hi - lo <= F(1, 2**80)


def test_oracle_value_reproduced():
    x = [parse_coordinate("sqrt(2)-1"), parse_coordinate("sqrt(3)-1")]
    prof = badness_profile(x, HALF, 100)
    lo, hi = prof.eps_at(100)
    assert lo <= ORACLE_HI and ORACLE_LO <= hi and hi - lo <= F(1, 2**100)
    assert prof.argmin[-1] == ORACLE_Q_STAR


def test_parse_coordinate_and_refinement():
    a = parse_coordinate("sqrt(3)+1/2")
    lo, hi = a.enclosure(100)
    assert lo <= hi and hi - lo <= F(1, 2**100)
    assert (lo - F(1, 2)) ** 2 <= 3 <= (hi - F(1, 2)) ** 2
    assert parse_coordinate("3/7") == F(3, 7)
    assert AlgebraicNumber.from_json(a.to_json()).enclosure(10)[0] <= hi
