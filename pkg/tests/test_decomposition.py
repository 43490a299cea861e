import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from diogame.core import Ball, RationalPoint, canonical_point, delta_box, validate_weight
from diogame.decomposition import (
    ClassIndex,
    ball_class,
    barrier_hyperplane,
    class_points_meeting,
    critical_points,
    derive_constants,
    dominators,
    is_less,
    is_maximal,
    maximal_cover,
    point_class,
    psi,
    psi_bound_holds,
    q_range,
    sample_class_point,
    slab_covers,
)
from diogame.errors import BadParameters, EmptyCritical
from diogame.exact import Power, sign_of
from diogame.lattice import attach_dual

from oracles import brute_class, brute_critical, brute_maximal, brute_meeting

HALF = validate_weight([F(1, 2), F(1, 2)])
WEIGHTS = [validate_weight(w) for w in ([F(1, 2), F(1, 2)], [F(2, 3), F(1, 3)], [F(1), F(0)])]
PAPER = derive_constants(2)
TOY = derive_constants(2, mode="custom", R=3, c=F(1, 10))


def test_paper_constants():
    assert PAPER.R == 9
    assert PAPER.c == F(1, 32 * 9**72)
    assert PAPER.H(73) == F(9, 16) and PAPER.H(74) == F(81, 16)
    assert all(PAPER.H(n) == F(9) ** (n - 72) / 16 for n in range(1, 200, 17))
    assert PAPER.R > 2 / PAPER.beta**2
    assert PAPER.violations == ()


def test_smallest_R_is_minimal():
    # (R^gamma - 1)^-1 <= (beta^2/2)^gamma fails at R - 1
    for beta, gamma in [(F(1, 2), 1), (F(1, 3), 1), (F(1, 2), 2), (F(2, 3), F(1, 2))]:
        R = derive_constants(2, beta=beta, gamma=gamma).R
        b = Power(beta**2 / 2, gamma)
        ok = lambda r: sign_of([F(-1), -b, b * Power(r, gamma)]) >= 0
        assert ok(R) and not ok(R - 1)


def test_custom_constants_report():
    assert any(v.startswith("c-formula") for v in TOY.violations)
    with pytest.raises(BadParameters):
        derive_constants(2, mode="custom", R=F(3, 2), c=F(1, 10))


def test_ball_class_examples():
    assert ball_class(Ball((0, 0), F(1, 10)), PAPER) == 1
    assert ball_class(Ball((0, 0), 1), PAPER) is None
    assert ball_class(Ball((0, 0), F(1, 9**5)), PAPER) == 5
    assert ball_class(Ball((0, 0), F(1, 18)), PAPER) is None


@pytest.mark.parametrize("coords,H", [((F(1, 2), F(1, 2)), 2), ((F(1, 3), F(1, 3)), 3)])
def test_point_class_examples(coords, H):
    P = canonical_point(coords)
    cert = attach_dual(P, HALF)
    assert cert.H == H
    assert point_class(P, cert, PAPER, HALF) == ClassIndex(73, 1)


def test_psi_examples():
    P = canonical_point([F(1, 2), F(1, 2)])
    assert sign_of([psi(P, attach_dual(P, HALF), HALF), -Power(2, F(-1, 2))]) == 0
    O = canonical_point([0, 0])
    assert psi(O, attach_dual(O, HALF), HALF) == 1


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 40).flatmap(lambda q: st.tuples(st.just(q), st.integers(0, q - 1), st.integers(0, q - 1))),
       st.sampled_from(WEIGHTS))
def test_point_class_matches_scan(qp, w):
    q, *p = qp
    if math.gcd(q, *p) != 1:
        return
    P = RationalPoint(q, tuple(p))
    want = brute_class(P, TOY, w)
    if want is None:
        return
    assert point_class(P, attach_dual(P, w), TOY, w) == ClassIndex(*want)


def test_paper_k_below_n_on_samples():
    rng = random.Random(11)
    for n, k in [(80, 1), (200, 1), (300, 2), (340, 3)]:
        for w in WEIGHTS[:2]:
            P, cert = sample_class_point(n, k, PAPER, w, rng)
            cls = point_class(P, cert, PAPER, w)
            assert cls == ClassIndex(n, k) and cls.k < cls.n
            if k >= 2:
                assert psi_bound_holds(psi(P, cert, w), PAPER, k)


# -- order and maximality ---------------------------------------------------


def test_is_less_examples():
    gc = derive_constants(2, mode="custom", R=3, c=F(1, 5))
    P, O = canonical_point([F(1, 100), 0]), canonical_point([0, 0])
    assert is_less(P, O, gc, HALF)
    assert not is_less(P, P, gc, HALF)
    assert not is_less(O, P, gc, HALF)
    assert is_maximal(O, gc, HALF)
    assert not is_maximal(P, gc, HALF)
    assert O in dominators(P, gc, HALF)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 30).flatmap(lambda q: st.tuples(st.just(q), st.integers(0, q - 1), st.integers(0, q - 1))),
       st.sampled_from(WEIGHTS), st.sampled_from([F(1, 10), F(1, 5), F(1, 3)]))
def test_is_maximal_matches_brute_force(qp, w, c):
    q, *p = qp
    if math.gcd(q, *p) != 1:
        return
    gc = derive_constants(2, mode="custom", R=3, c=c)
    P = RationalPoint(q, tuple(p))
    assert is_maximal(P, gc, w) == brute_maximal(P, gc, w)
    top = maximal_cover(P, gc, w)
    assert brute_maximal(top, gc, w)
    assert top == P or is_less(P, top, gc, w)


# -- critical sets ----------------------------------------------------------


def test_critical_points_empty_range():
    w = HALF
    lo, hi = q_range(2, 2, TOY, w)
    assert lo > hi
    assert critical_points(Ball((0, 0), F(1, 3)), 1, 2, TOY, w) == []


@pytest.mark.parametrize("w", WEIGHTS)
def test_critical_points_small_instance(w):
    B = Ball((0, 0), F(1, 3))
    got = critical_points(B, 1, 1, TOY, w)
    want = brute_critical(B, 1, 1, 1, math.ceil(TOY.H(3)), TOY, w)
    assert got == want and got
    for P in got:
        assert point_class(P, attach_dual(P, w), TOY, w) == ClassIndex(2, 1)


@pytest.mark.parametrize("seed", range(4))
def test_critical_points_random_balls(seed):
    rng = random.Random(seed)
    w = WEIGHTS[seed % 3]
    n = rng.randint(2, 3)
    B = Ball((F(rng.randint(0, 100), 100), F(rng.randint(0, 100), 100)), TOY.band_radius(n) * F(3, 4))
    assert ball_class(B, TOY) == n
    got = critical_points(B, n, 1, TOY, w)
    assert got == brute_critical(B, n, 1, 1, math.ceil(TOY.H(n + 2)), TOY, w)


@pytest.mark.parametrize("w", WEIGHTS)
def test_class_points_meeting_matches_brute_force(w):
    rng = random.Random(5)
    for _ in range(3):
        n = rng.randint(1, 3)
        B = Ball((F(rng.randint(0, 1000), 1000), F(rng.randint(0, 1000), 1000)), TOY.band_radius(n))
        got = [P for P, _ in class_points_meeting(B, n + 1, 1, TOY, w)]
        want = sorted(P for P in brute_meeting(B, 1, math.ceil(TOY.H(n + 2)), TOY, w) if brute_class(P, TOY, w) == (n + 1, 1))
        assert got == want


def test_barrier_tie_break():
    with pytest.raises(EmptyCritical):
        barrier_hyperplane([], 1, 1, TOY, HALF)
    P = canonical_point([F(1, 2), F(1, 2)])
    bar = barrier_hyperplane([P], 1, 1, TOY, HALF)
    assert bar.point == P and bar.cert == attach_dual(P, HALF)
    assert bar.halfwidth == TOY.rho0 / TOY.R**2
    A, B = canonical_point([F(2, 5), F(1, 5)]), canonical_point([F(1, 5), F(3, 5)])
    assert barrier_hyperplane([A, B], 1, 1, TOY, HALF).point == B
    assert barrier_hyperplane([B, A], 1, 1, TOY, HALF).point == B


# -- slab coverage decision --------------------------------------------------


def _grid_in(box, B, steps=24):
    lo = [c - h.enclosure(64)[0] if isinstance(h, Power) else c - h for c, h in zip(box.center, box.halfwidth)]
    hi = [c + h.enclosure(64)[0] if isinstance(h, Power) else c + h for c, h in zip(box.center, box.halfwidth)]
    for i in range(1, steps):
        for j in range(1, steps):
            x = (lo[0] + (hi[0] - lo[0]) * F(i, steps), lo[1] + (hi[1] - lo[1]) * F(j, steps))
            if box.contains(x) and B.contains(x):
                yield x


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 11), st.integers(0, 11), st.sampled_from(WEIGHTS),
       st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(any), st.integers(-4, 4),
       st.fractions(min_value=0, max_value=F(1, 4), max_denominator=50),
       st.fractions(min_value=F(1, 50), max_value=F(1, 2), max_denominator=50))
def test_slab_covers_is_sound(q, p1, p2, w, a, C, delta, rho):
    if math.gcd(q, p1 % q, p2 % q) != 1:
        return
    P = RationalPoint(q, (p1 % q, p2 % q))
    B = Ball((F(p1 % q, q) + F(1, 37), F(p2 % q, q)), rho)
    cov = slab_covers(P, B, a, C, delta, TOY, w, samples=50)
    norm2 = a[0] ** 2 + a[1] ** 2
    outside = lambda x: (a[0] * x[0] + a[1] * x[1] + C) ** 2 > delta**2 * norm2
    box = delta_box(P, TOY.c, w)
    if cov.verdict == "violated":
        x = cov.witness
        assert box.contains(x) and B.contains(x) and outside(x)
    elif cov.verdict == "covered":
        assert not any(outside(x) for x in _grid_in(box, B))
