import random
from fractions import Fraction as F

import pytest

from diogame.core import Ball, ball_inside_ball, canonical_point, delta_box, validate_weight
from diogame.decomposition import ball_class, barrier_hyperplane, critical_points, derive_constants
from diogame.errors import NoWinningReduction
from diogame.games import AB, ALICE, BOB, HAW, HPW, GameState, Ruleset, Slab, SlabFamily, referee, run_match
from diogame.strategies import (
    AliceABFromHAW,
    AliceHPWBad,
    BobHunter,
    MockHAWOracle,
    alice_empty,
    bob_hunter,
    bob_random,
    haw_to_ab_params,
    stereographic_unit,
)
from diogame.suites import haw_grid


@pytest.mark.parametrize(
    "alpha,beta,theta,N,beta_prime",
    [
        (F(2, 5), F(1, 2), F(2, 5), 2, F(1, 50)),
        (F(1, 2), F(1, 2), F(1, 4), 2, F(1, 32)),
    ],
)
def test_reduction_params(alpha, beta, theta, N, beta_prime):
    p = haw_to_ab_params(alpha, beta)
    assert (p.theta, p.N, p.beta_prime) == (theta, N, beta_prime)


def test_reduction_needs_positive_theta():
    with pytest.raises(NoWinningReduction):
        haw_to_ab_params(F(4, 5), F(1, 10))


@pytest.mark.parametrize("alpha,beta", haw_grid(F(1, 20)))
def test_radius_slab_budget_on_grid(alpha, beta):
    p = haw_to_ab_params(alpha, beta)
    # radius after N rounds plus the widest slab stays below theta/2 of the anchor radius
    assert (alpha * beta) ** p.N + p.beta_prime < p.theta / 2
    assert p.N == 1 or (alpha * beta) ** (p.N - 1) >= p.theta / 3


def test_stereographic_units_are_exact():
    rng = random.Random(0)
    for _ in range(50):
        t = [F(rng.randint(-50, 50), rng.randint(1, 50)) for _ in range(2)]
        u = stereographic_unit(t)
        assert sum(x * x for x in u) == 1


def _embedded_start(params, B):
    return GameState.start(Ruleset(AB, params.alpha, params.beta), B)


def test_degenerate_start_moves_along_normal():
    p = haw_to_ab_params(F(1, 2), F(1, 2))
    B = Ball((F(1, 2), F(1, 2)), 1)
    normal = (F(3, 5), F(4, 5))
    oracle = lambda ball: Slab(normal, -sum(a * c for a, c in zip(normal, ball.center)), 0)
    move = AliceABFromHAW(p, oracle)(_embedded_start(p, B))
    assert move.radius == p.alpha
    shift = [m - c for m, c in zip(move.center, B.center)]
    assert shift == [(1 - p.alpha) * n for n in normal]


@pytest.mark.parametrize("alpha,beta", [(F(1, 2), F(1, 2)), (F(1, 5), F(4, 5)), (F(2, 5), F(1, 10))])
def test_reduction_distance_claims(alpha, beta):
    p = haw_to_ab_params(alpha, beta)
    for seed in range(3):
        rng = random.Random(seed)
        alice = AliceABFromHAW(p, MockHAWOracle(p.beta_prime, rng, degenerate_every=3))
        T = run_match(Ruleset(AB, alpha, beta), alice, bob_random, 12 * p.N, seed=seed, B0=Ball((0, 0), 1))
        assert T.completed
        assert alice.checks and all(c["dist_ok"] and c["fi_ok"] and c["disjoint"] for c in alice.checks)
        assert all(c["embedded_verdict"] == "Legal" for c in alice.checks)


# -- Bob ---------------------------------------------------------------------


def test_bob_random_ab_radius_and_determinism():
    s = GameState.start(Ruleset(AB, F(1, 2), F(1, 3)), Ball((0, 0), 1))
    referee(s, ALICE, alice_empty(s))
    B = bob_random(s, random.Random(4))
    assert B.radius == F(1, 3) * s.last_alice.radius
    assert ball_inside_ball(B, s.last_alice)
    assert B == bob_random(s, random.Random(4))


def _raster_misses(B, slab, steps=16):
    for i in range(-steps, steps + 1):
        for j in range(-steps, steps + 1):
            x = (B.center[0] + B.radius * F(i, steps), B.center[1] + B.radius * F(j, steps))
            if B.contains(x) and slab.contains(x):
                return False
    return True


def test_bob_random_haw_dodges_slab():
    rng = random.Random(9)
    for trial in range(60):
        s = GameState.start(Ruleset(HAW, beta=F(1, 4)), Ball((0, 0), 1))
        t = [F(rng.randint(-9, 9), rng.randint(1, 9))]
        n = stereographic_unit(t)
        slab = Slab(n, F(rng.randint(-5, 5), 10), F(rng.randint(0, 4), 16))
        referee(s, ALICE, slab)
        B = bob_random(s, rng)
        assert _raster_misses(B, slab)
        referee(s, BOB, B)


def test_bob_hunter_without_targets_is_random():
    s = GameState.start(Ruleset(HPW, beta=F(1, 2), gamma=1), Ball((0, 0), 1))
    referee(s, ALICE, SlabFamily())
    assert bob_hunter(s, [], rng=random.Random(2)) == bob_random(s, random.Random(2))


def test_bob_hunter_shrinks_onto_target():
    s = GameState.start(Ruleset(HPW, beta=F(1, 2), gamma=1), Ball((F(1, 2), F(1, 3)), F(1, 100)))
    referee(s, ALICE, SlabFamily())
    P = canonical_point([F(1, 2), F(1, 3)])
    assert bob_hunter(s, [P]) == Ball((F(1, 2), F(1, 3)), F(1, 200))


@pytest.mark.parametrize("kind", [AB, HAW, HPW])
def test_bob_hunter_fuzzed_legality(kind):
    rng = random.Random(kind)
    rs = {AB: Ruleset(AB, F(1, 2), F(1, 2)), HAW: Ruleset(HAW, beta=F(1, 5)), HPW: Ruleset(HPW, beta=F(1, 2), gamma=1)}[kind]
    for trial in range(1000 // 3 + 1):
        c = (F(rng.randint(-100, 100), 100), F(rng.randint(-100, 100), 100))
        s = GameState.start(rs, Ball(c, F(rng.randint(1, 100), 100)))
        if kind == HAW:
            referee(s, ALICE, Slab(stereographic_unit([F(rng.randint(-9, 9), 7)]), F(rng.randint(-9, 9), 10), s.ball.radius * F(rng.randint(0, 4), 20)))
        else:
            referee(s, ALICE, alice_empty(s))
        targets = [canonical_point([F(rng.randint(0, 20), 20), F(rng.randint(0, 20), 20)]) for _ in range(3)]
        referee(s, BOB, BobHunter(targets)(s, rng))


# -- Alice in the potential game -------------------------------------------------


def test_alice_hpw_quiet_rounds():
    gc = derive_constants(2)
    w = validate_weight([F(2, 3), F(1, 3)])
    alice = AliceHPWBad(gc, w)
    s = GameState.start(Ruleset(HPW, beta=gc.beta, gamma=gc.gamma), Ball((0, 0), 1))
    assert ball_class(s.ball, gc) is None
    assert alice(s) == SlabFamily()
    s = GameState.start(Ruleset(HPW, beta=gc.beta, gamma=gc.gamma), Ball((0, 0), F(1, 10)))
    first = alice(s)
    assert first.tail is not None and 1 in alice.band_round
    assert alice(s) == SlabFamily()


def test_barrier_slab_covers_critical_boxes_small_c():
    gc = derive_constants(2, mode="custom", R=3, c=F(1, 100))
    w = validate_weight([F(1, 2), F(1, 2)])
    rng = random.Random(1)
    covered = 0
    for _ in range(40):
        n = rng.randint(3, 6)
        B = Ball((F(rng.randint(0, 1000), 1000), F(rng.randint(0, 1000), 1000)), gc.band_radius(n) * F(3, 4))
        for k in range(1, 5):
            C = critical_points(B, n, k, gc, w)
            if not C:
                continue
            slab = Slab.from_barrier(barrier_hyperplane(C, n, k, gc, w))
            for P in C:
                for x in _box_raster(delta_box(P, gc.c, w)):
                    if B.contains(x):
                        assert slab.contains(x)
                covered += 1
    assert covered > 0


def _box_raster(box, steps=12):
    lo = [c - h.enclosure(64)[0] for c, h in zip(box.center, box.halfwidth)]
    hi = [c + h.enclosure(64)[0] for c, h in zip(box.center, box.halfwidth)]
    for i in range(steps + 1):
        for j in range(steps + 1):
            yield (lo[0] + (hi[0] - lo[0]) * F(i, steps), lo[1] + (hi[1] - lo[1]) * F(j, steps))
