import random
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from diogame.core import Ball, ball_inside_ball
from diogame.decomposition import derive_constants
from diogame.errors import BadParameters, BallMeetsSlab, FamilyBudgetExceeded, IllegalRadius, NotContained, WrongTurn
from diogame.games import (
    AB,
    ALICE,
    BOB,
    HAW,
    HPW,
    GameState,
    GeometricTail,
    Ruleset,
    Slab,
    SlabFamily,
    Transcript,
    family_budget_exact,
    family_budget_partial,
    outcome_estimate,
    referee,
    replay,
    run_match,
)
from diogame.strategies import alice_empty, bob_random

B0 = Ball((0, 0), 1)
X = (F(1), F(0))


def state(kind, **kw):
    return GameState.start(Ruleset(kind, **kw), B0)


# -- (alpha, beta) ---------------------------------------------------------


def test_ab_concentric_half_is_legal():
    s = state(AB, alpha=F(1, 2), beta=F(1, 2))
    referee(s, ALICE, Ball((0, 0), F(1, 2)))
    assert s.log == ["alice:0:Legal"] and s.turn == BOB


def test_ab_radius_must_be_exact():
    s = state(AB, alpha=F(1, 2), beta=F(1, 2))
    with pytest.raises(IllegalRadius):
        referee(s, ALICE, Ball((0, 0), F(49, 100)))
    assert s.alice_moves == [] and s.turn == ALICE


def test_ab_internal_tangency_is_legal():
    s = state(AB, alpha=F(1, 2), beta=F(1, 2))
    referee(s, ALICE, Ball((F(1, 2), 0), F(1, 2)))
    with pytest.raises(NotContained):
        referee(state(AB, alpha=F(1, 2), beta=F(1, 2)), ALICE, Ball((F(501, 1000), 0), F(1, 2)))


def test_wrong_turn():
    with pytest.raises(WrongTurn):
        referee(state(AB, alpha=F(1, 2), beta=F(1, 2)), BOB, Ball((0, 0), F(1, 4)))


# -- hyperplane absolute -----------------------------------------------------


def test_haw_slab_at_the_width_limit():
    s = state(HAW, beta=F(1, 4))
    referee(s, ALICE, Slab(X, 0, F(1, 4)))
    with pytest.raises(Exception) as exc:
        referee(state(HAW, beta=F(1, 4)), ALICE, Slab(X, 0, F(1, 4) + F(1, 10**12)))
    assert exc.value.clause == "SlabTooWide"


def test_haw_closed_slab_blocks_boundary_contact():
    s = state(HAW, beta=F(1, 4))
    referee(s, ALICE, Slab(X, 0, F(1, 4)))
    # ball spans x in [1/4, 3/4]: touches the slab face x = 1/4
    with pytest.raises(BallMeetsSlab):
        referee(s, BOB, Ball((F(1, 2), 0), F(1, 4)))
    referee(s, BOB, Ball((F(1, 2) + F(1, 10**9), 0), F(1, 4)))


def test_haw_beta_range():
    with pytest.raises(BadParameters):
        Ruleset(HAW, beta=F(2, 5))


# -- potential game ----------------------------------------------------------


def test_hpw_single_slab_budget():
    s = state(HPW, beta=F(1, 2), gamma=1)
    referee(s, ALICE, SlabFamily(((1, Slab(X, 0, F(1, 2))),)))
    with pytest.raises(FamilyBudgetExceeded):
        referee(state(HPW, beta=F(1, 2), gamma=1), ALICE, SlabFamily(((1, Slab(X, 0, F(3, 5))),)))
    referee(state(HPW, beta=F(1, 2), gamma=1), ALICE, SlabFamily())


def test_hpw_geometric_family_from_the_strategy():
    gc = derive_constants(2)
    for n in (1, 2, 5, 9):
        # any radius above beta R^-n rho0 is allowed to host the band-n family
        rho = gc.beta * gc.band_radius(n) * F(1000001, 1000000)
        fam = SlabFamily(tail=GeometricTail(gc.band_radius(n + 1), 1 / gc.R))
        assert family_budget_exact(fam, rho, gc.beta, gc.gamma) <= 0
        # R^-(n+1) / (1 - 1/R) = beta * rho exactly at rho = R^-n / 4
        edge = gc.band_radius(n) / 4
        assert family_budget_exact(fam, edge, gc.beta, gc.gamma) == 0
        assert family_budget_exact(fam, edge * F(999, 1000), gc.beta, gc.gamma) == 1


def test_tail_must_match_tagged_slabs():
    fam = SlabFamily(((2, Slab(X, 0, F(1, 10))),), GeometricTail(F(1, 9), F(1, 9)))
    with pytest.raises(FamilyBudgetExceeded):
        family_budget_exact(fam, F(1), F(1, 2), F(1))


@settings(max_examples=150, deadline=None)
@given(
    st.fractions(min_value=F(1, 1000), max_value=1, max_denominator=1000),
    st.fractions(min_value=0, max_value=F(9, 10), max_denominator=100),
    st.sampled_from([F(1), F(1, 2), F(2), F(3, 2)]),
    st.fractions(min_value=F(1, 100), max_value=1, max_denominator=100),
    st.fractions(min_value=F(1, 10), max_value=F(9, 10), max_denominator=10),
)
def test_tail_closed_form_matches_series(first, ratio, gamma, rho, beta):
    fam = SlabFamily(tail=GeometricTail(first, ratio))
    got = family_budget_exact(fam, rho, beta, gamma)
    with mpmath.workprec(300):
        g = mpmath.mpf(gamma.numerator) / gamma.denominator
        fr = lambda x: mpmath.mpf(x.numerator) / x.denominator
        series = mpmath.nsum(lambda k: (fr(first) * fr(ratio) ** (k - 1)) ** g, [1, mpmath.inf]) if ratio else fr(first) ** g
        gap = series - (fr(beta) * fr(rho)) ** g
        if abs(gap) > mpmath.mpf(2) ** -200:
            assert got == (1 if gap > 0 else -1)
    partial = family_budget_partial(fam, rho, beta, gamma)
    if partial is not None:
        assert partial == (got <= 0)


# -- matches and transcripts ---------------------------------------------------


def test_zero_round_match():
    T = run_match(Ruleset(HPW, beta=F(1, 2), gamma=1), alice_empty, bob_random, 0)
    assert T.balls == [Ball((0, 0), 1)] and T.alice_moves == []
    assert outcome_estimate(T) == T.balls[0]


@pytest.mark.parametrize("kind,kw", [(HPW, {"beta": F(1, 2), "gamma": 1}), (AB, {"alpha": F(1, 3), "beta": F(1, 2)}), (HAW, {"beta": F(1, 4)})])
def test_random_bob_vs_empty_alice_completes(kind, kw):
    rs = Ruleset(kind, **kw)
    T = run_match(rs, alice_empty, bob_random, 40, seed=5)
    assert T.completed and len(T.balls) == 41
    assert T.to_jsonl() == run_match(rs, alice_empty, bob_random, 40, seed=5).to_jsonl()
    assert T.to_jsonl() != run_match(rs, alice_empty, bob_random, 40, seed=6).to_jsonl()
    final = outcome_estimate(T)
    assert all(ball_inside_ball(final, B) for B in T.balls)
    if kind == HPW:
        assert final.radius >= F(1, 2) ** 40


def test_jsonl_round_trip_and_replay():
    rs = Ruleset(HAW, beta=F(1, 4))
    T = run_match(rs, alice_empty, bob_random, 25, seed=1)
    back = Transcript.from_jsonl(T.to_jsonl())
    assert back.to_jsonl() == T.to_jsonl()
    assert replay(back).log == replay(T).log


def test_replay_rejects_tampering():
    T = run_match(Ruleset(AB, alpha=F(1, 2), beta=F(1, 2)), alice_empty, bob_random, 10, seed=2)
    B = T.balls[4]
    T.balls[4] = Ball(B.center, B.radius * F(9, 10))
    with pytest.raises(IllegalRadius):
        replay(T)


def test_abort_is_recorded():
    def greedy(state, rng):
        return SlabFamily(((1, Slab(X, 0, state.ball.radius)),))

    T = run_match(Ruleset(HPW, beta=F(1, 2), gamma=1), greedy, bob_random, 5, seed=0)
    assert not T.completed
    assert T.abort["clause"] == "FamilyBudgetExceeded" and T.abort["mover"] == ALICE


def test_hpw_bob_may_enter_slabs():
    s = state(HPW, beta=F(1, 2), gamma=1)
    referee(s, ALICE, SlabFamily(((1, Slab(X, 0, F(1, 2))),)))
    referee(s, BOB, Ball((0, 0), F(1, 2)))
    assert s.i == 1


def test_random_bob_respects_radius_floor():
    rng = random.Random(0)
    s = state(HPW, beta=F(1, 2), gamma=1)
    for _ in range(30):
        referee(s, ALICE, SlabFamily())
        B = bob_random(s, rng)
        assert B.radius >= F(1, 2) * s.ball.radius
        referee(s, BOB, B)
