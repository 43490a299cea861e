"""Alice and Bob players.

Players are callables ``(state, rng) -> move``.  Per-match memory (the band
map of the potential-game strategy, the embedded game of the reduction)
lives on the player object, so use a fresh instance for every match.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .core import Ball, RationalPoint, Weight, ball_inside_ball, dist2
from .decomposition import (
    GameConstants,
    ball_class,
    barrier_hyperplane,
    critical_points,
    critical_points_in,
    q_range,
)
from .errors import (
    BudgetExceeded,
    IllegalMove,
    InternalSearchFailure,
    NoLegalMove,
    NoWinningReduction,
    OracleIllegal,
)
from .exact import Q, format_rational
from .games import (
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
    family_budget_exact,
    referee_haw,
)
from .lattice import _sqrt_upper

CENTER_BITS = 8  # probe resolution for random centers, relative to the free radius


# ---------------------------------------------------------------------------
# small geometry helpers
# ---------------------------------------------------------------------------


def _random_offset(rng: random.Random, d: int, reach: Fraction) -> tuple[Fraction, ...]:
    """Uniform-ish dyadic vector of Euclidean length <= reach."""
    scale = 2**CENTER_BITS
    while True:
        u = [rng.randint(-scale, scale) for _ in range(d)]
        if sum(x * x for x in u) <= scale * scale:
            return tuple(reach * Fraction(x, scale) for x in u)


def _ratio_menu(beta: Fraction) -> list[Fraction]:
    """Radius ratios available to a random Bob: dyadic eighths in [beta, 1) plus beta."""
    menu = {Fraction(j, 8) for j in range(1, 8) if Fraction(j, 8) >= beta}
    menu.add(beta)
    return sorted(menu)


def rational_unit(n: Sequence[Fraction]) -> tuple[Fraction, ...] | None:
    """n / |n| when |n| is rational, else None."""
    n2 = sum((Q(x) ** 2 for x in n), Fraction(0))
    a, b = n2.numerator, n2.denominator
    ra, rb = math.isqrt(a), math.isqrt(b)
    if ra * ra != a or rb * rb != b:
        return None
    L = Fraction(ra, rb)
    return tuple(Q(x) / L for x in n)


def approx_unit(n: Sequence[Fraction], bits: int = 64) -> tuple[Fraction, ...]:
    """Rational vector along n with length in (1 - 2^-bits, 1]."""
    exact = rational_unit(n)
    if exact is not None:
        return exact
    n2 = sum((Q(x) ** 2 for x in n), Fraction(0))
    L = _sqrt_upper(n2 * 4**bits) / 2**bits
    return tuple(Q(x) / L for x in n)


def stereographic_unit(t: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Rational point on the unit sphere S^{len(t)} from a rational parameter vector."""
    s = sum((x * x for x in t), Fraction(0))
    return tuple(2 * x / (s + 1) for x in t) + ((s - 1) / (s + 1),)


# ---------------------------------------------------------------------------
# Alice: potential-game strategy for weighted badly approximable vectors
# ---------------------------------------------------------------------------


@dataclass
class AliceHPWBad:
    gc: GameConstants
    w: Weight
    k_max: int = 64
    budget: int = 10**5
    workers: int | None = None
    band_round: dict[int, int] = field(default_factory=dict)
    reports: list[dict] = field(default_factory=list)

    def __call__(self, state: GameState, rng: random.Random | None = None) -> SlabFamily:
        B = state.ball
        n = ball_class(B, self.gc)
        if n is None or n in self.band_round:
            return SlabFamily()
        self.band_round[n] = state.i
        slabs = []
        partial = False
        emitted = []
        for k in range(1, self.k_max + 1):
            lo, hi = q_range(n + k, k, self.gc, self.w)
            if lo > hi:
                continue
            try:
                C = critical_points(B, n, k, self.gc, self.w, budget=self.budget, workers=self.workers)
            except BudgetExceeded:
                partial = True
                C = critical_points_in(B, n, k, self.gc, self.w, lo, lo + self.budget - 1, self.workers)
            if not C:
                continue
            bar = barrier_hyperplane(C, n, k, self.gc, self.w)
            slabs.append((k, Slab.from_barrier(bar)))
            emitted.append({"k": k, "critical": len(C), "point": str(bar.point)})
        tail = GeometricTail(self.gc.band_radius(n + 1), 1 / self.gc.R)
        fam = SlabFamily(tuple(slabs), tail, partial)
        legal = family_budget_exact(fam, B.radius, self.gc.beta, self.gc.gamma) <= 0
        self.reports.append({"round": state.i, "band": n, "slabs": emitted, "partial": partial, "legal": legal})
        if not legal:
            raise InternalSearchFailure(f"band {n} family violates the potential budget")
        return fam


def alice_hpw_bad(state: GameState, gc: GameConstants, w: Weight, k_max: int = 64, player: AliceHPWBad | None = None):
    """Functional form; pass the same ``player`` across rounds to keep the band map."""
    player = player or AliceHPWBad(gc, w, k_max)
    return player(state)


def alice_empty(state: GameState, rng: random.Random | None = None):
    """Simplest legal Alice move for each ruleset."""
    B = state.ball
    kind = state.ruleset.kind
    if kind == HPW:
        return SlabFamily()
    if kind == AB:
        return Ball(B.center, state.ruleset.alpha * B.radius)
    # a degenerate slab whose hyperplane misses the ball
    d = len(B.center)
    normal = (Fraction(1),) + (Fraction(0),) * (d - 1)
    return Slab(normal, -(B.center[0] + 2 * B.radius), Fraction(0))


# ---------------------------------------------------------------------------
# HAW -> (alpha, beta) reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionParams:
    alpha: Fraction
    beta: Fraction
    theta: Fraction
    N: int
    beta_prime: Fraction

    def to_json(self) -> dict:
        return {
            "alpha": format_rational(self.alpha),
            "beta": format_rational(self.beta),
            "theta": format_rational(self.theta),
            "N": self.N,
            "beta_prime": format_rational(self.beta_prime),
        }


def haw_to_ab_params(alpha, beta) -> ReductionParams:
    alpha, beta = Q(alpha), Q(beta)
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise NoWinningReduction("alpha and beta must lie in (0,1)")
    theta = 1 - 2 * alpha + alpha * beta
    if theta <= 0:
        raise NoWinningReduction(f"theta = 1 - 2 alpha + alpha beta = {format_rational(theta)} <= 0")
    N = 1
    while (alpha * beta) ** N >= theta / 3:
        N += 1
    return ReductionParams(alpha, beta, theta, N, (alpha * beta) ** N / 2)


@dataclass
class MockHAWOracle:
    """Randomized legal Alice for the beta'-hyperplane absolute game.

    Normals are rational unit vectors (stereographic parameters), so the
    reduction can move centers by exact distances.
    """

    beta_prime: Fraction
    rng: random.Random
    degenerate_every: int = 0  # when > 0, every n-th slab passes through the ball center

    calls: int = 0

    def __call__(self, B: Ball) -> Slab:
        self.calls += 1
        d = len(B.center)
        t = [Fraction(self.rng.randint(-64, 64), self.rng.randint(1, 64)) for _ in range(d - 1)]
        n = stereographic_unit(t)
        if self.degenerate_every and self.calls % self.degenerate_every == 0:
            through = B.center
        else:
            off = _random_offset(self.rng, d, B.radius)
            through = tuple(c + o for c, o in zip(B.center, off))
        frac = Fraction(self.rng.randint(0, 8), 8)
        delta = self.beta_prime * B.radius * frac
        return Slab(n, -sum(a * b for a, b in zip(n, through)), delta)


@dataclass
class AliceABFromHAW:
    """Alice in the (alpha,beta)-game driven by a beta'-HAW oracle.

    The embedded hyperplane game sees Bob's balls B_0, B_N, B_2N, ...; each
    check of the reduction is recorded in ``checks``.
    """

    params: ReductionParams
    oracle: Callable[[Ball], Slab]
    embedded: GameState | None = None
    slab: Slab | None = None
    unit: tuple[Fraction, ...] | None = None
    anchor_radius: Fraction | None = None
    checks: list[dict] = field(default_factory=list)
    exact_unit: bool = True

    def _close_embedded_round(self, B: Ball):
        """Verify the reduction's distance claims for the slab just finished."""
        p, s = self.params, self.slab
        rho = self.anchor_radius
        dist_ok = s.distance2_to_plane(B.center) >= (p.theta * rho) ** 2
        fi_ok = B.radius + s.halfwidth < p.theta * rho / 2
        disjoint = not s.meets_ball(B)
        verdict = "Legal"
        try:
            referee_haw(self.embedded, BOB, B)
        except IllegalMove as exc:
            verdict = exc.clause
        self.checks.append(
            {
                "k": len(self.checks),
                "dist_ok": dist_ok,
                "fi_ok": fi_ok,
                "disjoint": disjoint,
                "embedded_verdict": verdict,
            }
        )

    def __call__(self, state: GameState, rng: random.Random | None = None) -> Ball:
        p = self.params
        i = state.i
        B = state.ball
        if i % p.N == 0:
            if self.embedded is None:
                self.embedded = GameState.start(Ruleset(HAW, beta=p.beta_prime), B)
            else:
                self._close_embedded_round(B)
            s = self.oracle(B)
            if s.halfwidth > p.beta_prime * B.radius:
                raise OracleIllegal("oracle slab wider than beta' * rho", ALICE)
            referee_haw(self.embedded, ALICE, s)
            self.slab, self.anchor_radius = s, B.radius
            u = rational_unit(s.normal)
            if u is None:
                self.exact_unit = False
                u = approx_unit(s.normal)
            self.unit = u
        # move as far from the hyperplane as the ball allows; on the plane go along +normal
        side = 1 if self.slab.value(B.center) >= 0 else -1
        step = (1 - p.alpha) * B.radius * side
        x = tuple(c + step * ui for c, ui in zip(B.center, self.unit))
        return Ball(x, p.alpha * B.radius)

    def finish(self, state: GameState):
        """Close the last embedded round if the match ended on a multiple of N."""
        if self.embedded is not None and state.i % self.params.N == 0 and state.i > 0:
            if self.embedded.turn == BOB:
                self._close_embedded_round(state.ball)


def alice_ab_from_haw(state: GameState, haw_strategy, params: ReductionParams, player: AliceABFromHAW | None = None) -> Ball:
    player = player or AliceABFromHAW(params, haw_strategy)
    return player(state)


# ---------------------------------------------------------------------------
# Bob
# ---------------------------------------------------------------------------


def _legal_for_bob(state: GameState, B: Ball) -> bool:
    rs = state.ruleset
    if rs.kind == AB:
        A = state.last_alice
        return B.radius == rs.beta * A.radius and ball_inside_ball(B, A)
    if B.radius < rs.beta * state.ball.radius or not ball_inside_ball(B, state.ball):
        return False
    if rs.kind == HAW:
        return not state.last_alice.meets_ball(B)
    return True


def bob_random(state: GameState, rng: random.Random, tries: int = 200) -> Ball:
    rs = state.ruleset
    if rs.kind == AB:
        A = state.last_alice
        rho = rs.beta * A.radius
        off = _random_offset(rng, len(A.center), A.radius - rho)
        return Ball(tuple(c + o for c, o in zip(A.center, off)), rho)
    B = state.ball
    menu = _ratio_menu(rs.beta)
    for _ in range(tries):
        rho = B.radius * rng.choice(menu)
        off = _random_offset(rng, len(B.center), B.radius - rho)
        cand = Ball(tuple(c + o for c, o in zip(B.center, off)), rho)
        if _legal_for_bob(state, cand):
            return cand
    if rs.kind == HAW:
        # far side of the ball from the slab
        s = state.last_alice
        side = 1 if s.value(B.center) >= 0 else -1
        u = approx_unit(s.normal)
        rho = rs.beta * B.radius
        cand = Ball(tuple(c + side * (B.radius - rho) * ui for c, ui in zip(B.center, u)), rho)
        if _legal_for_bob(state, cand):
            return cand
    raise NoLegalMove(f"no legal ball found at round {state.i}")


@dataclass
class BobHunter:
    """Greedy Bob steering toward the nearest target box."""

    targets: Sequence[RationalPoint]
    gc: GameConstants | None = None
    w: Weight | None = None

    def __call__(self, state: GameState, rng: random.Random) -> Ball:
        if not self.targets:
            return bob_random(state, rng)
        rs = state.ruleset
        outer = state.last_alice if rs.kind == AB else state.ball
        rho = rs.beta * outer.radius
        y = outer.center
        P = min(self.targets, key=lambda T: (dist2(T.coords(), y), T.q, T.p))
        target = P.coords()
        gap2 = dist2(target, y)
        free = outer.radius - rho
        if gap2 == 0:
            center = y
        else:
            # lam <= free / |target - y|, capped at 1, dyadic
            lam = min(Fraction(1), free / _sqrt_upper(gap2))
            lam = Fraction(math.floor(lam * 2**32), 2**32)
            center = tuple(a + lam * (b - a) for a, b in zip(y, target))
        cand = Ball(center, rho)
        if _legal_for_bob(state, cand):
            return cand
        return bob_random(state, rng)


def bob_hunter(state: GameState, targets, gc=None, w=None, rng: random.Random | None = None) -> Ball:
    return BobHunter(list(targets), gc, w)(state, rng or random.Random(0))


@dataclass
class BobScripted:
    """Replays balls from a list (e.g. parsed from a JSONL move file)."""

    moves: list[Ball]
    cursor: int = 0

    @classmethod
    def from_jsonl(cls, text: str) -> "BobScripted":
        return cls([Ball.from_json(json.loads(line)) for line in text.splitlines() if line.strip()])

    def __call__(self, state: GameState, rng: random.Random | None = None) -> Ball:
        if self.cursor >= len(self.moves):
            raise NoLegalMove("scripted Bob ran out of moves")
        move = self.moves[self.cursor]
        self.cursor += 1
        return move
