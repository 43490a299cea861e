"""Referees, match loop and transcripts for the three ball games.

A match starts from Bob's ball B_0.  Round i is Alice's answer to B_i
followed by Bob's B_{i+1}.  Referees mutate the state in place only after a
move has been accepted; a rejected move leaves the state untouched.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .core import Ball, ball_inside_ball
from .errors import (
    BadParameters,
    BallMeetsSlab,
    FamilyBudgetExceeded,
    IllegalMove,
    IllegalRadius,
    NotContained,
    SlabTooWide,
    WrongTurn,
)
from .exact import Number, Power, Q, enclose, format_rational, parse_rational, sign_of

AB, HAW, HPW = "AB", "HAW", "HPW"
ALICE, BOB = "alice", "bob"


# ---------------------------------------------------------------------------
# slabs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Slab:
    """Closed neighbourhood {x : |normal.x + offset| <= halfwidth * |normal|}."""

    normal: tuple[Fraction, ...]
    offset: Fraction
    halfwidth: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(Q(x) for x in self.normal))
        object.__setattr__(self, "offset", Q(self.offset))
        object.__setattr__(self, "halfwidth", Q(self.halfwidth))
        if not any(self.normal):
            raise ValueError("slab normal must be nonzero")
        if self.halfwidth < 0:
            raise ValueError("slab halfwidth must be nonnegative")

    @property
    def norm2(self) -> Fraction:
        return sum((x * x for x in self.normal), Fraction(0))

    def value(self, x: Sequence) -> Fraction:
        return sum((a * Q(b) for a, b in zip(self.normal, x)), Fraction(0)) + self.offset

    def contains(self, x: Sequence) -> bool:
        return self.value(x) ** 2 <= self.halfwidth**2 * self.norm2

    def meets_ball(self, B: Ball) -> bool:
        """dist(center, hyperplane) <= radius + halfwidth (both sets closed)."""
        return self.value(B.center) ** 2 <= (B.radius + self.halfwidth) ** 2 * self.norm2

    def distance2_to_plane(self, x: Sequence) -> Fraction:
        return self.value(x) ** 2 / self.norm2

    def to_json(self) -> dict:
        return {
            "type": "slab",
            "normal": [format_rational(x) for x in self.normal],
            "offset": format_rational(self.offset),
            "halfwidth": format_rational(self.halfwidth),
        }

    @classmethod
    def from_json(cls, obj) -> "Slab":
        return cls(
            tuple(parse_rational(x) for x in obj["normal"]),
            parse_rational(obj["offset"]),
            parse_rational(obj["halfwidth"]),
        )

    @classmethod
    def from_barrier(cls, barrier) -> "Slab":
        return cls(tuple(Fraction(a) for a in barrier.cert.a), Fraction(barrier.cert.C), barrier.halfwidth)


@dataclass(frozen=True)
class GeometricTail:
    """Halfwidths first * ratio**(k-1) for every k >= 1, summed in closed form."""

    first: Fraction
    ratio: Fraction

    def __post_init__(self):
        object.__setattr__(self, "first", Q(self.first))
        object.__setattr__(self, "ratio", Q(self.ratio))
        if self.first < 0 or not 0 <= self.ratio < 1:
            raise ValueError("geometric tail needs first >= 0 and ratio in [0,1)")

    def halfwidth(self, k: int) -> Fraction:
        return self.first * self.ratio ** (k - 1)

    def to_json(self) -> dict:
        return {"first": format_rational(self.first), "ratio": format_rational(self.ratio)}

    @classmethod
    def from_json(cls, obj) -> "GeometricTail":
        return cls(parse_rational(obj["first"]), parse_rational(obj["ratio"]))


@dataclass(frozen=True)
class SlabFamily:
    """Countable slab family: explicit slabs tagged by index, optionally an infinite tail.

    With a tail, tagged slab k must carry halfwidth ``tail.halfwidth(k)`` and
    untagged indices stand for slabs of that halfwidth whose hyperplanes are
    irrelevant to legality.
    """

    slabs: tuple[tuple[int, Slab], ...] = ()
    tail: GeometricTail | None = None
    partial: bool = False

    def to_json(self) -> dict:
        out = {
            "type": "family",
            "slabs": [dict(s.to_json(), k=k) for k, s in self.slabs],
            "tail": self.tail.to_json() if self.tail else None,
        }
        if self.partial:
            out["partial"] = True
        return out

    @classmethod
    def from_json(cls, obj) -> "SlabFamily":
        tail = GeometricTail.from_json(obj["tail"]) if obj.get("tail") else None
        return cls(
            tuple((int(s["k"]), Slab.from_json(s)) for s in obj["slabs"]),
            tail,
            bool(obj.get("partial", False)),
        )

    def covers(self, x: Sequence) -> bool:
        return any(s.contains(x) for _, s in self.slabs)


def family_budget_exact(fam: SlabFamily, rho: Fraction, beta: Fraction, gamma: Fraction) -> int:
    """sign(sum delta^gamma - (beta rho)^gamma); a closed form when a tail is declared."""
    cap = beta * rho
    if fam.tail is not None:
        for k, s in fam.slabs:
            if s.halfwidth != fam.tail.halfwidth(k):
                raise FamilyBudgetExceeded(f"slab {k} halfwidth disagrees with the declared tail")
        if fam.tail.first == 0:
            return -1 if cap > 0 else 0
        # first^g / (1 - t^g) vs cap^g  <=>  first^g + (cap t)^g - cap^g
        t = fam.tail.ratio
        parts: list[Number] = [Power(fam.tail.first, gamma), -Power(cap, gamma)]
        if t:
            parts.append(Power(cap * t, gamma))
        return sign_of(parts)
    terms: list[Number] = [Power(s.halfwidth, gamma) for _, s in fam.slabs if s.halfwidth > 0]
    terms.append(-Power(cap, gamma))
    return sign_of(terms)


def family_budget_partial(
    fam: SlabFamily, rho: Fraction, beta: Fraction, gamma: Fraction, K: int = 64, bits: int = 160
) -> bool | None:
    """Independent decision from K explicit terms plus an enclosed remainder.

    Returns True (legal), False (illegal) or None when the enclosures overlap.
    """
    cap_lo, cap_hi = _enclose_pow(beta * rho, gamma, bits)
    if fam.tail is None:
        lo = hi = Fraction(0)
        for _, s in fam.slabs:
            a, b = _enclose_pow(s.halfwidth, gamma, bits)
            lo, hi = lo + a, hi + b
        rem_hi = Fraction(0)
    else:
        lo = hi = Fraction(0)
        for k in range(1, K + 1):
            a, b = _enclose_pow(fam.tail.halfwidth(k), gamma, bits)
            lo, hi = lo + a, hi + b
        # sum_{k>K} first^g t^{g(k-1)} = (first t^K)^g / (1 - t^g)
        num_hi = _enclose_pow(fam.tail.first * fam.tail.ratio**K, gamma, bits)[1]
        tg_hi = _enclose_pow(fam.tail.ratio, gamma, bits)[1]
        rem_hi = num_hi / (1 - tg_hi) if tg_hi < 1 else None
        if rem_hi is None:
            return None
    if rem_hi is not None and hi + rem_hi <= cap_lo:
        return True
    if lo > cap_hi:
        return False
    return None


def _enclose_pow(x: Fraction, gamma: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    return (Fraction(0), Fraction(0)) if x == 0 else enclose(Power(x, gamma), bits)


# ---------------------------------------------------------------------------
# state and referees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ruleset:
    kind: str
    alpha: Fraction | None = None
    beta: Fraction = Fraction(1, 2)
    gamma: Fraction | None = None

    def __post_init__(self):
        if self.kind not in (AB, HAW, HPW):
            raise BadParameters(f"unknown ruleset {self.kind!r}")
        beta = Q(self.beta)
        object.__setattr__(self, "beta", beta)
        if self.kind == AB:
            alpha = Q(self.alpha)
            object.__setattr__(self, "alpha", alpha)
            if not (0 < alpha < 1 and 0 < beta < 1):
                raise BadParameters("(alpha,beta)-game needs alpha, beta in (0,1)")
        elif self.kind == HAW:
            if not 0 < beta < Fraction(1, 3):
                raise BadParameters("hyperplane absolute game needs beta in (0,1/3)")
        else:
            gamma = Q(self.gamma if self.gamma is not None else 1)
            object.__setattr__(self, "gamma", gamma)
            if not 0 < beta < 1 or gamma <= 0:
                raise BadParameters("potential game needs beta in (0,1) and gamma > 0")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "beta": format_rational(self.beta)}
        if self.alpha is not None:
            out["alpha"] = format_rational(self.alpha)
        if self.gamma is not None:
            out["gamma"] = format_rational(self.gamma)
        return out

    @classmethod
    def from_json(cls, obj) -> "Ruleset":
        return cls(
            obj["kind"],
            parse_rational(obj["alpha"]) if "alpha" in obj else None,
            parse_rational(obj["beta"]),
            parse_rational(obj["gamma"]) if "gamma" in obj else None,
        )


@dataclass
class GameState:
    ruleset: Ruleset
    balls: list[Ball]
    alice_moves: list = field(default_factory=list)
    turn: str = ALICE
    log: list[str] = field(default_factory=list)

    @classmethod
    def start(cls, ruleset: Ruleset, B0: Ball) -> "GameState":
        return cls(ruleset, [B0])

    @property
    def i(self) -> int:
        """Index of Bob's current ball."""
        return len(self.balls) - 1

    @property
    def ball(self) -> Ball:
        return self.balls[-1]

    @property
    def last_alice(self):
        return self.alice_moves[-1] if self.alice_moves else None


def _check_turn(state: GameState, mover: str):
    if mover != state.turn:
        raise WrongTurn(f"it is {state.turn}'s turn, not {mover}'s", mover)


def _accept(state: GameState, mover: str, move) -> GameState:
    if mover == ALICE:
        state.alice_moves.append(move)
        state.turn = BOB
    else:
        state.balls.append(move)
        state.turn = ALICE
    state.log.append(f"{mover}:{state.i}:Legal")
    return state


def referee_ab(state: GameState, mover: str, move: Ball) -> GameState:
    _check_turn(state, mover)
    rs = state.ruleset
    if mover == ALICE:
        outer, ratio = state.ball, rs.alpha
    else:
        outer, ratio = state.last_alice, rs.beta
    if not isinstance(move, Ball):
        raise NotContained("a ball is required", mover)
    if move.radius != ratio * outer.radius:
        raise IllegalRadius(
            f"radius {format_rational(move.radius)} != {format_rational(ratio)} * {format_rational(outer.radius)}",
            mover,
        )
    if not ball_inside_ball(move, outer):
        raise NotContained("ball leaves the previous ball", mover)
    return _accept(state, mover, move)


def referee_haw(state: GameState, mover: str, move) -> GameState:
    _check_turn(state, mover)
    rs = state.ruleset
    if mover == ALICE:
        if not isinstance(move, Slab):
            raise SlabTooWide("a slab is required", mover)
        if move.halfwidth > rs.beta * state.ball.radius:
            raise SlabTooWide(
                f"halfwidth {format_rational(move.halfwidth)} > beta * rho = {format_rational(rs.beta * state.ball.radius)}",
                mover,
            )
        return _accept(state, mover, move)
    if not isinstance(move, Ball):
        raise NotContained("a ball is required", mover)
    if move.radius < rs.beta * state.ball.radius:
        raise IllegalRadius("radius below beta * previous radius", mover)
    if not ball_inside_ball(move, state.ball):
        raise NotContained("ball leaves the previous ball", mover)
    if state.last_alice.meets_ball(move):
        raise BallMeetsSlab("ball meets Alice's closed slab", mover)
    return _accept(state, mover, move)


def referee_hpw(state: GameState, mover: str, move) -> GameState:
    _check_turn(state, mover)
    rs = state.ruleset
    if mover == ALICE:
        if not isinstance(move, SlabFamily):
            raise FamilyBudgetExceeded("a slab family is required", mover)
        try:
            s = family_budget_exact(move, state.ball.radius, rs.beta, rs.gamma)
        except FamilyBudgetExceeded as exc:
            raise FamilyBudgetExceeded(str(exc), mover) from None
        if s > 0:
            raise FamilyBudgetExceeded("sum of halfwidth^gamma exceeds (beta rho)^gamma", mover)
        return _accept(state, mover, move)
    if not isinstance(move, Ball):
        raise NotContained("a ball is required", mover)
    if move.radius < rs.beta * state.ball.radius:
        raise IllegalRadius("radius below beta * previous radius", mover)
    if not ball_inside_ball(move, state.ball):
        raise NotContained("ball leaves the previous ball", mover)
    # Bob may enter Alice's slabs in this game
    return _accept(state, mover, move)


REFEREES: dict[str, Callable] = {AB: referee_ab, HAW: referee_haw, HPW: referee_hpw}


def referee(state: GameState, mover: str, move) -> GameState:
    return REFEREES[state.ruleset.kind](state, mover, move)


# ---------------------------------------------------------------------------
# transcripts
# ---------------------------------------------------------------------------


def move_to_json(move):
    if move is None:
        return None
    return move.to_json() if not isinstance(move, Ball) else dict(move.to_json(), type="ball")


def move_from_json(obj):
    if obj is None:
        return None
    kind = obj.get("type")
    if kind == "ball":
        return Ball.from_json(obj)
    if kind == "slab":
        return Slab.from_json(obj)
    if kind == "family":
        return SlabFamily.from_json(obj)
    raise ValueError(f"unknown move type {kind!r}")


@dataclass
class Transcript:
    ruleset: Ruleset
    seed: int | None
    balls: list[Ball]
    alice_moves: list
    meta: dict = field(default_factory=dict)
    abort: dict | None = None

    @property
    def completed(self) -> bool:
        return self.abort is None

    def rounds(self) -> list[dict]:
        out = []
        for i, B in enumerate(self.balls):
            a = self.alice_moves[i] if i < len(self.alice_moves) else None
            out.append({"i": i, "bob": Ball.to_json(B), "alice": move_to_json(a), "verdict": "Legal"})
        return out

    def to_jsonl(self) -> str:
        head = {
            "header": {
                "ruleset": self.ruleset.to_json(),
                "seed": self.seed,
                "meta": self.meta,
                "abort": self.abort,
            }
        }
        lines = [json.dumps(head, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in self.rounds()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        head = rows[0]["header"]
        balls, moves = [], []
        for r in rows[1:]:
            balls.append(Ball.from_json(r["bob"]))
            if r["alice"] is not None:
                moves.append(move_from_json(r["alice"]))
        return cls(Ruleset.from_json(head["ruleset"]), head["seed"], balls, moves, head.get("meta", {}), head.get("abort"))


def replay(T: Transcript) -> GameState:
    """Re-run every recorded move through the referee; raises IllegalMove on the first bad one."""
    state = GameState.start(T.ruleset, T.balls[0])
    for i, move in enumerate(T.alice_moves):
        referee(state, ALICE, move)
        if i + 1 < len(T.balls):
            referee(state, BOB, T.balls[i + 1])
    return state


Strategy = Callable[[GameState, random.Random], object]


def run_match(
    ruleset: Ruleset,
    alice: Strategy,
    bob: Strategy,
    rounds: int,
    seed: int = 0,
    B0: Ball | None = None,
    strict: bool = False,
    on_round: Callable[[GameState], None] | None = None,
) -> Transcript:
    """Play ``rounds`` Alice/Bob exchanges from B0; deterministic given seed."""
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    B0 = B0 or Ball((Fraction(0),) * 2, Fraction(1))
    rng_a = random.Random(f"{seed}:alice")
    rng_b = random.Random(f"{seed}:bob")
    state = GameState.start(ruleset, B0)
    abort = None
    for _ in range(rounds):
        for mover, strat, rng in ((ALICE, alice, rng_a), (BOB, bob, rng_b)):
            try:
                move = strat(state, rng)
                referee(state, mover, move)
            except IllegalMove as exc:
                if strict:
                    raise
                abort = {"mover": exc.mover or mover, "clause": exc.clause, "message": str(exc), "round": state.i}
                break
        if abort:
            break
        if on_round is not None:
            on_round(state)
    return Transcript(ruleset, seed, list(state.balls), list(state.alice_moves), {}, abort)


def outcome_estimate(T: Transcript) -> Ball:
    """Final ball; any infinite continuation's limit point lies inside it."""
    final = T.balls[-1]
    for B in T.balls:
        if not ball_inside_ball(final, B):
            raise NotContained("transcript balls are not nested")
    return final
