"""Weights, canonical rational points, boxes and balls.

Every predicate here is decided exactly.  Box halfwidths may be irrational
(``eps / q ** (1 + r_i)``) and are carried as :class:`~diogame.exact.Power`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .errors import NotAWeight
from .exact import Number, Power, Q, format_rational, parse_rational, sign_of


@dataclass(frozen=True)
class Weight:
    r: tuple[Fraction, ...]
    s: Fraction
    i0: int  # 1-based, largest index attaining min r_i
    in_R_prime: bool

    @property
    def d(self) -> int:
        return len(self.r)

    @property
    def i0_index(self) -> int:
        return self.i0 - 1

    def to_json(self) -> dict:
        return {
            "r": [format_rational(x) for x in self.r],
            "s": format_rational(self.s),
            "i0": self.i0,
            "in_R_prime": self.in_R_prime,
        }


def validate_weight(raw: Sequence) -> Weight:
    r = tuple(Q(x) for x in raw)
    if not r:
        raise NotAWeight("empty weight vector")
    if any(x < 0 for x in r):
        raise NotAWeight(f"negative entry in {[format_rational(x) for x in r]}")
    if sum(r) != 1:
        raise NotAWeight(f"entries sum to {format_rational(sum(r))}, not 1")
    s = max(r)
    lo = min(r)
    i0 = max(i for i, x in enumerate(r, start=1) if x == lo)
    n_max = sum(1 for x in r if x == s)
    return Weight(r, s, i0, n_max >= len(r) - 1)


def parse_weight(text: str) -> Weight:
    return validate_weight([parse_rational(t) for t in text.split(",")])


@dataclass(frozen=True, order=True)
class RationalPoint:
    """p / q with q > 0 and gcd(p_1, ..., p_d, q) = 1."""

    q: int
    p: tuple[int, ...]

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("denominator must be positive")
        if reduce(math.gcd, self.p, self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not in lowest terms")

    @property
    def d(self) -> int:
        return len(self.p)

    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(pi, self.q) for pi in self.p)

    def __str__(self) -> str:
        return "(" + ", ".join(format_rational(x) for x in self.coords()) + ")"

    def to_json(self) -> dict:
        return {"p": [str(x) for x in self.p], "q": str(self.q)}

    @classmethod
    def from_json(cls, obj) -> "RationalPoint":
        if isinstance(obj, list):
            return canonical_point(obj)
        return cls(int(obj["q"]), tuple(int(x) for x in obj["p"]))


def canonical_point(fractions: Sequence) -> RationalPoint:
    xs = [Q(x) for x in fractions]
    q = reduce(math.lcm, (x.denominator for x in xs), 1)
    p = [x.numerator * (q // x.denominator) for x in xs]
    g = reduce(math.gcd, p, q)
    return RationalPoint(q // g, tuple(pi // g for pi in p))


def point_from_ints(p: Sequence[int], q: int) -> RationalPoint:
    """Canonical point for the (possibly unreduced) pair (p, q)."""
    g = reduce(math.gcd, p, q)
    return RationalPoint(q // g, tuple(pi // g for pi in p))


@dataclass(frozen=True)
class Box:
    center: tuple[Fraction, ...]
    halfwidth: tuple[Number, ...]
    open: bool = True

    @property
    def d(self) -> int:
        return len(self.center)

    def contains(self, x: Sequence[Fraction]) -> bool:
        for c, h, xi in zip(self.center, self.halfwidth, x):
            s = sign_of([abs(Q(xi) - c), -h])
            if s > 0 or (s == 0 and self.open):
                return False
        return True


@dataclass(frozen=True)
class Ball:
    center: tuple[Fraction, ...]
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(Q(x) for x in self.center))
        object.__setattr__(self, "radius", Q(self.radius))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def d(self) -> int:
        return len(self.center)

    def contains(self, x: Sequence[Fraction]) -> bool:
        return dist2(self.center, x) <= self.radius**2

    def to_json(self) -> dict:
        return {
            "center": [format_rational(x) for x in self.center],
            "radius": format_rational(self.radius),
        }

    @classmethod
    def from_json(cls, obj) -> "Ball":
        return cls(tuple(parse_rational(x) for x in obj["center"]), parse_rational(obj["radius"]))


def dist2(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    return sum(((Q(a) - Q(b)) ** 2 for a, b in zip(x, y)), Fraction(0))


def ball_inside_ball(inner: Ball, outer: Ball) -> bool:
    """Closed-ball containment: |c - c'| + rho <= rho'."""
    slack = outer.radius - inner.radius
    return slack >= 0 and dist2(inner.center, outer.center) <= slack**2


def delta_box(P: RationalPoint, eps, w: Weight) -> Box:
    eps = Q(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return Box(
        P.coords(),
        tuple(Power(P.q, -(1 + ri), eps).simplify() for ri in w.r),
        open=True,
    )


def box_nested(inner: Box, outer: Box) -> bool:
    """inner is a subset of outer (as sets)."""
    # a closed box inside an open one cannot touch its faces
    need_strict = (not inner.open) and outer.open
    for c, h, c2, h2 in zip(inner.center, inner.halfwidth, outer.center, outer.halfwidth):
        s = sign_of([abs(c - c2), h, -h2])
        if s > 0 or (s == 0 and need_strict):
            return False
    return True


def box_equal(a: Box, b: Box) -> bool:
    return (
        a.open == b.open
        and a.center == b.center
        and all(sign_of([h, -h2]) == 0 for h, h2 in zip(a.halfwidth, b.halfwidth))
    )


def box_strictly_nested(inner: Box, outer: Box) -> bool:
    if inner.d != outer.d:
        raise ValueError("dimension mismatch")
    return box_nested(inner, outer) and not box_equal(inner, outer)


def ball_box_intersects(B: Ball, X: Box) -> bool:
    """Exact test for closed ball meeting box X (open or closed).

    The squared distance from the ball center to the closed box is compared
    with rho^2; an open box is met iff that distance is strictly smaller.
    """
    if B.d != X.d:
        raise ValueError("dimension mismatch")
    terms: list[Number] = [-(B.radius**2)]
    for y, c, h in zip(B.center, X.center, X.halfwidth):
        delta = abs(y - c)
        if sign_of([delta, -h]) <= 0:
            continue
        # (delta - h)^2 = delta^2 - 2 delta h + h^2
        terms.append(delta * delta)
        terms.append(h * (-2 * delta))
        terms.append(h * h)
    s = sign_of(terms)
    return s < 0 if X.open else s <= 0


def parse_vector(text: str) -> tuple[Fraction, ...]:
    return tuple(parse_rational(t) for t in text.split(","))
