"""Finite-horizon weighted badness: eps(Q') = min_{q <= Q'} max_i q^{r_i} ||q x_i||.

Rational inputs are handled exactly.  Irrational inputs are algebraic numbers
(minimal polynomial plus isolating interval) refined by exact bisection, and
every value is returned as a certified rational enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .core import Weight
from .errors import PrecisionExhausted
from .exact import Number, Power, Q, format_rational, parse_rational, sign_of


@dataclass
class AlgebraicNumber:
    """The unique root of ``poly`` (integer coefficients, constant term first) in (lo, hi)."""

    poly: tuple[int, ...]
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        self.poly = tuple(int(c) for c in self.poly)
        self.lo, self.hi = Q(self.lo), Q(self.hi)
        if not self.lo < self.hi:
            raise ValueError("isolating interval must have lo < hi")
        if self._sign(self.lo) * self._sign(self.hi) >= 0:
            raise ValueError("polynomial must change sign strictly inside the isolating interval")

    def _sign(self, x: Fraction) -> int:
        v = Fraction(0)
        for c in reversed(self.poly):
            v = v * x + c
        return (v > 0) - (v < 0)

    @classmethod
    def sqrt(cls, n: int, shift: Fraction | int = 0) -> "AlgebraicNumber":
        """sqrt(n) + shift for a non-square positive integer n."""
        if math.isqrt(n) ** 2 == n:
            raise ValueError("n is a perfect square; use a rational")
        s = Q(shift)
        # (x - s)^2 - n, scaled to integer coefficients
        den = s.denominator**2
        poly = (int((s * s - n) * den), int(-2 * s * den), den)
        r = math.isqrt(n)
        return cls(poly, Fraction(r) + s, Fraction(r + 1) + s)

    def refine(self, width: Fraction) -> tuple[Fraction, Fraction]:
        s_lo = self._sign(self.lo)
        while self.hi - self.lo > width:
            mid = (self.lo + self.hi) / 2
            # keep the midpoint denominator small
            mid = Fraction(math.floor(mid * 2**64), 2**64) if mid.denominator > 2**64 else mid
            if not self.lo < mid < self.hi:
                mid = (self.lo + self.hi) / 2
            s = self._sign(mid)
            if s == 0:
                self.lo = self.hi = mid
                break
            if s == s_lo:
                self.lo = mid
            else:
                self.hi = mid
        return self.lo, self.hi

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        return self.refine(Fraction(1, 2**bits))

    def __float__(self) -> float:
        lo, hi = self.enclosure(60)
        return float((lo + hi) / 2)

    def to_json(self) -> dict:
        return {"poly": [str(c) for c in self.poly], "lo": format_rational(self.lo), "hi": format_rational(self.hi)}

    @classmethod
    def from_json(cls, obj) -> "AlgebraicNumber":
        return cls(tuple(int(c) for c in obj["poly"]), parse_rational(obj["lo"]), parse_rational(obj["hi"]))


Coordinate = Union[Fraction, AlgebraicNumber]


def parse_coordinate(text: str) -> Coordinate:
    """'3/7', 'sqrt(2)', 'sqrt(2)-1' or 'sqrt(3)+1/2'."""
    t = text.replace(" ", "")
    if t.startswith("sqrt("):
        close = t.index(")")
        n = int(t[5:close])
        rest = t[close + 1 :]
        return AlgebraicNumber.sqrt(n, parse_rational(rest) if rest else 0)
    return parse_rational(t)


def nearest_distance(t: Fraction) -> Fraction:
    f = t - math.floor(t)
    return min(f, 1 - f)


def distance_range(a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
    """Exact range of ||t|| for t in [a, b].

    ||.|| is monotone between consecutive breakpoints: minima at integers,
    maxima at half-integers.
    """
    na, nb = nearest_distance(a), nearest_distance(b)
    half = Fraction(1, 2)
    lo = Fraction(0) if math.ceil(a) <= b else min(na, nb)
    hi = half if math.ceil(a - half) <= b - half else max(na, nb)
    return lo, hi


@dataclass
class BadnessProfile:
    x: tuple
    w: Weight
    Q: int
    exact: bool
    values: list  # per q: exact Number, or (lo, hi)
    eps: list  # eps(Q') for Q' = 1..Q: exact Number, or (lo, hi)
    argmin: list[int]
    bits: int = 0
    argmin_certain: bool = True

    def eps_at(self, Qp: int):
        return self.eps[Qp - 1]

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, tuple):
                return {"lo": format_rational(v[0]), "hi": format_rational(v[1])}
            if isinstance(v, Power):
                return v.to_json()
            return format_rational(v)

        return {
            "Q": self.Q,
            "weights": [format_rational(r) for r in self.w.r],
            "exact": self.exact,
            "eps": [enc(v) for v in self.eps],
            "argmin": self.argmin,
            "bits": self.bits,
        }


def _exact_value(q: int, x: Sequence[Fraction], w: Weight) -> Number:
    best: Number = Fraction(0)
    for xi, ri in zip(x, w.r):
        v = Power(q, ri, nearest_distance(q * xi)).simplify()
        if sign_of([v, -best]) > 0:
            best = v
    return best


def _exact_profile(x, w, Q_) -> BadnessProfile:
    values, eps, arg = [], [], []
    cur, cur_q = None, 0
    for q in range(1, Q_ + 1):
        v = _exact_value(q, x, w)
        values.append(v)
        if cur is None or sign_of([v, -cur]) < 0:
            cur, cur_q = v, q
        eps.append(cur)
        arg.append(cur_q)
    return BadnessProfile(tuple(x), w, Q_, True, values, eps, arg)


def _interval_profile(x, w, Q_, bits) -> tuple[list, list, list, bool]:
    guard = bits + Q_.bit_length() + 8
    xs = [xi.enclosure(guard) if isinstance(xi, AlgebraicNumber) else (xi, xi) for xi in x]
    pw = {}
    values = []
    for q in range(1, Q_ + 1):
        lo_max = hi_max = Fraction(0)
        for (a, b), ri in zip(xs, w.r):
            key = (q, ri)
            if key not in pw:
                pw[key] = Power(q, ri).enclosure(guard)
            plo, phi = pw[key]
            dlo, dhi = distance_range(q * a, q * b)
            lo_max, hi_max = max(lo_max, plo * dlo), max(hi_max, phi * dhi)
        values.append((lo_max, hi_max))
    eps, arg = [], []
    cur_q = 1
    for q in range(1, Q_ + 1):
        v = values[q - 1]
        if v[1] < values[cur_q - 1][1]:
            cur_q = q
        eps.append((min(eps[-1][0], v[0]), min(eps[-1][1], v[1])) if eps else v)
        arg.append(cur_q)
    # the final argmin is certain when its enclosure lies below every other one
    best_hi = values[cur_q - 1][1]
    certain = all(values[j][0] > best_hi for j in range(Q_) if j != cur_q - 1)
    return values, eps, arg, certain


def badness_profile(
    x: Sequence[Coordinate],
    w: Weight,
    Q_: int,
    width_bits: int = 120,
    max_bits: int = 4096,
) -> BadnessProfile:
    """eps(Q') for Q' = 1..Q, exact for rational x, enclosed to width 2^-width_bits otherwise."""
    if Q_ < 1:
        raise ValueError("horizon Q must be >= 1")
    if len(x) != w.d:
        raise ValueError("dimension mismatch")
    if all(not isinstance(xi, AlgebraicNumber) for xi in x):
        return _exact_profile([Q(xi) for xi in x], w, Q_)
    target = Fraction(1, 2**width_bits)
    bits = width_bits + 8
    while True:
        values, eps, arg, certain = _interval_profile(x, w, Q_, bits)
        wide = max(hi - lo for lo, hi in eps)
        if wide <= target:
            return BadnessProfile(tuple(x), w, Q_, False, values, eps, arg, bits, certain)
        if bits >= max_bits:
            raise PrecisionExhausted(
                f"enclosure width 2^{math.log2(wide) if wide else '-inf'} after {bits} bits", best=eps
            )
        bits *= 2


@dataclass(frozen=True)
class Verdict:
    kind: str  # "InBadUpToHorizon" | "ExcludedAt"
    q: int | None = None

    def __str__(self) -> str:
        return self.kind if self.q is None else f"{self.kind}({self.q})"


def membership_verdict(profile: BadnessProfile, eps) -> Verdict:
    eps = Q(eps)
    for q, v in enumerate(profile.values, start=1):
        if profile.exact:
            below = sign_of([v, -eps]) < 0
        else:
            lo, hi = v
            if hi < eps:
                below = True
            elif lo >= eps:
                below = False
            else:
                raise PrecisionExhausted(f"value at q={q} straddles eps", best=v)
        if below:
            return Verdict("ExcludedAt", q)
    return Verdict("InBadUpToHorizon")
