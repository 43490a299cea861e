"""Exact real arithmetic for rational powers.

Quantities such as ``q ** (1 + r_i)`` with rational ``r_i`` are irrational in
general.  They are kept symbolically as :class:`Power` objects
(``coef * base ** exp`` with rational coefficient, base and exponent) and
compared exactly.  The sign of a finite sum of powers is decided by

* exact integer cross-raising when a single radical is involved, and
* otherwise rational interval enclosures built from integer ``n``-th roots,
  with a root-separation bound that certifies an exact zero.

No floating point value ever enters a decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Union

import gmpy2

Rational = Union[int, Fraction]


def Q(x) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"not an exact rational: {x!r}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational literal")
    if "/" in text:
        num, den = text.split("/", 1)
        den_i = int(den)
        if den_i == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), den_i)
    return Fraction(int(text))


def format_rational(x: Rational) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def iroot_floor(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 0:
        raise ValueError("negative radicand")
    if k == 1:
        return n
    return int(gmpy2.iroot(gmpy2.mpz(n), k)[0])


def _is_perfect_power(n: int, k: int) -> tuple[int, bool]:
    root, exact = gmpy2.iroot(gmpy2.mpz(n), k)
    return int(root), bool(exact)


def rational_root(x: Fraction, k: int) -> Fraction | None:
    """Exact k-th root of a nonnegative rational, or None if irrational."""
    if k == 1:
        return x
    a, ea = _is_perfect_power(x.numerator, k)
    if not ea:
        return None
    b, eb = _is_perfect_power(x.denominator, k)
    if not eb:
        return None
    return Fraction(a, b)


@dataclass(frozen=True)
class Power:
    """The positive-base real number ``coef * base ** exp``."""

    base: Fraction
    exp: Fraction
    coef: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "base", Q(self.base))
        object.__setattr__(self, "exp", Q(self.exp))
        object.__setattr__(self, "coef", Q(self.coef))
        if self.base <= 0:
            raise ValueError("Power base must be positive")

    # -- algebra ---------------------------------------------------------
    def simplify(self) -> "Power":
        """Fold the integer part of the exponent into the coefficient."""
        if self.coef == 0:
            return Power(1, 0, 0)
        if self.base == 1 or self.exp == 0:
            return Power(1, 0, self.coef)
        whole = self.exp.numerator // self.exp.denominator
        frac = self.exp - whole
        coef = self.coef * self.base**whole
        if frac == 0:
            return Power(1, 0, coef)
        root = rational_root(self.base ** frac.numerator, frac.denominator)
        if root is not None:
            return Power(1, 0, coef * root)
        return Power(self.base, frac, coef)

    def is_rational(self) -> bool:
        return self.simplify().exp == 0

    def rational(self) -> Fraction:
        p = self.simplify()
        if p.exp != 0:
            raise ValueError(f"{self} is irrational")
        return p.coef

    def __mul__(self, other) -> "Power":
        if isinstance(other, (int, Fraction)):
            return Power(self.base, self.exp, self.coef * other)
        if not isinstance(other, Power):
            return NotImplemented
        if self.base == other.base:
            return Power(self.base, self.exp + other.exp, self.coef * other.coef)
        if self.exp == other.exp:
            return Power(self.base * other.base, self.exp, self.coef * other.coef)
        a, b = self.simplify(), other.simplify()
        if a.exp == 0 or b.exp == 0:
            if a.exp == 0:
                return Power(b.base, b.exp, b.coef * a.coef)
            return Power(a.base, a.exp, a.coef * b.coef)
        v = math.lcm(a.exp.denominator, b.exp.denominator)
        base = a.base ** (a.exp * v) * b.base ** (b.exp * v)
        return Power(base, Fraction(1, v), a.coef * b.coef).simplify()

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Power":
        if isinstance(other, (int, Fraction)):
            return Power(self.base, self.exp, self.coef / other)
        if not isinstance(other, Power):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "Power":
        return self.inverse() * other

    def inverse(self) -> "Power":
        if self.coef == 0:
            raise ZeroDivisionError("inverse of zero")
        return Power(self.base, -self.exp, 1 / self.coef)

    def __neg__(self) -> "Power":
        return Power(self.base, self.exp, -self.coef)

    def __pow__(self, e) -> "Power":
        e = Q(e)
        if self.coef < 0:
            if e.denominator != 1:
                raise ValueError("fractional power of a negative number")
            sign = -1 if e.numerator % 2 else 1
            mag = Power(self.base, self.exp, -self.coef) ** e
            return Power(mag.base, mag.exp, sign * mag.coef)
        if self.coef == 0:
            if e <= 0:
                raise ZeroDivisionError("0 ** nonpositive")
            return Power(1, 0, 0)
        if e.denominator == 1:
            return Power(self.base, self.exp * e, self.coef**e.numerator)
        return (Power(self.base, self.exp * e) * Power(self.coef, e)).simplify()

    # -- comparison ------------------------------------------------------
    def _cmp(self, other) -> int:
        return sign_of([self, neg(other)])

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Power)):
            return self._cmp(other) == 0
        return NotImplemented

    def __hash__(self):
        p = self.simplify()
        if p.exp == 0:
            return hash(p.coef)
        return hash((p.base, p.exp, p.coef))

    def __float__(self) -> float:
        p = self.simplify()
        if p.coef == 0:
            return 0.0
        lg = _log2(abs(p.coef))
        lb = _log2(p.base) * float(p.exp)
        try:
            val = 2.0 ** (lg + lb)
        except OverflowError:
            val = math.inf
        return val if p.coef > 0 else -val

    def log2(self) -> float:
        p = self.simplify()
        if p.coef <= 0:
            raise ValueError("log of nonpositive")
        return _log2(p.coef) + _log2(p.base) * float(p.exp)

    # -- rounding --------------------------------------------------------
    def floor(self) -> int:
        return floor_of(self)

    def ceil(self) -> int:
        return -floor_of(-self)

    def enclosure(self, bits: int = 128) -> tuple[Fraction, Fraction]:
        """Rational lo <= self <= hi with hi - lo <= |coef| * 2**-bits-ish."""
        p = self.simplify()
        if p.exp == 0:
            return p.coef, p.coef
        return _term_interval(*_normalize(p, p.exp.denominator), bits)

    def to_json(self) -> dict:
        p = self.simplify()
        out = {
            "base": format_rational(p.base),
            "exp_num": p.exp.numerator,
            "exp_den": p.exp.denominator,
        }
        if p.coef != 1:
            out["coef"] = format_rational(p.coef)
        return out

    @classmethod
    def from_json(cls, obj) -> "Power":
        if isinstance(obj, str):
            return cls(1, 0, parse_rational(obj))
        coef = parse_rational(obj.get("coef", "1"))
        return cls(parse_rational(str(obj["base"])), Fraction(int(obj["exp_num"]), int(obj["exp_den"])), coef)

    def __repr__(self) -> str:
        p = self.simplify()
        if p.exp == 0:
            return f"Power({p.coef})"
        return f"Power({p.coef} * {p.base} ** {p.exp})"


Number = Union[int, Fraction, Power]


def _log2(x: Fraction) -> float:
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of nonpositive")
    return math.log2(x.numerator) - math.log2(x.denominator)


def as_power(x: Number) -> Power:
    if isinstance(x, Power):
        return x
    return Power(1, 0, Q(x))


def neg(x: Number) -> Number:
    return -x


def power(base: Rational, exp: Rational, coef: Rational = 1) -> Power:
    return Power(Q(base), Q(exp), Q(coef)).simplify()


# ---------------------------------------------------------------------------
# sign engine
# ---------------------------------------------------------------------------


def _normalize(p: Power, v: int) -> tuple[Fraction, Fraction, int]:
    """Write p as coef * m ** (1/v) with rational m > 0."""
    k = p.exp * v
    assert k.denominator == 1
    m = p.base ** int(k)
    return p.coef, m, v


def _term_interval(coef: Fraction, m: Fraction, v: int, bits: int) -> tuple[Fraction, Fraction]:
    # m**(1/v) = (a * b**(v-1)) ** (1/v) / b for m = a/b
    a, b = m.numerator, m.denominator
    n = a * b ** (v - 1)
    scaled = n << (bits * v)
    r, exact = gmpy2.iroot(gmpy2.mpz(scaled), v)
    r = int(r)
    den = b << bits
    lo = Fraction(r, den)
    hi = lo if exact else Fraction(r + 1, den)
    if coef >= 0:
        return coef * lo, coef * hi
    return coef * hi, coef * lo


def _collect(terms: Iterable[Number]) -> tuple[Fraction, dict[Fraction, Fraction], int]:
    """Reduce a sum of powers to rational + sum of c_m * m**(1/v)."""
    rational = Fraction(0)
    powers: list[Power] = []
    for t in terms:
        if isinstance(t, (int, Fraction)):
            rational += t
            continue
        p = t.simplify()
        if p.coef == 0:
            continue
        if p.exp == 0:
            rational += p.coef
        else:
            powers.append(p)
    if not powers:
        return rational, {}, 1
    v = reduce(math.lcm, (p.exp.denominator for p in powers), 1)
    radicals: dict[Fraction, Fraction] = {}
    for p in powers:
        coef, m, _ = _normalize(p, v)
        radicals[m] = radicals.get(m, Fraction(0)) + coef
    # merge radicands that are equal up to a rational v-th power factor is
    # not attempted; exact rational radicands are folded here
    out: dict[Fraction, Fraction] = {}
    for m, coef in radicals.items():
        if coef == 0:
            continue
        root = rational_root(m, v)
        if root is not None:
            rational += coef * root
        else:
            out[m] = out.get(m, Fraction(0)) + coef
    return rational, {m: c for m, c in out.items() if c != 0}, v


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def sign_of(terms: Iterable[Number]) -> int:
    """Exact sign of a finite sum of rationals and Powers."""
    rational, radicals, v = _collect(terms)
    if not radicals:
        return _sign(rational)
    if len(radicals) == 1:
        (m, coef), = radicals.items()
        s_r, s_c = _sign(rational), _sign(coef)
        if s_r == 0 or s_r == s_c:
            return s_c
        # rational + coef * m**(1/v) with opposite signs: compare magnitudes
        lhs = abs(coef) ** v * m
        rhs = abs(rational) ** v
        if lhs > rhs:
            return s_c
        if lhs < rhs:
            return s_r
        return 0
    return _sign_by_intervals(rational, radicals, v)


def _sign_by_intervals(rational: Fraction, radicals: dict[Fraction, Fraction], v: int) -> int:
    # Separation bound: E * Den is an algebraic integer of degree <= v**J whose
    # conjugates are bounded by M, so E != 0 implies |E| >= 1/(Den * M**(D-1)).
    den = rational.denominator
    for m, coef in radicals.items():
        den = math.lcm(den, coef.denominator * m.denominator)
    total = abs(rational) * den
    for m, coef in radicals.items():
        _, hi = _term_interval(abs(coef), m, v, 2)
        total += hi * den
    mag_bits = max(1, math.ceil(total).bit_length())
    degree = v ** len(radicals)
    zero_bits = (degree - 1) * mag_bits + den.bit_length() + 2

    bits = 64
    while True:
        lo = hi = rational
        for m, coef in radicals.items():
            tlo, thi = _term_interval(coef, m, v, bits)
            lo += tlo
            hi += thi
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bound = max(abs(lo), abs(hi))
        if bound < Fraction(1, 1 << zero_bits):
            return 0
        bits *= 2


def cmp(a: Number, b: Number) -> int:
    return sign_of([a, neg(b)])


def le(a: Number, b: Number) -> bool:
    return cmp(a, b) <= 0


def lt(a: Number, b: Number) -> bool:
    return cmp(a, b) < 0


def floor_of(x: Number) -> int:
    """Exact floor of a rational or Power."""
    if isinstance(x, (int, Fraction)):
        return math.floor(x)
    p = x.simplify()
    if p.exp == 0:
        return math.floor(p.coef)
    lo, hi = p.enclosure(64 + p.coef.numerator.bit_length() + p.coef.denominator.bit_length())
    f = math.floor(lo)
    while True:
        # f <= x ?  and x < f+1 ?
        if sign_of([p, -Fraction(f)]) < 0:
            f -= 1
            continue
        if sign_of([p, -Fraction(f + 1)]) >= 0:
            f += 1
            continue
        return f


def ceil_of(x: Number) -> int:
    return -floor_of(neg(x))


def enclose(x: Number, bits: int = 128) -> tuple[Fraction, Fraction]:
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return x, x
    p = x.simplify()
    if p.exp == 0:
        return p.coef, p.coef
    return p.enclosure(bits)


def to_float(x: Number) -> float:
    return float(x)


def number_to_json(x: Number):
    if isinstance(x, Power):
        p = x.simplify()
        if p.exp == 0:
            return format_rational(p.coef)
        return p.to_json()
    return format_rational(Q(x))


def number_from_json(obj) -> Number:
    if isinstance(obj, str):
        return parse_rational(obj)
    if isinstance(obj, int):
        return Fraction(obj)
    return Power.from_json(obj).simplify()
