"""Diagonal-flow orbit of u_x Z^{d+1} and a certified shortest-vector probe.

Entries are closed intervals with rational endpoints.  When e^t is supplied
as a rational, e^{r_i t} = (e^t)^{r_i} is enclosed through exact integer
roots; otherwise mpmath interval exponentials are used.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .certify import AlgebraicNumber
from .core import Weight
from .decomposition import _workers
from .errors import PrecisionExhausted
from .exact import Power, Q, format_rational, rational_root
from .lattice import _Counter, _fincke_pohst, inverse, lll

DEFAULT_BITS = 128


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @classmethod
    def point(cls, x) -> "Interval":
        x = Q(x)
        return cls(x, x)

    def __add__(self, o: "Interval") -> "Interval":
        return Interval(self.lo + o.lo, self.hi + o.hi)

    def __sub__(self, o: "Interval") -> "Interval":
        return Interval(self.lo - o.hi, self.hi - o.lo)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, o) -> "Interval":
        if not isinstance(o, Interval):
            o = Interval.point(o)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def square(self) -> "Interval":
        if self.lo >= 0:
            return Interval(self.lo**2, self.hi**2)
        if self.hi <= 0:
            return Interval(self.hi**2, self.lo**2)
        return Interval(Fraction(0), max(self.lo**2, self.hi**2))

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def rad(self) -> Fraction:
        return (self.hi - self.lo) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= Q(x) <= self.hi

    def overlaps(self, o: "Interval") -> bool:
        return self.lo <= o.hi and o.lo <= self.hi

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}

    def __float__(self) -> float:
        return float(self.mid)


def sqrt_interval(x: Interval, bits: int) -> Interval:
    """Enclosure of sqrt over x (x >= 0), exact at perfect rational squares."""
    lo, hi = max(x.lo, Fraction(0)), x.hi
    scale = 4**bits
    if lo == hi:
        r = rational_root(lo, 2)
        if r is not None:
            return Interval(r, r)
    n_lo = math.floor(lo * scale)
    n_hi = math.ceil(hi * scale)
    a = Fraction(math.isqrt(n_lo), 2**bits)
    r = math.isqrt(n_hi)
    b = Fraction(r if r * r == n_hi else r + 1, 2**bits)
    return Interval(a, b)


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    v = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -v if sign else v


def _exp_interval(t: Fraction, bits: int) -> Interval:
    iv = mpmath.iv
    old = iv.prec
    iv.prec = bits + 16
    try:
        e = iv.exp(iv.mpf(t.numerator) / iv.mpf(t.denominator))
    finally:
        iv.prec = old
    a, b = e._mpi_
    return Interval(_raw_to_fraction(a), _raw_to_fraction(b))


@dataclass(frozen=True)
class FlowTime:
    """Either an exact rational e^t (``et``) or a rational t."""

    et: Fraction | None = None
    t: Fraction | None = None

    def __post_init__(self):
        if (self.et is None) == (self.t is None):
            raise ValueError("give exactly one of et, t")
        if self.et is not None and Q(self.et) < 1:
            raise ValueError("e^t must be >= 1 (t >= 0)")
        if self.t is not None and Q(self.t) < 0:
            raise ValueError("t must be nonnegative")

    def scale(self, r: Fraction, bits: int) -> Interval:
        """Enclosure of e^{r t}."""
        r = Q(r)
        if self.et is not None:
            p = Power(Q(self.et), r).simplify()
            if p.is_rational():
                return Interval.point(p.rational())
            lo, hi = p.enclosure(bits)
            return Interval(lo, hi)
        return _exp_interval(r * Q(self.t), bits)

    def to_json(self) -> dict:
        return {"et": format_rational(Q(self.et))} if self.et is not None else {"t": format_rational(Q(self.t))}


def flow_matrix(w: Weight, time: FlowTime, bits: int = DEFAULT_BITS) -> list[list[Interval]]:
    d = w.d
    diag = [time.scale(ri, bits) for ri in w.r] + [time.scale(Fraction(-1), bits)]
    zero = Interval.point(0)
    return [[diag[i] if i == j else zero for j in range(d + 1)] for i in range(d + 1)]


def _coord_interval(x, bits: int) -> Interval:
    if isinstance(x, AlgebraicNumber):
        lo, hi = x.enclosure(bits)
        return Interval(lo, hi)
    return Interval.point(x)


@dataclass
class OrbitLattice:
    x: tuple
    w: Weight
    time: FlowTime
    bits: int
    scales: list[Interval]  # e^{r_i t} for i < d, then e^{-t}
    coords: list[Interval]
    basis: list[list[Interval]]  # rows: images of e_1..e_{d+1}

    @property
    def n(self) -> int:
        return len(self.basis)

    def det_enclosure(self) -> Interval:
        out = Interval.point(1)
        for g in self.scales:
            out = out * g
        return out

    def apply(self, v: Sequence[int]) -> list[Interval]:
        # combine the integer coefficients before scaling to avoid interval dependency
        d = self.n - 1
        out = [self.scales[i] * (Interval.point(v[i]) + self.coords[i] * v[d]) for i in range(d)]
        out.append(self.scales[d] * v[d])
        return out


def orbit_lattice(x: Sequence, w: Weight, time: FlowTime, bits: int = DEFAULT_BITS) -> OrbitLattice:
    d = w.d
    if len(x) != d:
        raise ValueError("dimension mismatch")
    scales = [time.scale(ri, bits) for ri in w.r] + [time.scale(Fraction(-1), bits)]
    xs = [_coord_interval(xi, bits + 8) for xi in x]
    zero = Interval.point(0)
    rows: list[list[Interval]] = []
    for j in range(d):
        rows.append([scales[i] if i == j else zero for i in range(d)] + [zero])
    rows.append([scales[i] * xs[i] for i in range(d)] + [scales[d]])
    return OrbitLattice(tuple(x), w, time, bits, scales, xs, rows)


def norm_interval(v: Sequence[Interval], bits: int) -> Interval:
    s = Interval.point(0)
    for c in v:
        s = s + c.square()
    return sqrt_interval(s, bits)


@dataclass(frozen=True)
class ShortestVector:
    enclosure: Interval
    witness: tuple[int, ...]
    candidates: int

    def to_json(self) -> dict:
        return {"lambda1": self.enclosure.to_json(), "witness": list(self.witness), "candidates": self.candidates}


def _frobenius_upper(M: Iterable[Iterable[Fraction]]) -> Fraction:
    s = sum((Q(x) ** 2 for row in M for x in row), Fraction(0))
    return sqrt_interval(Interval.point(s), 64).hi


def shortest_vector(L: OrbitLattice, node_budget: int = 10**6, max_bits: int = 2048) -> ShortestVector:
    """Certified enclosure of lambda_1 with an integer witness.

    Every nonzero lattice vector no longer than the best reduced-row upper
    bound has midpoint-basis length below r~ = U / (1 - eps'), where
    eps' = ||B~^-1||_F ||E||_F bounds the relative basis error; all of them
    are enumerated.
    """
    bits = L.bits
    while True:
        mid = [[e.mid for e in row] for row in L.basis]
        err = _frobenius_upper([[e.rad for e in row] for row in L.basis])
        inv_norm = _frobenius_upper(inverse(mid))
        eps = inv_norm * err
        if eps < Fraction(1, 2):
            break
        if bits >= max_bits:
            raise PrecisionExhausted(f"basis enclosure too wide at {bits} bits")
        bits *= 2
        L = orbit_lattice(L.x, L.w, L.time, bits)
    red, U = lll(mid)
    upper = min(norm_interval(L.apply(u), bits).hi for u in U)
    radius2 = (upper / (1 - eps)) ** 2
    counter = _Counter(node_budget)
    coeffs = _fincke_pohst(red, [Fraction(0)] * L.n, radius2, counter)
    best = None
    lo_all = None
    count = 0
    for c in coeffs:
        if not any(c):
            continue
        v = [sum(ci * U[i][j] for i, ci in enumerate(c)) for j in range(L.n)]
        nv = norm_interval(L.apply(v), bits)
        count += 1
        lo_all = nv.lo if lo_all is None else min(lo_all, nv.lo)
        cv = _canon(v)
        key = (nv.hi, cv[::-1])
        if best is None or key < best[0]:
            best = (key, cv, nv)
    if best is None:
        raise PrecisionExhausted("enumeration found no nonzero vector")
    return ShortestVector(Interval(lo_all, best[2].hi), best[1], count)


def _canon(v: Sequence[int]) -> tuple[int, ...]:
    # last nonzero entry positive
    for x in reversed(v):
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


@dataclass(frozen=True)
class ProfilePoint:
    time: FlowTime
    lambda1: Interval
    witness: tuple[int, ...]

    def to_json(self) -> dict:
        return dict(self.time.to_json(), lambda1=self.lambda1.to_json(), witness=list(self.witness))


def _profile_point(args) -> ProfilePoint | str:
    x, w, ft, bits = args
    try:
        sv = shortest_vector(orbit_lattice(x, w, ft, bits))
    except PrecisionExhausted as exc:
        return f"{ft.to_json()}: {exc}"
    return ProfilePoint(ft, sv.enclosure, sv.witness)


def _log_key(ft: FlowTime) -> float:
    return math.log(Q(ft.et)) if ft.et is not None else float(Q(ft.t))


def boundedness_profile(
    x: Sequence, w: Weight, grid: Sequence[FlowTime], bits: int = DEFAULT_BITS, workers: int | None = None
) -> tuple[list[ProfilePoint], Interval | None, list[str]]:
    """lambda_1 enclosures along the grid, their minimum, and any precision failures."""
    keys = [_log_key(ft) for ft in grid]
    if any(a >= b for a, b in zip(keys, keys[1:])):
        raise ValueError("time grid must be strictly increasing")
    jobs = [(tuple(x), w, ft, bits) for ft in grid]
    nw = _workers(workers)
    if nw > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=nw) as ex:
            results = list(ex.map(_profile_point, jobs))
    else:
        results = [_profile_point(j) for j in jobs]
    points = [r for r in results if isinstance(r, ProfilePoint)]
    failures = [r for r in results if isinstance(r, str)]
    if not points:
        return points, None, failures
    m = Interval(min(p.lambda1.lo for p in points), min(p.lambda1.hi for p in points))
    return points, m, failures
