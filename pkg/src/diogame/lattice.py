"""Exact lattice engine.

Bases are lists of row vectors with Fraction entries.  Reduction is exact
LLL (delta = 3/4), enumeration is Fincke-Pohst over a reduced basis of the
box-normalised lattice followed by an exact membership filter, so irrational
box bounds (``q ** r_i``) are supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import RationalPoint, Weight
from .errors import BudgetExceeded, HypothesisViolated, InternalSearchFailure
from .exact import (
    Number,
    Power,
    Q,
    enclose,
    format_rational,
    iroot_floor,
    number_to_json,
    sign_of,
)

Vector = tuple
Matrix = list

DEFAULT_NODE_BUDGET = 10**7
LLL_DELTA = Fraction(3, 4)


# ---------------------------------------------------------------------------
# linear algebra over Q
# ---------------------------------------------------------------------------


def det(M: Sequence[Sequence]) -> Fraction:
    A = [[Q(x) for x in row] for row in M]
    n = len(A)
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            result = -result
        p = A[col][col]
        result *= p
        for r in range(col + 1, n):
            f = A[r][col] / p
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return result


def inverse(M: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(M)
    A = [[Q(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[n:] for row in A]


def transpose(M):
    return [list(col) for col in zip(*M)]


def matmul(A, B):
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def vecmat(v, M):
    """Row vector times matrix."""
    n = len(M[0])
    out = [Fraction(0)] * n
    for vi, row in zip(v, M):
        if vi:
            for j in range(n):
                out[j] += vi * row[j]
    return out


def dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def supnorm(v) -> Fraction:
    return max((abs(Q(x)) for x in v), default=Fraction(0))


def sign_normalize(v: Sequence) -> tuple:
    for x in v:
        if x != 0:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def canonical_choice(candidates: Iterable[Sequence]) -> tuple:
    """Fixed tie-break: least sup-norm, sign with first nonzero positive, lex least."""
    best = None
    best_key = None
    for v in candidates:
        n = sign_normalize(v)
        key = (supnorm(n), n)
        if best_key is None or key < best_key:
            best, best_key = n, key
    if best is None:
        raise ValueError("no candidates")
    return best


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeBasis:
    basis: tuple[tuple[Fraction, ...], ...]
    covolume: Fraction

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "LatticeBasis":
        B = tuple(tuple(Q(x) for x in row) for row in rows)
        if len(B) == 0 or any(len(r) != len(B) for r in B):
            raise ValueError("basis must be a square matrix")
        vol = abs(det(B))
        if vol == 0:
            raise ValueError("singular basis")
        return cls(B, vol)

    @property
    def n(self) -> int:
        return len(self.basis)

    def rows(self) -> list[list[Fraction]]:
        return [list(r) for r in self.basis]

    def contains(self, x: Sequence) -> bool:
        coeffs = vecmat([Q(t) for t in x], inverse(self.basis))
        return all(c.denominator == 1 for c in coeffs)

    def to_json(self) -> dict:
        return {
            "basis": [[format_rational(x) for x in row] for row in self.basis],
            "covolume": format_rational(self.covolume),
        }


def hermite_rows(gens: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Upper-triangular integer basis of the row lattice spanned by gens."""
    rows = [list(g) for g in gens if any(g)]
    basis = []
    for col in range(n):
        active = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = []
            for r in active[1:]:
                f = r[col] // piv[col]
                r = [a - f * b for a, b in zip(r, piv)]
                if r[col] != 0:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            active = [piv] + nxt
        if not active:
            raise ValueError("generators do not span a full-rank lattice")
        piv = active[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        basis.append(piv)
        rows = rest
    # reduce entries above the diagonal
    for i in range(n):
        for k in range(i):
            f = basis[k][i] // basis[i][i]
            if f:
                basis[k] = [a - f * b for a, b in zip(basis[k], basis[i])]
    return basis


def lambda_basis(P: RationalPoint) -> LatticeBasis:
    """Basis of Z * p/q + Z^d, covolume 1/q."""
    d, q = P.d, P.q
    gens = [list(P.p)] + [[q * int(i == j) for j in range(d)] for i in range(d)]
    H = hermite_rows(gens, d)
    return LatticeBasis.from_rows([[Fraction(x, q) for x in row] for row in H])


def dual_basis(L: LatticeBasis) -> LatticeBasis:
    return LatticeBasis.from_rows(transpose(inverse(L.basis)))


def dual_lattice_basis(P: RationalPoint) -> LatticeBasis:
    """Basis of {a in Z^d : a.p = 0 mod q} in Hermite form."""
    return LatticeBasis.from_rows(hermite_rows([list(map(int, r)) for r in dual_basis(lambda_basis(P)).basis], P.d))


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------


def _gso(B):
    n = len(B)
    Bstar = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    norms = []
    for i in range(n):
        v = list(B[i])
        for j in range(i):
            mu[i][j] = dot(B[i], Bstar[j]) / norms[j]
            if mu[i][j]:
                v = [a - mu[i][j] * b for a, b in zip(v, Bstar[j])]
        Bstar.append(v)
        norms.append(dot(v, v))
    return Bstar, mu, norms


def _round(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def lll(rows: Sequence[Sequence], delta: Fraction = LLL_DELTA) -> tuple[list[list[Fraction]], list[list[int]]]:
    """Exact LLL.  Returns (reduced rows, U) with reduced = U * rows."""
    B = [[Q(x) for x in r] for r in rows]
    n = len(B)
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    if n == 1:
        return B, U
    if n == 2:
        return _lagrange(B, U)
    Bstar, mu, norms = _gso(B)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            m = _round(mu[k][j])
            if m:
                B[k] = [a - m * b for a, b in zip(B[k], B[j])]
                U[k] = [a - m * b for a, b in zip(U[k], U[j])]
                for i in range(j):
                    mu[k][i] -= m * mu[j][i]
                mu[k][j] -= m
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            Bstar, mu, norms = _gso(B)
            k = max(k - 1, 1)
    return B, U


def _lagrange(B, U):
    """Lagrange-Gauss reduction of a rank-2 basis (the result is also LLL-reduced).

    Runs on integer rows scaled by the common denominator.
    """
    D = math.lcm(*(x.denominator for r in B for x in r))
    b0, b1 = ([int(x * D) for x in r] for r in B)
    u0, u1 = U
    n0, n1 = _idot(b0, b0), _idot(b1, b1)
    if n1 < n0:
        b0, b1, u0, u1, n0, n1 = b1, b0, u1, u0, n1, n0
    while True:
        m = (2 * _idot(b0, b1) + n0) // (2 * n0)  # nearest integer, halves rounded up
        if m:
            b1 = [a - m * b for a, b in zip(b1, b0)]
            u1 = [a - m * b for a, b in zip(u1, u0)]
            n1 = _idot(b1, b1)
        if n1 >= n0:
            return [[Fraction(x, D) for x in b0], [Fraction(x, D) for x in b1]], [u0, u1]
        b0, b1, u0, u1, n0, n1 = b1, b0, u1, u0, n1, n0


def _idot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def reduce_basis(L: LatticeBasis) -> LatticeBasis:
    R, _ = lll(L.basis)
    return LatticeBasis(tuple(tuple(r) for r in R), L.covolume)


def same_lattice(A: LatticeBasis, B: LatticeBasis) -> bool:
    """Each basis expands integrally in the other."""
    return all(B.contains(r) for r in A.basis) and all(A.contains(r) for r in B.basis)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bound:
    """Interval constraint lo <(=) x <(=) hi on one coordinate."""

    lo: Number
    hi: Number
    closed_lo: bool = True
    closed_hi: bool = True

    @classmethod
    def symmetric(cls, A: Number, closed: bool = True) -> "Bound":
        return cls(-A, A, closed, closed)

    def admits(self, x: Fraction) -> bool:
        s = sign_of([x, -self.lo] if not isinstance(self.lo, Power) else [x, -self.lo])
        if s < 0 or (s == 0 and not self.closed_lo):
            return False
        s = sign_of([self.hi, -x])
        if s < 0 or (s == 0 and not self.closed_hi):
            return False
        return True

    def is_empty(self) -> bool:
        s = sign_of([self.hi, -self.lo])
        return s < 0 or (s == 0 and not (self.closed_lo and self.closed_hi))


def _sqrt_upper(x: Fraction) -> Fraction:
    """Rational upper bound for sqrt(x), x >= 0."""
    if x <= 0:
        return Fraction(0)
    n, d = x.numerator, x.denominator
    # sqrt(n/d) = sqrt(n*d)/d
    return Fraction(math.isqrt(n * d) + 1, d)


def _sqrt_lower(x: Fraction) -> Fraction:
    if x <= 0:
        return Fraction(0)
    n, d = x.numerator, x.denominator
    return Fraction(math.isqrt(n * d), d)


class _Counter:
    __slots__ = ("left", "used")

    def __init__(self, budget: int):
        self.left = budget
        self.used = 0

    def tick(self):
        self.used += 1
        self.left -= 1
        if self.left < 0:
            raise BudgetExceeded(f"enumeration node budget exhausted after {self.used} nodes")


def _fincke_pohst(R: list[list[Fraction]], target: list[Fraction], radius2: Fraction, counter: _Counter):
    """All integer v with |v R - target|^2 <= radius2."""
    n = len(R)
    _, mu, norms = _gso(R)
    # target in GSO coordinates
    Rinv = inverse(R)
    tau_b = vecmat(target, Rinv)  # target = tau_b R
    # convert to Gram-Schmidt coefficients: t = sum_i (tau_i + sum_{j>i} tau_j mu_ji) b*_i
    tau = [tau_b[i] + sum((tau_b[j] * mu[j][i] for j in range(i + 1, n)), Fraction(0)) for i in range(n)]
    out: list[list[int]] = []
    v = [0] * n

    def rec(i: int, rem: Fraction):
        counter.tick()
        c = tau[i] - sum((v[j] * mu[j][i] for j in range(i + 1, n)), Fraction(0))
        span = _sqrt_upper(rem / norms[i])
        lo = math.ceil(c - span)
        hi = math.floor(c + span)
        for vi in range(lo, hi + 1):
            used = (vi - c) ** 2 * norms[i]
            if used > rem:
                continue
            v[i] = vi
            if i == 0:
                out.append(list(v))
            else:
                rec(i - 1, rem - used)
        v[i] = 0

    rec(n - 1, radius2)
    return out


def enumerate_box(
    L: LatticeBasis,
    bounds: Sequence[Bound],
    budget: int = DEFAULT_NODE_BUDGET,
    with_coefficients: bool = False,
):
    """All lattice points x with every x_i inside bounds[i].

    Points are returned sorted lexicographically by their coefficient vector
    with respect to ``L.basis``.
    """
    n = L.n
    if len(bounds) != n:
        raise ValueError("one bound per coordinate required")
    if any(b.is_empty() for b in bounds):
        return []
    lo = [enclose(b.lo, 64)[0] for b in bounds]
    hi = [enclose(b.hi, 64)[1] for b in bounds]
    center = [(a + b) / 2 for a, b in zip(lo, hi)]
    half = [(b - a) / 2 for a, b in zip(lo, hi)]
    positive = [h for h in half if h > 0]
    floor_h = (min(positive) if positive else Fraction(1)) / 1024
    half = [h if h > 0 else floor_h for h in half]
    scaled = [[x / h for x, h in zip(row, half)] for row in L.basis]
    target = [c / h for c, h in zip(center, half)]
    R, U = lll(scaled)
    counter = _Counter(budget)
    coeff_red = _fincke_pohst(R, target, Fraction(n), counter)
    results = []
    for v in coeff_red:
        coeffs = [sum(vi * U[i][j] for i, vi in enumerate(v)) for j in range(n)]
        x = vecmat(coeffs, L.basis)
        if all(b.admits(xi) for b, xi in zip(bounds, x)):
            results.append((tuple(coeffs), tuple(x)))
    results.sort()
    if with_coefficients:
        return results
    return [x for _, x in results]


def minkowski_point(
    L: LatticeBasis,
    forms: Sequence[Sequence],
    A: Sequence[Number],
    budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[Fraction, ...]:
    """Nonzero x in L with |l_1(x)| <= A_1 and |l_i(x)| < A_i (i >= 2)."""
    F = [[Q(x) for x in row] for row in forms]
    detF = det(F)
    if detF == 0:
        raise ValueError("linear forms are not independent")
    prod: Number = Fraction(1)
    for a in A:
        if sign_of([a]) <= 0:
            raise HypothesisViolated("bounds must be positive")
        prod = a * prod if isinstance(a, Power) else (prod * a)
    if sign_of([prod, -(L.covolume * abs(detF))]) < 0:
        raise HypothesisViolated(
            f"A_1...A_d < covolume * |det| ({format_rational(L.covolume * abs(detF))})"
        )
    Ft = transpose(F)
    image = LatticeBasis.from_rows(matmul([list(r) for r in L.basis], Ft))
    bounds = [Bound.symmetric(A[0], True)] + [Bound.symmetric(a, False) for a in A[1:]]
    pts = enumerate_box(image, bounds, budget, with_coefficients=True)
    cands = [vecmat(list(c), L.basis) for c, y in pts if any(y)]
    if not cands:
        raise InternalSearchFailure("Minkowski search found no lattice point under a satisfied hypothesis")
    return canonical_choice(cands)


# ---------------------------------------------------------------------------
# attached data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualCert:
    a: tuple[int, ...]
    xi: int
    H: int
    C: int
    q: int = field(default=0, compare=False)

    def to_json(self) -> dict:
        return {
            "a": [str(x) for x in self.a],
            "xi": str(self.xi),
            "H": str(self.H),
            "C": str(self.C),
        }

    @classmethod
    def from_json(cls, obj, q: int = 0) -> "DualCert":
        return cls(tuple(int(x) for x in obj["a"]), int(obj["xi"]), int(obj["H"]), int(obj["C"]), q)


@dataclass(frozen=True)
class LineCert:
    w: tuple[Number, ...]
    psi: Power
    v: tuple[Fraction, ...]
    b: int
    z: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "w": [number_to_json(x) for x in self.w],
            "psi": number_to_json(self.psi),
            "v": [format_rational(x) for x in self.v],
            "b": str(self.b),
            "z": [str(x) for x in self.z],
        }


def weighted_bounds(P: RationalPoint, w: Weight) -> list[Power]:
    """q ** r_i, the sides of X_P."""
    return [Power(P.q, ri).simplify() for ri in w.r]


def _int_floor_root_power(q: int, r: Fraction) -> int:
    """floor(q ** r) for rational r >= 0."""
    return iroot_floor(q**r.numerator, r.denominator)


FAST_PATH_LIMIT = 20000


def _dual_candidates_congruence(P: RationalPoint, caps: list[int]) -> list[tuple[int, ...]]:
    """All nonzero a with |a_i| <= caps[i] and a.p = 0 mod q (direct search)."""
    d, q, p = P.d, P.q, P.p
    j = max(range(d), key=lambda i: (caps[i], i))
    g = math.gcd(p[j], q)
    qg = q // g
    inv = pow(p[j] // g, -1, qg) if qg > 1 else 0
    others = [i for i in range(d) if i != j]
    out = []
    ranges = [range(-caps[i], caps[i] + 1) for i in others]

    def rec(k: int, partial: list[int], acc: int):
        if k == len(others):
            rhs = (-acc) % q
            if rhs % g:
                return
            a0 = ((rhs // g) * inv) % qg if qg > 1 else 0
            # a_j = a0 + t*qg within [-caps[j], caps[j]]
            t_lo = -((caps[j] + a0) // qg)
            t_hi = (caps[j] - a0) // qg
            for t in range(t_lo, t_hi + 1):
                aj = a0 + t * qg
                vec = [0] * d
                for i, val in zip(others, partial):
                    vec[i] = val
                vec[j] = aj
                if any(vec):
                    out.append(tuple(vec))
            return
        i = others[k]
        for val in ranges[k]:
            partial.append(val)
            rec(k + 1, partial, acc + val * p[i])
            partial.pop()

    rec(0, [], 0)
    return out


def _min_supnorm_in_box(
    L: LatticeBasis,
    caps: Sequence[Number],
    floor_sup: Fraction,
    budget: int,
) -> list[tuple[Fraction, ...]]:
    """Nonzero lattice points of least sup-norm inside |x_i| <= caps[i]."""
    R, _ = lll(L.basis)
    n = L.n
    b1 = min(R, key=lambda r: dot(r, r))
    # lambda_1 >= |b1| / 2^((n-1)/2) and sup >= l2 / sqrt(n)
    t = max(floor_sup, _sqrt_lower(dot(b1, b1) / (2 ** (n - 1) * n)))
    cap_hi = max(enclose(c, 32)[1] for c in caps)
    # a reduced vector inside the caps bounds the answer from above: search once up to it
    feasible = [supnorm(r) for r in R if all(sign_of([abs(x), -c]) <= 0 for x, c in zip(r, caps))]
    if feasible:
        t = max(t, min(feasible))
    while True:
        bounds = [Bound.symmetric(_min_number(c, t)) for c in caps]
        pts = [x for x in enumerate_box(L, bounds, budget) if any(x)]
        if pts:
            m = min(supnorm(x) for x in pts)
            return [x for x in pts if supnorm(x) == m]
        if t > cap_hi:
            return []
        t *= 2


def _min_number(a: Number, b: Fraction) -> Number:
    return a if sign_of([a, -b]) <= 0 else b


def attach_dual(P: RationalPoint, w: Weight, budget: int = DEFAULT_NODE_BUDGET) -> DualCert:
    """Choose a_P in X_P by the fixed tie-break and derive xi, H, C."""
    if P.d != w.d:
        raise ValueError("dimension mismatch")
    caps = [_int_floor_root_power(P.q, ri) for ri in w.r]
    j = max(range(P.d), key=lambda i: caps[i])
    work = 1
    for i, c in enumerate(caps):
        if i != j:
            work *= 2 * c + 1
    if work <= FAST_PATH_LIMIT:
        cands = _dual_candidates_congruence(P, caps)
    else:
        L = dual_lattice_basis(P)
        cands = _min_supnorm_in_box(L, [Fraction(c) for c in caps], Fraction(1), budget)
        cands = [tuple(int(x) for x in v) for v in cands]
    if not cands:
        raise InternalSearchFailure(f"X_P empty for P={P}")
    a = canonical_choice(cands)
    return _make_dual(P, a)


def attach_dual_general(P: RationalPoint, w: Weight, budget: int = DEFAULT_NODE_BUDGET) -> DualCert:
    """attach_dual through reduced-basis enumeration only (no congruence fast path)."""
    caps = [_int_floor_root_power(P.q, ri) for ri in w.r]
    L = dual_lattice_basis(P)
    cands = _min_supnorm_in_box(L, [Fraction(c) for c in caps], Fraction(1), budget)
    if not cands:
        raise InternalSearchFailure(f"X_P empty for P={P}")
    return _make_dual(P, tuple(int(x) for x in canonical_choice(cands)))


def _make_dual(P: RationalPoint, a: Sequence[int]) -> DualCert:
    a = tuple(int(x) for x in a)
    s = sum(ai * pi for ai, pi in zip(a, P.p))
    if s % P.q:
        raise InternalSearchFailure("chosen vector is not in the dual lattice")
    xi = max(abs(x) for x in a)
    return DualCert(a, xi, P.q * xi, -s // P.q, P.q)


def eval_F(cert: DualCert, x: Sequence) -> Fraction:
    return sum((ai * Q(xi) for ai, xi in zip(cert.a, x)), Fraction(0)) + cert.C


def psi_value(P: RationalPoint, cert: DualCert, w: Weight) -> Power:
    """q ** (-1 - s) * H(P)."""
    return Power(P.q, -1 - w.s, cert.H).simplify()


def line_bounds(P: RationalPoint, w: Weight, psi: Power) -> tuple[list[Number], list[Number]]:
    d = P.d
    weights: list[Number] = [Fraction(1)] * d
    weights[w.i0_index] = psi
    caps = []
    for i in range(d):
        cap = Power(P.q, -w.r[i], d - 1).simplify()
        caps.append((cap * weights[i]).simplify() if isinstance(weights[i], Power) else cap)
    return weights, caps


def _bezout(values: Sequence[int]) -> tuple[int, list[int]]:
    """g, coefficients with sum c_i * values_i = g = gcd(values)."""
    g, coeffs = 0, [0] * len(values)
    for i, v in enumerate(values):
        if g == 0:
            g, coeffs = abs(v), [0] * len(values)
            coeffs[i] = 1 if v >= 0 else -1
            continue
        # extended gcd of g and v
        old_r, r = g, v
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            qt = old_r // r
            old_r, r = r, old_r - qt * r
            old_s, s = s, old_s - qt * s
            old_t, t = t, old_t - qt * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        coeffs = [c * old_s for c in coeffs]
        coeffs[i] += old_t
        g = old_r
    return g, coeffs


def lambda_decompose(P: RationalPoint, v: Sequence[Fraction]) -> tuple[int, tuple[int, ...]]:
    """(b, z) with v = b p/q + z, or ValueError if v is not in Lambda_P."""
    q, p = P.q, P.p
    u = [Q(x) * q for x in v]
    if any(x.denominator != 1 for x in u):
        raise ValueError("vector not in Lambda_P")
    u = [int(x) for x in u]
    g, coeffs = _bezout(list(p) + [q])
    assert g == 1
    b = sum(c * ui for c, ui in zip(coeffs[:-1], u)) % q
    z = []
    for ui, pi in zip(u, p):
        num = ui - b * pi
        if num % q:
            raise ValueError("vector not in Lambda_P")
        z.append(num // q)
    return b, tuple(z)


def attach_line(
    P: RationalPoint,
    w: Weight,
    cert: DualCert,
    budget: int = DEFAULT_NODE_BUDGET,
) -> LineCert:
    psi = psi_value(P, cert, w)
    weights, caps = line_bounds(P, w, psi)
    L = lambda_basis(P)
    cands = _min_supnorm_in_box(L, caps, Fraction(1, P.q), budget)
    if not cands:
        raise InternalSearchFailure(f"no v in Lambda_P satisfying the line bounds for P={P}")
    v = canonical_choice(cands)
    b, z = lambda_decompose(P, v)
    return LineCert(tuple(weights), psi, tuple(v), b, z)


def line_cert_holds(P: RationalPoint, w: Weight, cert: DualCert, line: LineCert) -> bool:
    """Check |v_i| <= (d-1) w_i q^{-r_i} exactly and v in Lambda_P minus 0."""
    _, caps = line_bounds(P, w, psi_value(P, cert, w))
    if not any(line.v):
        return False
    if any(sign_of([abs(x), -c]) > 0 for x, c in zip(line.v, caps)):
        return False
    b, z = line.b, line.z
    return all(Fraction(b * pi, P.q) + zi == vi for pi, zi, vi in zip(P.p, z, line.v))


def dual_cert_holds(P: RationalPoint, w: Weight, cert: DualCert) -> list[str]:
    """Names of violated DualCert invariants (empty when all hold)."""
    bad = []
    a = cert.a
    if not any(a):
        bad.append("a nonzero")
    if sum(x * y for x, y in zip(a, P.p)) % P.q:
        bad.append("a in dual lattice")
    for ai, ri in zip(a, w.r):
        if sign_of([Fraction(abs(ai)), -Power(P.q, ri)]) > 0:
            bad.append("|a_i| <= q^r_i")
            break
    if cert.xi != max(abs(x) for x in a):
        bad.append("xi = max |a_i|")
    if cert.H != P.q * cert.xi:
        bad.append("H = q xi")
    if sign_of([Fraction(cert.xi), -Power(P.q, w.s)]) > 0:
        bad.append("xi <= q^s")
    if sign_of([Fraction(cert.H), -Power(P.q, 1 + w.s)]) > 0:
        bad.append("H <= q^(1+s)")
    if cert.C * P.q != -sum(x * y for x, y in zip(a, P.p)):
        bad.append("C = -(a.p)/q")
    return bad
