"""Game constants, the height/denominator decomposition of rational points,
maximal points, critical sets and barrier hyperplanes.
"""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import kernels
from .core import Ball, RationalPoint, Weight, ball_box_intersects, box_strictly_nested, delta_box
from .errors import (
    BadParameters,
    BudgetExceeded,
    EmptyCritical,
    InternalSearchFailure,
    OutOfRange,
)
from .exact import Number, Power, Q, ceil_of, format_rational, number_to_json, sign_of
from .lattice import Bound, DualCert, LatticeBasis, attach_dual, enumerate_box, eval_F, psi_value

PAPER = "paper-exact"
CUSTOM = "custom"
DEFAULT_MAXIMAL_BOUND = 10**6


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def _r_budget_holds(R: Fraction, beta: Fraction, gamma: Fraction) -> bool:
    """(R^g - 1)^(-1) <= (beta^2/2)^g, i.e. R^g >= 1 + (2/beta^2)^g."""
    return sign_of([Power(R, gamma), Fraction(-1), -Power(2 / beta**2, gamma)]) >= 0


def smallest_integer_R(beta: Fraction, gamma: Fraction) -> int:
    hi = 2
    while not _r_budget_holds(Fraction(hi), beta, gamma):
        hi *= 2
    lo = hi // 2  # fails (or is 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _r_budget_holds(Fraction(mid), beta, gamma):
            hi = mid
        else:
            lo = mid
    return hi


def paper_c(d: int, rho0: Fraction, R: Fraction) -> Fraction:
    return Fraction(1, 8 * d * d) * rho0 / Fraction(R) ** (18 * d * d)


@dataclass(frozen=True)
class GameConstants:
    d: int
    rho0: Fraction
    beta: Fraction
    gamma: Fraction
    R: Fraction
    c: Fraction
    mode: str = PAPER
    violations: tuple[str, ...] = ()

    def H(self, n: int) -> Fraction:
        return self.d * self.c / self.rho0 * self.R**n

    def Q(self, n: int, k: int, w: Weight) -> Power:
        """Lower denominator end of class (n, k)."""
        base = Power(self.H(n), 1 / (1 + w.s))
        if k == 1:
            return base.simplify()
        return (base * self.R ** (self.d * (k - 2) + 12 * self.d**2)).simplify()

    def band_radius(self, n: int) -> Fraction:
        return self.rho0 / self.R**n

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "rho0": format_rational(self.rho0),
            "beta": format_rational(self.beta),
            "gamma": format_rational(self.gamma),
            "R": format_rational(self.R),
            "c": format_rational(self.c),
            "c_power": number_to_json(Power(self.R, -18 * self.d**2, self.c * self.R ** (18 * self.d**2))),
            "mode": self.mode,
            "violations": list(self.violations),
        }


def constant_violations(d: int, rho0: Fraction, beta: Fraction, gamma: Fraction, R: Fraction, c: Fraction) -> list[str]:
    """Named conditions of the paper-exact regime that fail for these values."""
    bad = []
    if not _r_budget_holds(R, beta, gamma):
        bad.append("R-budget: (R^gamma-1)^-1 <= (beta^2/2)^gamma")
    if not R > 2 / beta**2:
        bad.append("R-large: R > 2 beta^-2")
    if c != paper_c(d, rho0, R):
        bad.append("c-formula: c = d^-2 rho0 R^(-18 d^2) / 8")
    if not d * c / rho0 * R < 1:
        bad.append("H1<1: every rational point has a class")
    if not 3 * d * d * R ** (12 * d * d + 2) * c < 1:
        bad.append("k1-integrality: 3 d^2 R^(12d^2+2) c < 1")
    return bad


def derive_constants(
    d: int,
    rho0=1,
    beta=Fraction(1, 2),
    gamma=1,
    mode: str = PAPER,
    R=None,
    c=None,
) -> GameConstants:
    rho0, beta, gamma = Q(rho0), Q(beta), Q(gamma)
    if d < 1:
        raise BadParameters("d must be >= 1")
    if not 0 < rho0 <= 1:
        raise BadParameters(f"rho0 must lie in (0,1], got {format_rational(rho0)}")
    if not 0 < beta < 1:
        raise BadParameters(f"beta must lie in (0,1), got {format_rational(beta)}")
    if gamma <= 0:
        raise BadParameters(f"gamma must be positive, got {format_rational(gamma)}")
    if mode == PAPER:
        if R is not None or c is not None:
            raise BadParameters("R and c are derived in paper-exact mode")
        Rv = Fraction(smallest_integer_R(beta, gamma))
        cv = paper_c(d, rho0, Rv)
        if not Rv > 2 / beta**2:
            raise InternalSearchFailure("derived R violates R > 2/beta^2")
        return GameConstants(d, rho0, beta, gamma, Rv, cv, PAPER, ())
    if mode != CUSTOM:
        raise BadParameters(f"unknown constants mode {mode!r}")
    if R is None or c is None:
        raise BadParameters("custom mode needs both R and c")
    Rv, cv = Q(R), Q(c)
    if Rv <= 1:
        raise BadParameters("R must exceed 1")
    if cv <= 0:
        raise BadParameters("c must be positive")
    if not Rv > 1 / beta:
        raise BadParameters("R must exceed 1/beta so ball bands are disjoint")
    return GameConstants(d, rho0, beta, gamma, Rv, cv, CUSTOM, tuple(constant_violations(d, rho0, beta, gamma, Rv, cv)))


# ---------------------------------------------------------------------------
# classes
# ---------------------------------------------------------------------------


def _log_floor(X: Fraction, base: Fraction) -> int:
    """Largest integer m with base**m <= X (base > 1, X > 0)."""
    X, base = Q(X), Q(base)
    lx = math.log2(X.numerator) - math.log2(X.denominator)
    lb = math.log2(base.numerator) - math.log2(base.denominator)
    m = math.floor(lx / lb)
    while base**m > X:
        m -= 1
    while base ** (m + 1) <= X:
        m += 1
    return m


def ball_class(B: Ball, gc: GameConstants) -> int | None:
    n = _log_floor(gc.rho0 / B.radius, gc.R)
    if n < 1:
        return None
    return n if gc.beta * gc.band_radius(n) < B.radius else None


@dataclass(frozen=True, order=True)
class ClassIndex:
    n: int
    k: int

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k}


def height_class(H: int, gc: GameConstants) -> int:
    """n with H_n <= H < H_{n+1}."""
    return _log_floor(Fraction(H) / gc.H(0), gc.R)


def k_of(q: int, n: int, gc: GameConstants, w: Weight) -> int:
    # q >= H_n^(1/(1+s)) R^m  <=>  q^u >= H_n^v R^(m u)  with 1+s = u/v
    e = 1 + w.s
    u, v = e.numerator, e.denominator
    X = Fraction(q) ** u / gc.H(n) ** v
    if X < 1:
        raise OutOfRange(f"q={q} lies below the class-{n} denominator floor")
    m = _log_floor(X, gc.R**u)
    shift = 12 * gc.d**2
    if m < shift:
        return 1
    return 2 + (m - shift) // gc.d


def point_class(P: RationalPoint, cert: DualCert, gc: GameConstants, w: Weight) -> ClassIndex:
    if Fraction(cert.H) < gc.H(1):
        raise OutOfRange(f"H(P)={cert.H} below H_1={format_rational(gc.H(1))}")
    n = height_class(cert.H, gc)
    k = k_of(P.q, n, gc, w)
    if gc.mode == PAPER and k >= n:
        raise InternalSearchFailure(f"class ({n},{k}) with k >= n at P={P}")
    return ClassIndex(n, k)


def psi(P: RationalPoint, cert: DualCert, w: Weight) -> Power:
    return psi_value(P, cert, w)


def psi_bound_holds(psi_val: Power, gc: GameConstants, k: int) -> bool:
    """psi <= R^(-d k - 10 d^2)."""
    return sign_of([psi_val, -Power(gc.R, -gc.d * k - 10 * gc.d**2)]) <= 0


# ---------------------------------------------------------------------------
# partial order and maximal points
# ---------------------------------------------------------------------------


def is_less(P: RationalPoint, P2: RationalPoint, gc: GameConstants, w: Weight) -> bool:
    if P2.q > P.q:
        return False
    return box_strictly_nested(delta_box(P, gc.c, w), delta_box(P2, gc.c, w))


def dominators(P: RationalPoint, gc: GameConstants, w: Weight, bound: int = DEFAULT_MAXIMAL_BOUND, first: bool = False):
    """All P' with P < P' (or the first one found when ``first``)."""
    if P.q > bound:
        raise BudgetExceeded(f"maximality search needs q <= {bound}, got q={P.q}")
    x = P.coords()
    out = []
    for qp in kernels.dominator_scan(P.q, P.p, [float(r) for r in w.r], float(gc.c)):
        windows = []
        for xi in x:
            centre = qp * xi
            reach = gc.c + 1  # c * qp^(-r_i) <= c; one extra for float rounding slack
            windows.append(range(math.ceil(centre - reach), math.floor(centre + reach) + 1))
        for cand in _product(windows):
            if math.gcd(qp, *cand) != 1:
                continue
            P2 = RationalPoint(qp, tuple(cand))
            if is_less(P, P2, gc, w):
                if first:
                    return [P2]
                out.append(P2)
    return out


def _product(ranges):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for tail in _product(ranges[1:]):
            yield (head,) + tail


def is_maximal(P: RationalPoint, gc: GameConstants, w: Weight, bound: int = DEFAULT_MAXIMAL_BOUND) -> bool:
    return not dominators(P, gc, w, bound, first=True)


def maximal_cover(P: RationalPoint, gc: GameConstants, w: Weight, bound: int = DEFAULT_MAXIMAL_BOUND) -> RationalPoint:
    """Chase the order upward to a maximal point above P."""
    cur = P
    while True:
        up = dominators(cur, gc, w, bound)
        if not up:
            return cur
        # the largest box above is itself maximal-or-closer; pick least q then lex
        cur = min(up)


# ---------------------------------------------------------------------------
# critical sets
# ---------------------------------------------------------------------------


def q_range(m: int, k: int, gc: GameConstants, w: Weight) -> tuple[int, int]:
    """Inclusive denominator range of class (m, k); empty when lo > hi."""
    lo = max(1, ceil_of(gc.Q(m, k, w)))
    hi_k = ceil_of(gc.Q(m, k + 1, w)) - 1
    # q <= H(P) < H_{m+1}
    H_next = gc.H(m + 1)
    hi_h = math.ceil(H_next) - 1
    return lo, min(hi_k, hi_h)


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("DIOGAME_WORKERS")
    return max(1, int(env)) if env else 1


def _scan_q(args):
    B, m, k, gc, w, q_lo, q_hi, maximal_bound = args
    found = []
    for q in range(q_lo, q_hi + 1):
        windows = []
        for y in B.center:
            lo = math.ceil(q * (y - B.radius) - gc.c)
            hi = math.floor(q * (y + B.radius) + gc.c)
            windows.append(range(lo, hi + 1))
        for p in _product(windows):
            if math.gcd(q, *p) != 1:
                continue
            P = RationalPoint(q, p)
            if not ball_box_intersects(B, delta_box(P, gc.c, w)):
                continue
            cert = attach_dual(P, w)
            try:
                cls = point_class(P, cert, gc, w)
            except OutOfRange:
                continue
            if cls != ClassIndex(m, k):
                continue
            if is_maximal(P, gc, w, maximal_bound):
                found.append(P)
    return found


def critical_points(
    B: Ball,
    n: int,
    k: int,
    gc: GameConstants,
    w: Weight,
    budget: int = 10**6,
    workers: int | None = None,
    maximal_bound: int = DEFAULT_MAXIMAL_BOUND,
) -> list[RationalPoint]:
    """Maximal points of class (n+k, k) whose box meets B, sorted by (q, p)."""
    lo, hi = q_range(n + k, k, gc, w)
    if lo > hi:
        return []
    if hi - lo + 1 > budget:
        raise BudgetExceeded(f"denominator range [{lo}, {hi}] exceeds budget {budget}", partial=(lo, hi))
    return critical_points_in(B, n, k, gc, w, lo, hi, workers, maximal_bound)


def critical_points_in(
    B: Ball,
    n: int,
    k: int,
    gc: GameConstants,
    w: Weight,
    lo: int,
    hi: int,
    workers: int | None = None,
    maximal_bound: int = DEFAULT_MAXIMAL_BOUND,
) -> list[RationalPoint]:
    """critical_points restricted to denominators lo..hi."""
    m = n + k
    nw = _workers(workers)
    if nw == 1 or hi - lo < 64:
        out = _scan_q((B, m, k, gc, w, lo, hi, maximal_bound))
    else:
        step = (hi - lo + nw) // nw
        chunks = [(B, m, k, gc, w, a, min(hi, a + step - 1), maximal_bound) for a in range(lo, hi + 1, step)]
        with ProcessPoolExecutor(nw) as ex:
            out = [P for part in ex.map(_scan_q, chunks) for P in part]
    return sorted(out)


def class_points_meeting(
    B: Ball,
    m: int,
    k: int,
    gc: GameConstants,
    w: Weight,
    budget: int = 10**6,
) -> list[tuple[RationalPoint, DualCert]]:
    """Every canonical point of class (m, k) whose box meets B, maximal or not.

    Integer vectors (q, p) are enumerated in the box q in the class range,
    |p_i - q y_i| <= q_hi rho + c, which contains the cone over B widened
    by the largest possible box (q times its halfwidth is at most c); the exact filters follow.
    """
    lo, hi = q_range(m, k, gc, w)
    if lo > hi:
        return []
    d = gc.d
    y = B.center
    rows = [[Fraction(1)] + [-yi for yi in y]]
    rows += [[Fraction(0)] * (i + 1) + [Fraction(1)] + [Fraction(0)] * (d - 1 - i) for i in range(d)]
    L = LatticeBasis.from_rows(rows)
    spread = hi * B.radius + gc.c
    bounds = [Bound(Fraction(lo), Fraction(hi))] + [Bound.symmetric(spread)] * d
    out = []
    for coeffs, _ in enumerate_box(L, bounds, budget, with_coefficients=True):
        q, p = coeffs[0], tuple(coeffs[1:])
        if math.gcd(q, *p) != 1:
            continue
        P = RationalPoint(q, p)
        if not ball_box_intersects(B, delta_box(P, gc.c, w)):
            continue
        cert = attach_dual(P, w)
        if Fraction(cert.H) < gc.H(1):
            continue
        if point_class(P, cert, gc, w) == ClassIndex(m, k):
            out.append((P, cert))
    return sorted(out)


@dataclass(frozen=True)
class Barrier:
    """Hyperplane {a.x + C = 0} of the least-denominator critical point, with slab halfwidth."""

    point: RationalPoint
    cert: DualCert
    halfwidth: Fraction

    def to_json(self) -> dict:
        return {
            "point": self.point.to_json(),
            "cert": self.cert.to_json(),
            "halfwidth": format_rational(self.halfwidth),
        }


def barrier_hyperplane(C: Sequence[RationalPoint], n: int, k: int, gc: GameConstants, w: Weight) -> Barrier:
    if not C:
        raise EmptyCritical(f"no critical points for n={n}, k={k}")
    P = min(C)  # least q, then lexicographic numerators
    return Barrier(P, attach_dual(P, w), gc.band_radius(n + k))


# ---------------------------------------------------------------------------
# slab coverage of box-ball intersections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Coverage:
    verdict: str  # "covered" | "violated" | "undecided"
    method: str
    witness: tuple[Fraction, ...] | None = None


def _norm(a: Sequence[int]) -> Power:
    return Power(sum(x * x for x in a), Fraction(1, 2)).simplify()


def slab_covers(
    P: RationalPoint,
    B: Ball,
    a: Sequence[int],
    C: int | Fraction,
    delta: Fraction,
    gc: GameConstants,
    w: Weight,
    samples: int = 400,
    rng: random.Random | None = None,
) -> Coverage:
    """Decide whether Delta_c(P) meets B only inside {x : |a.x + C| <= delta |a|}."""
    box = delta_box(P, gc.c, w)
    if not ball_box_intersects(B, box):
        return Coverage("covered", "empty")
    a = [int(x) for x in a]
    norm = _norm(a)
    reach = delta * norm if isinstance(norm, Fraction) else norm * delta
    F_P = abs(sum(ai * xi for ai, xi in zip(a, P.coords())) + C)
    terms: list[Number] = [F_P, -reach]
    terms += [h * abs(ai) for ai, h in zip(a, box.halfwidth) if ai]
    if sign_of(terms) <= 0:
        return Coverage("covered", "box")
    F_y = abs(sum(ai * yi for ai, yi in zip(a, B.center)) + C)
    if sign_of([F_y, norm * B.radius, -reach]) <= 0:
        return Coverage("covered", "ball")
    # look for a rational point of the intersection outside the slab
    rng = rng or random.Random(0)
    lows = [Q(c) - _rat_below(h) for c, h in zip(box.center, box.halfwidth)]
    highs = [Q(c) + _rat_below(h) for c, h in zip(box.center, box.halfwidth)]
    corners = list(_product([(lo, hi) for lo, hi in zip(lows, highs)]))
    probes = [tuple(x) for x in corners]
    for _ in range(samples):
        probes.append(tuple(lo + (hi - lo) * Fraction(rng.randrange(1, 2**20), 2**20) for lo, hi in zip(lows, highs)))
    for x in probes:
        if not box.contains(x) or not B.contains(x):
            continue
        val = abs(sum(ai * xi for ai, xi in zip(a, x)) + C)
        if sign_of([val, -reach]) > 0:
            return Coverage("violated", "witness", x)
    return Coverage("undecided", "search")


def _rat_below(h: Number) -> Fraction:
    """A rational in (h(1 - 2^-40), h], used to place probes strictly inside a box."""
    if isinstance(h, Fraction):
        return h * (1 - Fraction(1, 2**40))
    return h.enclosure(96)[0] * (1 - Fraction(1, 2**40))


# ---------------------------------------------------------------------------
# the pairwise estimates behind the barrier
# ---------------------------------------------------------------------------


def estimate_bound(gc: GameConstants, k: int, q1: int) -> Fraction:
    """Upper bound for |F_{P2}(P1)| between two critical points of the same ball."""
    d, R = gc.d, gc.R
    if k == 1:
        return 3 * d * d * R ** (12 * d * d + 2) * gc.c / q1
    return 3 * d * d * R ** (k + d + 1) * gc.c / q1


def pair_report(
    P1: RationalPoint,
    cert1: DualCert,
    P2: RationalPoint,
    cert2: DualCert,
    k: int,
    gc: GameConstants,
    w: Weight,
    line1=None,
) -> dict:
    """Exact evaluation of the pairwise inequalities for two points of one class.

    Keys map to True/False, or None when a precondition does not apply.
    """
    F = eval_F(cert2, P1.coords())
    rep: dict = {
        "q1F_integer": (P1.q * F).denominator == 1,
        "F_zero": F == 0,
        "estimate": abs(F) <= estimate_bound(gc, k, P1.q),
    }
    if k == 1 or line1 is None:
        return rep
    d, R = gc.d, gc.R
    av = sum((ai * vi for ai, vi in zip(cert2.a, line1.v)), Fraction(0))
    rep["a_dot_v"] = format_rational(av)
    rep["a_dot_v_small"] = abs(av) < R ** (-d * k - 6 * d * d)
    if av == 0 or F == 0:
        rep["q0_over_q1"] = None
        rep["key_coordinate"] = None
        return rep
    lam = -F / av
    P0 = [x + lam * v for x, v in zip(P1.coords(), line1.v)]
    q0 = math.lcm(*(x.denominator for x in P0))
    rep["q0_le_q1_av"] = q0 <= P1.q * abs(av)
    rep["q0_over_q1"] = Fraction(q0, P1.q) < Fraction(1, 2)
    ok = True
    for x0, x1, ri in zip(P0, P1.coords(), w.r):
        lhs = Power(q0, 1 + ri, abs(x0 - x1))
        if sign_of([lhs, -gc.c / 2]) > 0:
            ok = False
    rep["key_coordinate"] = ok
    return rep


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def _rand_between(rng: random.Random, lo: int, hi: int) -> int:
    return lo if hi <= lo else rng.randint(lo, hi)


def sample_class_point(
    n: int,
    k: int,
    gc: GameConstants,
    w: Weight,
    rng: random.Random,
    tries: int = 2000,
) -> tuple[RationalPoint, DualCert] | None:
    """Random canonical point of class (n, k), by construction plus rejection.

    For k = 1 the denominator is drawn near H_n^(1/(1+s)) with a random
    numerator.  For k >= 2 a short dual vector of sup-norm about H_n / q is
    planted first, then a numerator vector orthogonal to it modulo q.
    """
    lo, hi = q_range(n, k, gc, w)
    if lo > hi:
        return None
    d = gc.d
    for _ in range(tries):
        if k == 1:
            top = min(hi, 4 * ceil_of(Power(gc.H(n + 1), 1 / (1 + w.s))))
            q = _rand_between(rng, lo, max(lo, top))
            p = tuple(rng.randrange(q) for _ in range(d))
        else:
            q = _rand_between(rng, lo, hi)
            xi_lo = math.ceil(gc.H(n) / q)
            xi_hi = math.ceil(gc.H(n + 1) / q) - 1
            if xi_hi < max(1, xi_lo):
                continue
            xi = _rand_between(rng, max(1, xi_lo), xi_hi)
            caps = [min(xi, ceil_of(Power(q, ri)) - 1) for ri in w.r]
            j = rng.choice([i for i in range(d) if caps[i] >= xi] or [0])
            a = [_rand_between(rng, -caps[i], caps[i]) for i in range(d)]
            a[j] = xi
            if math.gcd(xi, q) != 1:
                continue
            p = [rng.randrange(q) for _ in range(d)]
            rest = sum(a[i] * p[i] for i in range(d) if i != j)
            p[j] = (-rest * pow(xi, -1, q)) % q
            p = tuple(p)
        if math.gcd(q, *p) != 1:
            continue
        P = RationalPoint(q, p)
        cert = attach_dual(P, w)
        try:
            cls = point_class(P, cert, gc, w)
        except OutOfRange:
            continue
        if cls == ClassIndex(n, k):
            return P, cert
    return None
