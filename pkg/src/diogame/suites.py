"""Invariant suites shared by ``diogame verify`` and the acceptance tests.

Each suite takes its sample sizes as arguments and returns a
:class:`SuiteResult`; nothing here asserts, so callers decide what a
failure means.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .certify import AlgebraicNumber, badness_profile, membership_verdict
from .core import Ball, RationalPoint, validate_weight
from .decomposition import (
    GameConstants,
    ball_class,
    barrier_hyperplane,
    class_points_meeting,
    critical_points,
    derive_constants,
    pair_report,
    point_class,
    psi,
    psi_bound_holds,
    sample_class_point,
    slab_covers,
)
from .dynamics import FlowTime, orbit_lattice, shortest_vector
from .errors import DiogameError
from .games import AB, HPW, Ruleset, Transcript, replay, run_match
from .lattice import attach_dual, attach_line, dual_cert_holds, eval_F, line_cert_holds
from .strategies import AliceABFromHAW, AliceHPWBad, BobHunter, MockHAWOracle, bob_random, haw_to_ab_params

F = Fraction

WEIGHTS_2D = [
    (F(1, 2), F(1, 2)),
    (F(2, 3), F(1, 3)),
    (F(3, 4), F(1, 4)),
    (F(9, 10), F(1, 10)),
    (F(1), F(0)),
]
WEIGHTS_3D = [
    (F(1, 3), F(1, 3), F(1, 3)),
    (F(1, 2), F(1, 4), F(1, 4)),
    (F(1, 2), F(1, 3), F(1, 6)),
    (F(2, 3), F(1, 6), F(1, 6)),
    (F(1), F(0), F(0)),
]


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    violations: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.checked > 0 and not self.violations

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "violations": [str(v) for v in self.violations[:20]],
            "violation_count": len(self.violations),
            "notes": self.notes,
        }


def _timed(fn: Callable[..., SuiteResult]):
    def run(*args, **kwargs) -> SuiteResult:
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def canonical_points(d: int, q_max: int):
    """Every canonical point p/q in [0,1)^d with q <= q_max."""
    for q in range(1, q_max + 1):
        for p in itertools.product(range(q), repeat=d):
            if math.gcd(q, *p) == 1:
                yield RationalPoint(q, p)


@_timed
def minkowski_exhaustive(d: int, q_max: int, weights: Sequence[Sequence[Fraction]]) -> SuiteResult:
    res = SuiteResult(f"minkowski d={d} q<={q_max}")
    for wr in weights:
        w = validate_weight(wr)
        for P in canonical_points(d, q_max):
            try:
                bad = dual_cert_holds(P, w, attach_dual(P, w))
            except DiogameError as exc:
                bad = [f"{type(exc).__name__}: {exc}"]
            res.checked += 1
            if bad:
                res.violations.append((wr, str(P), bad))
    return res


def random_point(rng: random.Random, d: int, q: int) -> RationalPoint:
    while True:
        p = tuple(rng.randrange(q) for _ in range(d))
        if math.gcd(q, *p) == 1:
            return RationalPoint(q, p)


@_timed
def line_existence(
    small: int, q_small: int, big: int, big_bits: int, weights: Sequence[Sequence[Fraction]], seed: int = 0
) -> SuiteResult:
    res = SuiteResult("line existence")
    rng = random.Random(seed)
    jobs = [rng.randint(1, q_small) for _ in range(small)]
    jobs += [rng.randint(2, 2**big_bits) for _ in range(big)]
    for j, q in enumerate(jobs):
        wr = weights[j % len(weights)]
        w = validate_weight(wr)
        P = random_point(rng, w.d, q)
        try:
            cert = attach_dual(P, w)
            line = attach_line(P, w, cert)
            ok = line_cert_holds(P, w, cert, line)
        except DiogameError as exc:
            ok, line = False, exc
        res.checked += 1
        if not ok:
            res.violations.append((wr, q, str(P)[:80], str(line)[:80]))
    res.notes["big_integer_points"] = big
    return res


PAPER_REGIMES = [(75, 1), (150, 1), (230, 1), (300, 2), (320, 5)]


@_timed
def decomposition_sampling(
    samples: int,
    regimes: Sequence[tuple[int, int]] = PAPER_REGIMES,
    weights: Sequence[Sequence[Fraction]] = WEIGHTS_2D[:2],
    seed: int = 0,
) -> SuiteResult:
    """k < n and, for k >= 2, psi <= R^(-dk-10d^2), on random points of each class."""
    gc = derive_constants(2)
    res = SuiteResult("decomposition sampling")
    rng = random.Random(seed)
    per = {}
    for n, k in regimes:
        for j in range(samples):
            wr = weights[j % len(weights)]
            w = validate_weight(wr)
            got = sample_class_point(n, k, gc, w, rng)
            if got is None:
                res.violations.append(("no sample", n, k, wr))
                continue
            P, cert = got
            cls = point_class(P, cert, gc, w)
            res.checked += 1
            per[f"{n},{k}"] = per.get(f"{n},{k}", 0) + 1
            if not cls.k < cls.n:
                res.violations.append(("k<n", n, k, str(P)[:60]))
            if cls.k >= 2 and not psi_bound_holds(psi(P, cert, w), gc, cls.k):
                res.violations.append(("psi", n, k, str(P)[:60]))
    res.notes["samples_per_regime"] = per
    return res


def _line_ball(gc: GameConstants, n: int, rng: random.Random, bits: int) -> Ball:
    """Ball of class n centred on a random rational line of small height.

    The centre has a denominator far above the class range, so it is not
    itself a low-height rational point.
    """
    while True:
        a = (rng.randint(-3, 3), rng.randint(1, 3))
        if math.gcd(*a) == 1:
            break
    C = F(rng.randint(0, 5), rng.randint(1, 5))
    D = 2**bits
    x1 = F(rng.randrange(D), D)
    x2 = -(a[0] * x1 + C) / a[1]
    x2 -= math.floor(x2)
    x1 = -(a[1] * x2 + C) / a[0] if a[0] else x1
    return Ball((x1, x2), gc.band_radius(n))


@_timed
def k1_pairs(
    min_pairs: int,
    weights: Sequence[Sequence[Fraction]] = WEIGHTS_2D[:2],
    n_range: tuple[int, int] = (145, 147),
    seed: int = 0,
    min_balls: int = 5,
    max_balls: int = 60,
) -> SuiteResult:
    """Pairs of class-(n+1,1) points meeting one ball of class n: q1 F_{P2}(P1) = 0 and the k=1 estimate.

    Every point of the class whose box meets the ball is found by exact
    enumeration; balls sit on low-height lines because that is where such
    points accumulate.
    """
    gc = derive_constants(2)
    res = SuiteResult("k=1 pairs")
    rng = random.Random(seed)
    balls = 0
    used = 0
    while (res.checked < min_pairs or used < min_balls) and balls < max_balls:
        wr = weights[balls % len(weights)]
        w = validate_weight(wr)
        n = rng.randint(*n_range)
        lo_hi_bits = 2 * (int(gc.H(n + 2)).bit_length()) + 64
        B = _line_ball(gc, n, rng, lo_hi_bits)
        balls += 1
        if ball_class(B, gc) != n:
            continue
        pts = class_points_meeting(B, n + 1, 1, gc, w)
        used += len(pts) >= 2
        for (P1, c1), (P2, c2) in itertools.permutations(pts, 2):
            rep = pair_report(P1, c1, P2, c2, 1, gc, w)
            q1F = P1.q * eval_F(c2, P1.coords())
            res.checked += 1
            if not (rep["F_zero"] and q1F == 0 and rep["estimate"]):
                res.violations.append((wr, n, str(P1), str(P2), rep))
    res.notes.update(balls=balls, balls_with_pairs=used)
    return res


@_timed
def coverage(
    balls: int,
    R: Fraction = F(3),
    c: Fraction = F(1, 10),
    weights: Sequence[Sequence[Fraction]] = WEIGHTS_2D[:2] + WEIGHTS_2D[4:],
    seed: int = 0,
    n_range: tuple[int, int] = (1, 6),
) -> SuiteResult:
    """Barrier slab covers Delta_c(P) cap B for every critical P, custom constants."""
    gc = derive_constants(2, mode="custom", R=R, c=c)
    res = SuiteResult(f"coverage R={R} c={c}")
    rng = random.Random(seed)
    nonempty = undecided = 0
    for j in range(balls):
        wr = weights[j % len(weights)]
        w = validate_weight(wr)
        n = rng.randint(*n_range)
        rho = gc.band_radius(n) * F(rng.randint(51, 100), 100)
        B = Ball(tuple(F(rng.randint(0, 10**4), 10**4) for _ in range(2)), rho)
        hit = False
        for k in range(1, n + 6):
            C = critical_points(B, n, k, gc, w)
            if not C:
                continue
            hit = True
            bar = barrier_hyperplane(C, n, k, gc, w)
            for P in C:
                cov = slab_covers(P, B, bar.cert.a, bar.cert.C, bar.halfwidth, gc, w)
                res.checked += 1
                if cov.verdict == "undecided":
                    undecided += 1
                if cov.verdict != "covered":
                    res.violations.append((wr, B.to_json(), n, k, str(P), str(bar.point), cov.verdict))
        nonempty += hit
    res.notes.update(balls=balls, balls_with_critical_points=nonempty, undecided=undecided)
    return res


def haw_grid(step: Fraction = F(1, 10)) -> list[tuple[Fraction, Fraction]]:
    out = []
    m = int(1 / step)
    for i in range(1, m):
        for j in range(1, m):
            a, b = i * step, j * step
            if 1 - 2 * a + a * b > 0:
                out.append((a, b))
    return out


def _hunter_targets(rng: random.Random, count: int = 12) -> list[RationalPoint]:
    return [random_point(rng, 2, rng.randint(2, 30)) for _ in range(count)]


@_timed
def haw_reduction(pairs: Sequence[tuple[Fraction, Fraction]], rounds: int, seed: int = 0) -> SuiteResult:
    """Referee legality plus the distance, radius and disjointness checks of every embedded round."""
    res = SuiteResult("HAW reduction")
    B0 = Ball((F(1, 2), F(1, 2)), F(1))
    matches = 0
    for idx, (alpha, beta) in enumerate(pairs):
        params = haw_to_ab_params(alpha, beta)
        for bob_kind in ("random", "hunter"):
            rng = random.Random(f"{seed}:{idx}:{bob_kind}")
            oracle = MockHAWOracle(params.beta_prime, rng, degenerate_every=5)
            alice = AliceABFromHAW(params, oracle)
            bob = bob_random if bob_kind == "random" else BobHunter(_hunter_targets(rng))
            T = run_match(Ruleset(AB, alpha, beta), alice, bob, rounds, seed=seed + idx, B0=B0)
            matches += 1
            if T.abort:
                res.violations.append((alpha, beta, bob_kind, T.abort))
                continue
            alice.finish(_final_state(T))
            for chk in alice.checks:
                res.checked += 1
                if not (chk["dist_ok"] and chk["fi_ok"] and chk["disjoint"] and chk["embedded_verdict"] == "Legal"):
                    res.violations.append((alpha, beta, bob_kind, chk))
    res.notes["matches"] = matches
    return res


def _final_state(T: Transcript):
    return replay(T)


@_timed
def hpw_run(rounds: int, seed: int = 0, weight=(F(2, 3), F(1, 3)), B0: Ball | None = None) -> SuiteResult:
    gc = derive_constants(2)
    w = validate_weight(weight)
    res = SuiteResult("HPW strategy run")
    alice = AliceHPWBad(gc, w)
    T = run_match(Ruleset(HPW, beta=gc.beta, gamma=gc.gamma), alice, bob_random, rounds, seed=seed, B0=B0)
    res.checked = len(T.alice_moves)
    if T.abort:
        res.violations.append(("abort", T.abort))
    if len(T.balls) != rounds + 1:
        res.violations.append(("incomplete", len(T.balls)))
    for rep in alice.reports:
        if not rep["legal"]:
            res.violations.append(("family budget", rep))
    try:
        replay(T)
        back = Transcript.from_jsonl(T.to_jsonl())
        replay(back)
        if back.to_jsonl() != T.to_jsonl():
            res.violations.append(("jsonl round trip", "payload differs"))
    except DiogameError as exc:
        res.violations.append(("replay", str(exc)))
    bits = max(x.denominator.bit_length() for x in T.balls[-1].center)
    res.notes.update(
        bands=len(alice.reports),
        slabs=sum(len(r["slabs"]) for r in alice.reports),
        partial=sum(r["partial"] for r in alice.reports),
        final_center_bits=bits,
    )
    res.transcript = T  # type: ignore[attr-defined]
    return res


# Independent oracle for eps(100) at x = (sqrt2 - 1, sqrt3 - 1), r = (1/2, 1/2):
# mpmath interval arithmetic at 200 bits, brute force over q <= 100.
ORACLE_Q_STAR = 41
ORACLE_LO = F(
    354860473712646709557313815516675391187548297355450177929679,
    3213876088517980551083924184682325205044405987565585670602752,
)
ORACLE_HI = F(
    354860473712646709557313815516675391187548297355450177930909,
    3213876088517980551083924184682325205044405987565585670602752,
)


@_timed
def certify_oracle() -> SuiteResult:
    res = SuiteResult("certify oracle")
    w = validate_weight([F(1, 2), F(1, 2)])
    x = [AlgebraicNumber.sqrt(2, -1), AlgebraicNumber.sqrt(3, -1)]
    prof = badness_profile(x, w, 100)
    lo, hi = prof.eps_at(100)
    res.checked += 1
    tol = F(1, 2**100)
    if not (lo <= ORACLE_HI and ORACLE_LO <= hi):
        res.violations.append(("disjoint from oracle", float(lo)))
    if abs((lo + hi) / 2 - (ORACLE_LO + ORACLE_HI) / 2) > tol or hi - lo > tol:
        res.violations.append(("width", float(hi - lo)))
    if prof.argmin[-1] != ORACLE_Q_STAR or not prof.argmin_certain:
        res.violations.append(("argmin", prof.argmin[-1]))
    # rational inputs vanish exactly at their denominator
    rng = random.Random(7)
    for _ in range(20):
        q = rng.randint(2, 40)
        P = random_point(rng, 2, q)
        prof = badness_profile(list(P.coords()), w, q)
        first_zero = next(i for i, v in enumerate(prof.values, start=1) if v == 0)
        res.checked += 1
        if prof.eps_at(q) != 0 or first_zero != q or str(membership_verdict(prof, F(1, 10**6))) != f"ExcludedAt({q})":
            res.violations.append(("rational", str(P), first_zero))
    return res


@_timed
def dynamics_sanity(k_max: int = 20) -> SuiteResult:
    res = SuiteResult("dynamics sanity")
    for wr in WEIGHTS_2D:
        w = validate_weight(wr)
        for k in range(1, k_max + 1):
            et = F(2**k)
            sv = shortest_vector(orbit_lattice([0, 0], w, FlowTime(et=et)))
            res.checked += 1
            if not (sv.enclosure.contains(1 / et) and sv.witness == (0, 0, 1)):
                res.violations.append(("x=0", wr, k, sv.to_json()))
            L = orbit_lattice([F(1, 2), F(1, 2)], w, FlowTime(et=et))
            sv = shortest_vector(L)
            res.checked += 1
            if not sv.enclosure.hi <= 2 / et:
                res.violations.append(("x=1/2", wr, k, sv.to_json()))
    return res


# name -> (suite, kwargs for the default profile, kwargs for the quick profile)
REGISTRY: dict[str, tuple[Callable[..., SuiteResult], dict, dict]] = {
    "minkowski": (
        minkowski_exhaustive,
        {"d": 2, "q_max": 30, "weights": WEIGHTS_2D},
        {"d": 2, "q_max": 12, "weights": WEIGHTS_2D},
    ),
    "line": (
        line_existence,
        {"small": 1000, "q_small": 10**4, "big": 10, "big_bits": 400, "weights": WEIGHTS_2D},
        {"small": 100, "q_small": 10**3, "big": 2, "big_bits": 200, "weights": WEIGHTS_2D},
    ),
    "decomposition": (decomposition_sampling, {"samples": 40}, {"samples": 5}),
    "k1-orthogonality": (k1_pairs, {"min_pairs": 20}, {"min_pairs": 2, "min_balls": 1}),
    "reduction": (
        haw_reduction,
        {"pairs": haw_grid(F(1, 5)), "rounds": 60},
        {"pairs": haw_grid(F(1, 5))[:2], "rounds": 20},
    ),
    "hpw": (hpw_run, {"rounds": 60}, {"rounds": 10}),
    "certify": (certify_oracle, {}, {}),
    "dynamics": (dynamics_sanity, {"k_max": 20}, {"k_max": 4}),
}
