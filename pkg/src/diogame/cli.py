"""Command-line front end: ``diogame <subcommand> ...``.

Exit codes: 0 ok, 1 invariant failure, 2 usage or configuration error,
3 budget or precision exhausted.  JSON payloads are written with sorted
keys and no timestamps, so identical arguments and seed reproduce them
byte for byte; timing goes to the optional ``--meta`` file.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import __version__, kernels
from .certify import badness_profile, membership_verdict, parse_coordinate
from .core import Ball, RationalPoint, canonical_point, parse_vector, parse_weight
from .decomposition import (
    CUSTOM,
    PAPER,
    ball_class,
    barrier_hyperplane,
    critical_points,
    derive_constants,
    dominators,
    maximal_cover,
    point_class,
    psi,
    psi_bound_holds,
    q_range,
)
from .dynamics import FlowTime, boundedness_profile
from .errors import BudgetExceeded, DiogameError, IllegalMove, PrecisionExhausted
from .exact import format_rational, number_to_json, parse_rational
from .games import AB, HAW, HPW, Ruleset, Transcript, replay, run_match
from .lattice import attach_dual, attach_line, dual_cert_holds, line_cert_holds
from .strategies import (
    AliceABFromHAW,
    AliceHPWBad,
    BobHunter,
    BobScripted,
    MockHAWOracle,
    alice_empty,
    bob_random,
    haw_to_ab_params,
)
from .suites import REGISTRY

OK, INVARIANT, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational literal: {text!r}") from exc


def _weight(text: str):
    try:
        return parse_weight(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _vector(text: str):
    try:
        return parse_vector(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad vector {text!r}: {exc}") from exc


def _constants(args):
    mode = args.mode
    if mode == PAPER:
        return derive_constants(args.d, args.rho0, args.beta, args.gamma)
    return derive_constants(args.d, args.rho0, args.beta, args.gamma, mode=CUSTOM, R=args.R, c=args.c)


def _constants_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("game constants")
    g.add_argument("--mode", choices=[PAPER, CUSTOM], default=PAPER)
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--rho0", type=_rational, default=Fraction(1))
    g.add_argument("--beta", type=_rational, default=Fraction(1, 2))
    g.add_argument("--gamma", type=_rational, default=Fraction(1))
    g.add_argument("--R", type=_rational, default=None)
    g.add_argument("--c", type=_rational, default=None)
    return p


def _emit(args, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_derive_constants(args) -> int:
    gc = _constants(args)
    _emit(args, gc.to_json())
    return OK


def _read_points(args) -> list[tuple[int, RationalPoint]]:
    if args.batch:
        lines = Path(args.batch).read_text().splitlines()
    else:
        lines = args.point or []
    out = []
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            out.append((lineno, canonical_point(parse_vector(text))))
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"line {lineno}: cannot parse point {text!r} ({exc})") from exc
    if not out:
        raise UsageError("no points given (use --point or --batch)")
    return out


def cmd_attach(args) -> int:
    w = args.weights
    status = OK
    rows = []
    for _, P in _read_points(args):
        if P.d != w.d:
            raise UsageError(f"point {P} has dimension {P.d}, weights have {w.d}")
        cert = attach_dual(P, w, budget=args.budget)
        row = {"point": P.to_json(), "dual": cert.to_json(), "dual_violations": dual_cert_holds(P, w, cert)}
        if not args.no_line:
            line = attach_line(P, w, cert, budget=args.budget)
            row["line"] = line.to_json()
            row["line_ok"] = line_cert_holds(P, w, cert, line)
            if not row["line_ok"]:
                status = INVARIANT
        if row["dual_violations"]:
            status = INVARIANT
        rows.append(json.dumps(row, sort_keys=True))
    _emit(args, "\n".join(rows) + "\n")
    return status


def _single_point(args) -> RationalPoint:
    P = canonical_point(args.point)
    if P.d != args.weights.d:
        raise UsageError("point and weights differ in dimension")
    return P


def cmd_decompose(args) -> int:
    gc, w = _constants(args), args.weights
    P = _single_point(args)
    cert = attach_dual(P, w)
    cls = point_class(P, cert, gc, w)
    pv = psi(P, cert, w)
    out = {
        "point": P.to_json(),
        "dual": cert.to_json(),
        "class": cls.to_json(),
        "psi": number_to_json(pv),
        "psi_bound_holds": psi_bound_holds(pv, gc, cls.k) if cls.k >= 2 else None,
    }
    _emit(args, out)
    return OK if out["psi_bound_holds"] is not False else INVARIANT


def cmd_maximal(args) -> int:
    gc, w = _constants(args), args.weights
    P = _single_point(args)
    up = dominators(P, gc, w, bound=args.bound)
    out = {
        "point": P.to_json(),
        "maximal": not up,
        "dominators": [D.to_json() for D in up],
        "cover": maximal_cover(P, gc, w, bound=args.bound).to_json(),
    }
    _emit(args, out)
    return OK


def cmd_critical(args) -> int:
    gc, w = _constants(args), args.weights
    B = Ball(args.center, args.radius)
    n = ball_class(B, gc)
    if n is None:
        raise UsageError("the ball lies in no band B_n for these constants")
    out = {"ball": B.to_json(), "n": n, "classes": []}
    for k in range(1, args.k_max + 1):
        lo, hi = q_range(n + k, k, gc, w)
        entry = {"k": k, "q_range": [str(lo), str(hi)], "points": []}
        if lo <= hi:
            C = critical_points(B, n, k, gc, w, budget=args.budget, workers=args.workers)
            entry["points"] = [P.to_json() for P in C]
            if C:
                entry["barrier"] = barrier_hyperplane(C, n, k, gc, w).to_json()
        out["classes"].append(entry)
    _emit(args, out)
    return OK


def _ball0(args) -> Ball:
    d = args.weights.d if args.weights else 2
    center = args.center if args.center is not None else (Fraction(1, 2),) * d
    return Ball(center, args.radius)


def cmd_run_game(args) -> int:
    B0 = _ball0(args)
    meta: dict = {}
    if args.ruleset == HPW:
        gc = _constants(args)
        rs = Ruleset(HPW, beta=gc.beta, gamma=gc.gamma)
        if args.alice == "hpw-bad":
            alice = AliceHPWBad(gc, args.weights, k_max=args.k_max, budget=args.budget, workers=args.workers)
        else:
            alice = alice_empty
    elif args.ruleset == AB:
        if args.alpha is None:
            raise UsageError("--alpha is required for the (alpha,beta)-game")
        rs = Ruleset(AB, args.alpha, args.beta)
        if args.alice == "haw-reduction":
            params = haw_to_ab_params(args.alpha, args.beta)
            oracle = MockHAWOracle(params.beta_prime, random.Random(f"{args.seed}:oracle"))
            alice = AliceABFromHAW(params, oracle)
            meta["reduction"] = params.to_json()
        else:
            alice = alice_empty
    else:
        rs = Ruleset(HAW, beta=args.beta)
        alice = alice_empty
    if args.bob == "random":
        bob = bob_random
    elif args.bob == "hunter":
        targets = [canonical_point(parse_vector(t)) for t in (args.target or [])]
        bob = BobHunter(targets)
    else:
        if not args.script:
            raise UsageError("--bob script needs --script FILE")
        bob = BobScripted.from_jsonl(Path(args.script).read_text())
    T = run_match(rs, alice, bob, args.rounds, seed=args.seed, B0=B0)
    if isinstance(alice, AliceABFromHAW):
        alice.finish(replay(T))
        bad = [c for c in alice.checks if not (c["dist_ok"] and c["fi_ok"] and c["disjoint"])]
        meta["reduction_checks"] = len(alice.checks)
        meta["reduction_violations"] = len(bad)
    if isinstance(alice, AliceHPWBad):
        meta["bands"] = len(alice.reports)
        meta["families_legal"] = all(r["legal"] for r in alice.reports)
    T.meta = meta
    _emit(args, T.to_jsonl())
    if T.abort and T.abort.get("mover") == "alice":
        return INVARIANT
    if meta.get("reduction_violations") or meta.get("families_legal") is False:
        return INVARIANT
    return OK


def cmd_replay(args) -> int:
    T = Transcript.from_jsonl(Path(args.transcript).read_text())
    try:
        replay(T)
    except IllegalMove as exc:
        _emit(args, {"verdict": exc.clause, "message": str(exc)})
        return INVARIANT
    _emit(args, {"verdict": "Legal", "rounds": len(T.alice_moves), "abort": T.abort})
    return OK


def cmd_certify(args) -> int:
    try:
        x = [parse_coordinate(t) for t in args.x.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad coordinate list {args.x!r}: {exc}") from exc
    w = args.weights
    if len(x) != w.d:
        raise UsageError("x and weights differ in dimension")
    prof = badness_profile(x, w, args.Q, width_bits=args.width_bits)
    out = prof.to_json()
    out["x"] = args.x
    if args.eps is not None:
        out["verdict"] = str(membership_verdict(prof, args.eps))
    _emit(args, out)
    return OK


def _time_grid(args) -> list[FlowTime]:
    if args.et_grid:
        return [FlowTime(et=parse_rational(t)) for t in args.et_grid.split(",")]
    if args.t_grid:
        return [FlowTime(t=parse_rational(t)) for t in args.t_grid.split(",")]
    raise UsageError("give --et-grid or --t-grid")


def cmd_orbit(args) -> int:
    try:
        x = [parse_coordinate(t) for t in args.x.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad coordinate list {args.x!r}: {exc}") from exc
    points, low, failures = boundedness_profile(x, args.weights, _time_grid(args), args.bits, args.workers)
    out = {
        "x": args.x,
        "weights": [format_rational(r) for r in args.weights.r],
        "series": [p.to_json() for p in points],
        "min": low.to_json() if low else None,
        "precision_failures": failures,
    }
    _emit(args, out)
    return BUDGET if failures else OK


def cmd_verify(args) -> int:
    names = args.suite or list(REGISTRY)
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise UsageError(f"unknown suite(s): {', '.join(unknown)}; known: {', '.join(REGISTRY)}")
    matrix = []
    for name in names:
        fn, full, quick = REGISTRY[name]
        res = fn(**(quick if args.profile == "quick" else full))
        row = res.to_json()
        row["name"] = name
        matrix.append(row)
        print(f"{'PASS' if res.passed else 'FAIL'} {name}: {res.checked} checked, {len(res.violations)} violations",
              file=sys.stderr)
    _emit(args, {"profile": args.profile, "suites": matrix})
    return OK if all(r["passed"] for r in matrix) else INVARIANT


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diogame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"diogame {__version__} ({kernels.BACKEND} kernel)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the payload here instead of stdout")
    common.add_argument("--meta", help="write timing and version metadata to this JSON file")
    common.add_argument("--config", help="JSON file of option defaults (rationals as 'num/den' strings)")
    common.add_argument("--workers", type=int, default=None, help="worker processes (env DIOGAME_WORKERS)")
    const = _constants_parent()
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help_: str, parents=(common,)):
        p = sub.add_parser(name, help=help_, parents=list(parents))
        p.set_defaults(func=fn)
        return p

    add("derive-constants", cmd_derive_constants, "print R, c and the violation report", (common, const))

    p = add("attach", cmd_attach, "dual and line certificates for rational points")
    p.add_argument("--weights", type=_weight, required=True)
    p.add_argument("--point", action="append", help="comma-separated rationals; repeatable")
    p.add_argument("--batch", help="file with one point per line")
    p.add_argument("--no-line", action="store_true")
    p.add_argument("--budget", type=int, default=10**7)

    p = add("decompose", cmd_decompose, "class (n,k) and psi of a point", (common, const))
    p.add_argument("--weights", type=_weight, required=True)
    p.add_argument("--point", type=_vector, required=True)

    p = add("maximal", cmd_maximal, "maximality and a maximal cover of a point", (common, const))
    p.add_argument("--weights", type=_weight, required=True)
    p.add_argument("--point", type=_vector, required=True)
    p.add_argument("--bound", type=int, default=10**6)

    p = add("critical", cmd_critical, "critical sets and barriers of a ball", (common, const))
    p.add_argument("--weights", type=_weight, required=True)
    p.add_argument("--center", type=_vector, required=True)
    p.add_argument("--radius", type=_rational, required=True)
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--budget", type=int, default=10**6)

    p = add("run-game", cmd_run_game, "play a seeded match and write a JSONL transcript", (common, const))
    p.add_argument("--ruleset", type=str.upper, choices=[HPW, AB, HAW], default=HPW)
    p.add_argument("--alice", choices=["hpw-bad", "haw-reduction", "empty"], default="hpw-bad")
    p.add_argument("--bob", choices=["random", "hunter", "script"], default="random")
    p.add_argument("--script", help="JSONL file of Bob balls")
    p.add_argument("--target", action="append", help="hunter target point; repeatable")
    p.add_argument("--weights", type=_weight, default=parse_weight("2/3,1/3"))
    p.add_argument("--alpha", type=_rational)
    p.add_argument("--rounds", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--center", type=_vector)
    p.add_argument("--radius", type=_rational, default=Fraction(1))
    p.add_argument("--k-max", type=int, default=64)
    p.add_argument("--budget", type=int, default=10**5)

    p = add("replay", cmd_replay, "re-referee a JSONL transcript")
    p.add_argument("--transcript", required=True)

    p = add("certify", cmd_certify, "finite-horizon weighted badness profile")
    p.add_argument("--x", required=True, help="e.g. 'sqrt(2)-1,sqrt(3)-1' or '1/3,2/5'")
    p.add_argument("--weights", type=_weight, required=True)
    p.add_argument("--Q", type=int, required=True)
    p.add_argument("--eps", type=_rational)
    p.add_argument("--width-bits", type=int, default=120)

    p = add("orbit", cmd_orbit, "shortest-vector series along the diagonal flow")
    p.add_argument("--x", required=True)
    p.add_argument("--weights", type=_weight, required=True)
    p.add_argument("--et-grid", help="comma-separated rational values of e^t")
    p.add_argument("--t-grid", help="comma-separated rational values of t")
    p.add_argument("--bits", type=int, default=128)

    p = add("verify", cmd_verify, "run the invariant suites and print a pass/fail matrix")
    p.add_argument("--profile", choices=["default", "quick"], default="default")
    p.add_argument("--suite", action="append", help=f"one of: {', '.join(REGISTRY)}; repeatable")
    return parser


def _config_argv(argv: list[str]) -> list[str]:
    """Append options from the --config file that the command line does not set.

    Keys are option names without dashes (``"weights"``, ``"k-max"``);
    lists repeat an option and ``true`` sets a flag.
    """
    if "--config" in argv:
        path = argv[argv.index("--config") + 1] if argv.index("--config") + 1 < len(argv) else None
    else:
        path = next((a.split("=", 1)[1] for a in argv if a.startswith("--config=")), None)
    if not path:
        return argv
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    given = {a.split("=", 1)[0] for a in argv if a.startswith("--")}
    extra: list[str] = []
    for key, value in cfg.items():
        opt = "--" + key.replace("_", "-")
        if opt in given or opt == "--config":
            continue
        if value is True:
            extra.append(opt)
        elif value is False or value is None:
            continue
        else:
            for v in value if isinstance(value, list) else [value]:
                extra += [opt, str(v)]
    return argv + extra


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        argv = _config_argv(argv)
    except UsageError as exc:
        print(f"diogame: error: {exc}", file=sys.stderr)
        return USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except (UsageError, ValueError, ZeroDivisionError, argparse.ArgumentTypeError) as exc:
        print(f"diogame {args.command}: error: {exc}", file=sys.stderr)
        return USAGE
    except (BudgetExceeded, PrecisionExhausted) as exc:
        print(f"diogame {args.command}: budget exhausted: {exc}", file=sys.stderr)
        return BUDGET
    except DiogameError as exc:
        print(f"diogame {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INVARIANT
    if args.meta:
        meta = {
            "command": args.command,
            "argv": argv,
            "version": __version__,
            "kernel": kernels.BACKEND,
            "seconds": round(time.perf_counter() - t0, 3),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        Path(args.meta).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
