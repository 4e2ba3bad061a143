"""Command-line entry point: ``wehrl-lab``.

Exit status: 0 when every check passes, 2 when any check fails, 1 on
configuration or evaluation errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

import numpy as np

from . import comparison, distribution as dist, inequalities as ineq
from .errors import ConfigurationError, WehrlLabError
from .spaces import (Bergman, Fock, SpherePoly, WeightedFunction, coherent_state, default_rule,
                     normalize, polynomial, random_function)

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


# -- argument handling ------------------------------------------------------------------


def _floats(text: str, n: int, flag: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"{flag} expects {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise ConfigurationError(f"{flag} expects {n} comma-separated numbers, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", choices=["sphere", "plane", "hyperbolic"], required=True)
    common.add_argument("--j", type=int, help="degree bound of the sphere space")
    common.add_argument("--alpha", type=float, help="weight parameter of the plane/disk spaces")
    common.add_argument("--p", type=float, default=2.0)
    common.add_argument("--coeffs", metavar="FILE", help="JSON list of [re, im] pairs, lowest degree first")
    common.add_argument("--coherent", metavar="A_RE,A_IM", help="plane/disk coherent state center")
    common.add_argument("--coherent-su2", metavar="ARE,AIM,BRE,BIM",
                        help="sphere coherent state (alpha, beta)")
    common.add_argument("--seed", type=int, help="seed for random functions and pairs")
    common.add_argument("--count", type=int, help="number of random functions in a sweep")
    common.add_argument("--degree", type=int, help="degree of random polynomials")
    common.add_argument("--radial-order", type=int)
    common.add_argument("--angular-order", type=int)
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="wehrl-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="evaluate an inequality and report pass/fail")
    vsub = verify.add_subparsers(dest="inequality", required=True)
    vsub.add_parser("wehrl", parents=[common], help="entropy bound on the sphere")
    g = vsub.add_parser("global", parents=[common], help="integral bound with a convex weight G")
    g.add_argument("--G", action="append", dest="G", metavar="SPEC",
                   help="power:s, xlogx or hinge:lambda (repeatable; default power:2)")
    c = vsub.add_parser("contractivity", parents=[common], help="||f||_q <= ||f||_p")
    c.add_argument("--q", type=float, required=True)
    loc = vsub.add_parser("local", parents=[common], help="bound on a region of given measure")
    loc.add_argument("--G", action="append", dest="G", metavar="SPEC")
    loc.add_argument("--budget", type=float, help="measure of the superlevel region")
    loc.add_argument("--disk", metavar="CX,CY,R", help="chart disk instead of a superlevel region")

    d = sub.add_parser("distribution", parents=[common], help="emit the distribution mu(t)")
    d.add_argument("--points", type=int, default=200)
    d.add_argument("--mu-floor", type=float, default=1e-3)

    o = sub.add_parser("compare-ode", parents=[common], help="monotonicity along the comparison ODE")
    o.add_argument("--pairs", type=int, default=20)
    o.add_argument("--mu-floor", type=float, default=1e-3)
    return parser


def make_space(args):
    if args.space == "sphere":
        if args.j is None:
            raise ConfigurationError("--space sphere needs --j")
        return SpherePoly(args.j, args.p)
    if args.alpha is None:
        raise ConfigurationError(f"--space {args.space} needs --alpha")
    return Fock(args.alpha, args.p) if args.space == "plane" else Bergman(args.alpha, args.p)


def read_coefficients(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        line = lines[exc.lineno - 1] if exc.lineno <= len(lines) else "<end of file>"
        raise ConfigurationError(f"{path}:{exc.lineno}: {exc.msg}: {line.strip()!r}") from None
    if not isinstance(data, list) or not data:
        raise ConfigurationError(f"{path}: expected a non-empty JSON list of [re, im] pairs")
    out = []
    for k, item in enumerate(data):
        ok = (isinstance(item, list) and len(item) == 2
              and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in item))
        if not ok:
            lineno = _line_of_item(text, k)
            raise ConfigurationError(f"{path}:{lineno}: entry {k} is not a [re, im] pair: {item!r}")
        out.append(complex(item[0], item[1]))
    return np.array(out)


def _line_of_item(text: str, k: int) -> int:
    """Best-effort line number of the k-th top-level list entry."""
    depth, count = 0, -1
    line = 1
    for ch in text:
        if ch == "\n":
            line += 1
        elif ch == "[":
            depth += 1
            if depth == 2:
                count += 1
        elif ch == "]":
            depth -= 1
        elif depth == 1 and ch not in " \t\r," and count + 1 == k:
            return line
        if count == k and depth >= 2:
            return line
    return line


def make_functions(args, space) -> tuple[list[WeightedFunction], dict]:
    """Functions to test and a header describing the source."""
    sources = [args.coeffs is not None, args.coherent is not None,
               args.coherent_su2 is not None, args.count is not None]
    if sum(sources) != 1:
        raise ConfigurationError(
            "give exactly one function source: --coeffs, --coherent, --coherent-su2 or --seed/--count"
        )
    if args.coeffs is not None:
        f = polynomial(space, read_coefficients(args.coeffs), label=os.path.basename(args.coeffs))
        return [normalize(f)], {}
    if args.coherent is not None:
        if isinstance(space, SpherePoly):
            raise ConfigurationError("sphere coherent states use --coherent-su2")
        re, im = _floats(args.coherent, 2, "--coherent")
        return [coherent_state(space, complex(re, im))], {}
    if args.coherent_su2 is not None:
        if not isinstance(space, SpherePoly):
            raise ConfigurationError("--coherent-su2 applies to the sphere space only")
        ar, ai, br, bi = _floats(args.coherent_su2, 4, "--coherent-su2")
        return [coherent_state(space, (complex(ar, ai), complex(br, bi)))], {}
    if args.seed is None:
        raise ConfigurationError("random sweeps need --seed")
    if args.count < 1:
        raise ConfigurationError("--count must be positive")
    rng = np.random.default_rng(args.seed)
    fs = [random_function(space, rng, args.degree) for _ in range(args.count)]
    return fs, {"seed": args.seed, "count": args.count}


def _orders(args) -> dict:
    for name in ("radial_order", "angular_order"):
        v = getattr(args, name)
        if v is not None and v < 1:
            raise ConfigurationError(f"--{name.replace('_', '-')} must be positive")
    return {"n_r": args.radial_order, "n_theta": args.angular_order}


# -- output -----------------------------------------------------------------------------


def _clean(value):
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "-inf" if v < 0 else "inf"
        return v
    return value


def to_json_line(record: dict) -> str:
    return json.dumps(_clean(record), sort_keys=False, allow_nan=False)


def _threads() -> int:
    env = os.environ.get("WEHRL_LAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigurationError(f"WEHRL_LAB_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return min(8, os.cpu_count() or 1)


def ordered_map(fn: Callable, items: Iterable) -> list:
    items = list(items)
    workers = min(_threads(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- commands ----------------------------------------------------------------------------


def _rule_or_none(f, G, orders):
    if orders["n_r"] is None and orders["n_theta"] is None:
        return None
    smooth = G is not None and ineq._smooth_integrand(f, G)
    return default_rule(f, smooth=smooth, **orders)


def cmd_verify(args, space, fs, orders) -> tuple[list[dict], bool]:
    kind = args.inequality
    tasks: list[Callable[[], ineq.VerificationReport]] = []
    if kind == "wehrl":
        if not isinstance(space, SpherePoly):
            raise ConfigurationError("verify wehrl applies to the sphere space")
        for f in fs:
            tasks.append(lambda f=f: ineq.verify_wehrl(
                normalize(f.with_p(2.0)), _rule_or_none(f.with_p(2.0), ineq.XLogX(), orders)))
    elif kind == "global":
        weights = [ineq.parse_weight(t) for t in (args.G or ["power:2"])]
        for f in fs:
            for G in weights:
                tasks.append(lambda f=f, G=G: ineq.verify_global(f, G, _rule_or_none(f, G, orders)))
    elif kind == "contractivity":
        for f in fs:
            tasks.append(lambda f=f: ineq.verify_contractivity(f, space.p, args.q))
    else:
        weights = [ineq.parse_weight(t) for t in (args.G or ["power:2"])]
        if (args.budget is None) == (args.disk is None):
            raise ConfigurationError("verify local needs exactly one of --budget or --disk")
        for G in weights:
            if not G.positive:
                raise ConfigurationError(f"{G.name} is not positive on (0, inf); use a power weight")
        if args.disk is not None:
            cx, cy, r = _floats(args.disk, 3, "--disk")
            if not r > 0:
                raise ConfigurationError("--disk radius must be positive")
            regions = [ineq.Disk(complex(cx, cy), r)]
        else:
            regions = None
        for f in fs:
            for G in weights:
                def task(f=f, G=G):
                    rule = dist.distribution_rule(f, orders["n_r"], orders["n_theta"])
                    d = dist.build_distribution(f, rule)
                    region = regions[0] if regions else ineq.best_region(f, args.budget, d)
                    rep = ineq.verify_local(f, region, G, rule, d)
                    rep.equality_diagnostic = ineq.diagnostic(f)
                    return rep
                tasks.append(task)
    reports = ordered_map(lambda t: t(), tasks)
    out = []
    for f, rep in zip(_expand(fs, len(reports)), reports):
        rec = rep.as_dict()
        rec["function"] = f.describe()
        out.append(rec)
    return out, all(r.passed for r in reports)


def _expand(fs, n):
    per = n // len(fs)
    return [f for f in fs for _ in range(per)]


def cmd_distribution(args, space, fs, orders):
    if len(fs) != 1:
        raise ConfigurationError("distribution takes a single function (use --count 1 for random)")
    f = fs[0]
    d = dist.build_distribution(f, dist.distribution_rule(f, orders["n_r"], orders["n_theta"]))
    ts, mus = dist.table(d, n=args.points, mu_floor=args.mu_floor)
    return list(zip(ts.tolist(), mus.tolist()))


def cmd_compare_ode(args, space, fs, orders):
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    per_f = []
    for f in fs:
        d = dist.build_distribution(f, dist.distribution_rule(f, orders["n_r"], orders["n_theta"]))
        per_f.append((d, comparison.random_pairs(d, rng, args.pairs, args.mu_floor)))
    results = ordered_map(
        lambda item: comparison.check_monotonicity(item[0], space.geometry, space.c, item[1]),
        per_f)
    records = [r for recs in results for r in recs]
    return [r.as_dict() for r in records], all(r.passed for r in records)


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        space = make_space(args)
        fs, header = make_functions(args, space)
        orders = _orders(args)
        fmt = args.format or ("csv" if args.command == "distribution" else "json")
        if fmt == "csv" and args.command != "distribution":
            raise ConfigurationError("csv output is available for the distribution command only")
        lines: list[str] = []
        passed = True
        if header:
            lines.append(to_json_line({"header": {"command": args.command, **header}})
                         if fmt == "json" else f"# seed={header['seed']} count={header['count']}")
        if args.command == "verify":
            recs, passed = cmd_verify(args, space, fs, orders)
            lines.extend(to_json_line(r) for r in recs)
        elif args.command == "distribution":
            rows = cmd_distribution(args, space, fs, orders)
            if fmt == "csv":
                lines.append("t,mu")
                lines.extend(f"{t!r},{m!r}" for t, m in rows)
            else:
                lines.extend(to_json_line({"t": t, "mu": m}) for t, m in rows)
        else:
            recs, passed = cmd_compare_ode(args, space, fs, orders)
            lines.extend(to_json_line(r) for r in recs)
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except (WehrlLabError, ValueError, ArithmeticError) as exc:
        print(f"wehrl-lab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"wehrl-lab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
