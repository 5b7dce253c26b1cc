"""Command-line front end: ``doubling-lab <command> [options]``.

Every command prints one JSON report (or a CSV table for ``continuum``).
Exit status: 0 on success, 2 on invalid input (the diagnostic names the
violated invariant), 1 on an internal failure.  Defaults can be supplied
as a JSON object in the file named by ``DOUBLING_LAB_CONFIG``; flags take
precedence over it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import KINDS as BOUND_KINDS
from .bounds import (
    all_certificates,
    disjoint_pair_bound,
    envelope_bound,
    equilateral_bound,
    find_theta_configuration,
    golden_ratio_bound,
    intersection_ratio_bound,
    best_separated_balls,
    lemma34_root,
    spread_bound,
    theta_configuration_bound,
)
from .continuum import d2_divergence, mu_alpha_lower_bound, packing_lower_bound, packing_lower_bound_smooth
from .errors import ComputationError, InputFileError, InvalidInput, InvalidParameters
from .families import KINDS as FAMILY_KINDS
from .families import FamilySpec, bounded_transform, from_edge_list, generate, snowflake
from .measures import cmu, ratio_profile
from .metric import FiniteMetricSpace, parse_rational
from .optimizer import Infeasible, brute_force_least, feasible, least_constant
from .serialize import (
    certificate_dict,
    cmu_report_dict,
    convert_mode,
    infeasible_dict,
    load_measure,
    load_space,
    optimization_dict,
    profile_dict,
    scalar,
    space_to_dict,
    to_jsonable,
)

CONFIG_ENV = "DOUBLING_LAB_CONFIG"
CONFIG_KEYS = {"tol", "measure", "mode", "max_clique", "table"}
SWEEPS = ("alpha", "k", "r", "lemma")

log = logging.getLogger("doubling_lab")


def _space_options(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("space source (exactly one)")
    src.add_argument("--space", metavar="PATH", help="JSON {points, distances} or a family spec {kind, ...}")
    src.add_argument("--edges", metavar="PATH", help="edge list, lines 'u v' or 'u v w'")
    src.add_argument("--family", choices=FAMILY_KINDS[:-1], help="named family")
    fam = p.add_argument_group("family parameters")
    fam.add_argument("--n", type=int)
    fam.add_argument("--depth", type=int)
    fam.add_argument("--branching", type=int)
    fam.add_argument("--dim", type=int, default=2)
    fam.add_argument("--p", choices=("1", "2", "inf"), default="inf")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact", help="force exact rational arithmetic")
    mode.add_argument("--float", dest="mode", action="store_const", const="float", help="force floating arithmetic")
    tr = p.add_argument_group("metric transforms")
    tr.add_argument("--snowflake", metavar="EPS", help="replace d by d**EPS, 0 < EPS < 1")
    tr.add_argument("--bounded", action="store_true", help="replace d by d/(1+d)")


def _output_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", help="write the report here instead of standard output")
    p.add_argument("--table", action="store_true", help="human-readable summary instead of JSON")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doubling-lab",
        description="Doubling constants of finite metric measure spaces.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", help="check the metric axioms")
    _space_options(p)
    _output_options(p)

    p = sub.add_parser("cmu", help="exact doubling constant of a measure")
    _space_options(p)
    p.add_argument("--measure", default="counting", help="uniform, counting or a JSON path")
    p.add_argument("--profile", metavar="CENTER", action="append", default=[], help="also report the ratio profile of a center")
    _output_options(p)

    p = sub.add_parser("least", help="least doubling constant over all measures")
    _space_options(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--brute", type=int, metavar="RES", help="also run the simplex-grid oracle (n <= 4)")
    p.add_argument("--level", metavar="C", help="only decide feasibility at level C")
    _output_options(p)

    p = sub.add_parser("bounds", help="lower-bound certificates")
    _space_options(p)
    p.add_argument("--all", action="store_true", help="every applicable certifier (default)")
    p.add_argument("--kind", action="append", choices=BOUND_KINDS, default=[], help="run only this certifier")
    p.add_argument("--measure", help="uniform, counting or a JSON path (enables measure-specific bounds)")
    p.add_argument("--m", type=int, default=1, help="theta configuration parameter m")
    p.add_argument("--theta", default="1", help="theta configuration fraction in (0,1]")
    p.add_argument("--subset", help="comma-separated point labels for the spread bound")
    p.add_argument("--max-clique", type=int, dest="max_clique", help="cap on the equilateral set size")
    _output_options(p)

    p = sub.add_parser("family", help="emit a generated space as JSON")
    _space_options(p)
    _output_options(p)

    p = sub.add_parser("continuum", help="closed-form sweeps as CSV")
    p.add_argument("--sweep", choices=SWEEPS, required=True)
    p.add_argument("--values", help="comma-separated parameter values (alpha, k, r or n)")
    p.add_argument("--dim", type=int, default=1, help="dimension for the k sweep")
    p.add_argument("--c", default="1", help="packing constant for the k sweep")
    p.add_argument("--theta", default="1", help="theta for the lemma sweep")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _apply_config(parser: argparse.ArgumentParser) -> None:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFileError(f"cannot load {CONFIG_ENV}={path}: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidParameters(f"{CONFIG_ENV} must name a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise InvalidParameters(f"unknown config keys {sorted(unknown)}; allowed {sorted(CONFIG_KEYS)}")
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in data.items() if k in known})


def _resolve_space(args) -> tuple[FiniteMetricSpace, dict]:
    sources = [s for s in ("space", "edges", "family") if getattr(args, s, None)]
    if len(sources) != 1:
        raise InvalidParameters("give exactly one of --space, --edges, --family")
    mode = args.mode or "auto"
    if args.space:
        space = load_space(args.space, mode)
        echo = {"space": args.space}
    elif args.edges:
        try:
            lines = Path(args.edges).read_text().splitlines()
        except OSError as exc:
            raise InputFileError(f"cannot read {args.edges}: {exc.strerror}") from None
        space = from_edge_list(lines)
        echo = {"edges": args.edges}
    else:
        spec = FamilySpec(args.family, n=args.n, depth=args.depth, branching=args.branching, dim=args.dim, p=args.p)
        space = generate(spec)
        fields = {k: v for k, v in vars(spec).items() if v is not None}
        if spec.kind != "grid":
            fields.pop("dim"), fields.pop("p")
        echo = {"family": fields}
    if args.bounded:
        space = bounded_transform(space)
        echo["bounded"] = True
    if args.snowflake:
        space = snowflake(space, parse_rational(args.snowflake))
        echo["snowflake"] = args.snowflake
    if mode == "float" and space.exact:
        space = convert_mode(space, "float")
    echo["mode"] = space.mode
    echo["n"] = space.n
    return space, echo


def _cmd_validate(args, space) -> dict:
    return {"valid": True, "n": space.n, "mode": space.mode, "points": list(space.points)}


def _cmd_cmu(args, space) -> dict:
    measure = load_measure(args.measure, space.n)
    result = cmu_report_dict(space, cmu(space, measure))
    if args.profile:
        result["profiles"] = [profile_dict(ratio_profile(space, measure, _label(space, c))) for c in args.profile]
    return result


def _label(space: FiniteMetricSpace, text: str):
    try:
        return space.index(text)
    except IndexError:
        if text.isdigit():
            return space.index(int(text))
        raise InvalidParameters(f"unknown point {text!r}") from None


def _cmd_least(args, space) -> dict:
    if args.level is not None:
        verdict = feasible(space, parse_rational(args.level))
        if isinstance(verdict, Infeasible):
            return infeasible_dict(verdict)
        return {"feasible": True, "level": scalar(parse_rational(args.level)), "witness": to_jsonable(verdict)}
    result = optimization_dict(least_constant(space, args.tol))
    if args.brute is not None:
        result["brute_force"] = scalar(brute_force_least(space, args.brute))
    return result


def _cmd_bounds(args, space) -> dict:
    measure = load_measure(args.measure, space.n) if args.measure else None
    kinds = args.kind
    if not kinds:
        certs = all_certificates(space, measure)
    else:
        certs = []
        for kind in BOUND_KINDS:
            if kind not in kinds:
                continue
            cert = _single_bound(kind, args, space, measure)
            if cert is not None:
                certs.append(cert)
    return {"certificates": [certificate_dict(c) for c in certs]}


def _single_bound(kind, args, space, measure):
    if kind in ("envelope", "intersection_ratio") and measure is None:
        raise InvalidParameters(f"the {kind} bound needs --measure")
    if kind == "separated_balls":
        return best_separated_balls(space)
    if kind == "golden_ratio":
        return golden_ratio_bound(space)
    if kind == "disjoint_pair":
        return disjoint_pair_bound(space)
    if kind == "theta_configuration":
        config = find_theta_configuration(space, args.m, parse_rational(args.theta))
        return theta_configuration_bound(config, space) if config is not None else None
    if kind == "spread":
        subset = [_label(space, s.strip()) for s in args.subset.split(",")] if args.subset else range(space.n)
        return spread_bound(space, subset)
    if kind == "equilateral":
        return equilateral_bound(space, args.max_clique)
    if kind == "envelope":
        return envelope_bound(space, measure)
    return intersection_ratio_bound(space, measure)


def _cmd_family(args, space) -> dict:
    return space_to_dict(space)


def _values(text, default):
    if not text:
        return default
    return [v.strip() for v in text.split(",") if v.strip()]


def continuum_table(args) -> list[list]:
    rows: list[list] = []
    if args.sweep == "alpha":
        rows.append(["alpha", "lower_bound"])
        for a in _values(args.values, ["-0.5", "0", "0.5", "1", "2", "3"]):
            rows.append([a, repr(mu_alpha_lower_bound(float(parse_rational(a))))])
    elif args.sweep == "k":
        rows.append(["k", "packing_bound", "packing_bound_smooth", "limit"])
        for k in _values(args.values, [str(4**j) for j in range(11)]):
            k = int(k)
            rows.append([k, repr(packing_lower_bound(args.dim, k, args.c)),
                         repr(packing_lower_bound_smooth(args.dim, k, args.c)), 2**args.dim])
    elif args.sweep == "r":
        rows.append(["r", "d2_bound"])
        for r in _values(args.values, ["2/3", "9/10", "99/100", "999/1000"]):
            rows.append([r, repr(float(d2_divergence(parse_rational(r))))])
    else:
        rows.append(["n", "x_n"])
        for n in _values(args.values, [str(j) for j in (1, 2, 5, 10, 20, 50, 100, 200)]):
            rows.append([n, repr(float(lemma34_root(int(n), parse_rational(args.theta))))])
    return rows


def _render_table(command: str, results: dict) -> str:
    lines = [f"command: {command}"]
    for key, value in results.items():
        if isinstance(value, list) and value and isinstance(value[0], dict) and "kind" in value[0]:
            lines.append(f"{key}:")
            for c in value:
                lines.append(f"  {c['kind']:<20} {c['value_float']:.12g}  ({c['applies_to']})")
        elif isinstance(value, (list, dict)):
            lines.append(f"{key}: {json.dumps(value)}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


COMMANDS = {
    "validate": _cmd_validate,
    "cmu": _cmd_cmu,
    "least": _cmd_least,
    "bounds": _cmd_bounds,
    "family": _cmd_family,
}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        _apply_config(parser)
    except InvalidInput as exc:
        sys.stderr.write(f"error: {exc.invariant}: {exc}\n")
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    started = time.perf_counter()
    try:
        if args.command == "continuum":
            buf = io.StringIO()
            csv.writer(buf, lineterminator="\n").writerows(continuum_table(args))
            _emit(buf.getvalue(), args.out)
            return 0
        space, echo = _resolve_space(args)
        results = COMMANDS[args.command](args, space)
        if args.table:
            text = _render_table(args.command, results)
        else:
            report = {
                "command": args.command,
                "input": echo,
                "mode": space.mode,
                "results": results,
                "wall_time": round(time.perf_counter() - started, 6),
            }
            text = json.dumps(report, indent=2) + "\n"
        _emit(text, args.out)
        return 0
    except InvalidInput as exc:
        sys.stderr.write(f"error: {exc.invariant}: {exc}\n")
        return 2
    except IndexError as exc:
        sys.stderr.write(f"error: point index: {exc}\n")
        return 2
    except (ComputationError, ArithmeticError) as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return 1
    except Exception as exc:  # last resort: a diagnostic, never a traceback
        log.debug("unhandled exception", exc_info=True)
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


__all__ = ["build_parser", "continuum_table", "main", "run"]
