"""Command-line interface: ``tropical <subcommand> [options]``.

Exit status is 0 on success, 1 on a domain error (a JSON record with a
stable ``error`` code is printed) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .category import validate as validate_category
from .coupling import CouplingMatrix
from .diagram import entropy_vector, is_minimal
from .distance import ikd, kd, uniform_fan, uniform_ikd_bound
from .errors import ParseError, TropicalError
from .homogeneous import (
    PermGroup,
    SubgroupDiagram,
    check_homogeneous,
    intersection_closure_check,
    quotient_diagram,
)
from .io import (
    RunConfig,
    diagram_to_dict,
    encode_label,
    encode_space,
    fan_to_dict,
    load_json,
    parse_diagram,
    parse_family,
    parse_fan,
)
from .mixture import mix
from .space import ProbSpace
from .tropical import (
    TropicalChainPoint,
    aep_curve,
    asymptotic_distance,
    chain_representative,
    chain_tropicalize,
    linear_sequence,
)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", path=path) from None


def _coupling(c: CouplingMatrix | None):
    if c is None:
        return None
    return [[encode_label(a), encode_label(b), num, den] for a, b, num, den in c.to_rows()]


def _config(args) -> RunConfig:
    try:
        return RunConfig(
            mode=args.mode, cap=args.cap, n_max=args.n_max, tol=args.tol,
            format=args.format, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_validate(args, cfg):
    x = parse_diagram(_read(args.diagram))
    minimal, witness = is_minimal(x)
    return {
        "valid": True,
        "objects": list(x.shape.objects),
        "initial": x.initial,
        "sizes": {o: len(x.spaces[o]) for o in x.shape.objects},
        "minimal": minimal,
        "witness": None if witness is None else {
            "fan": [witness.left, witness.top, witness.right],
            "atoms": [encode_label(a) for a in witness.atoms],
        },
    }


def cmd_entropy(args, cfg):
    return entropy_vector(parse_diagram(_read(args.diagram))).to_dict()


def cmd_kd(args, cfg):
    return {"kd": kd(parse_fan(_read(args.fan)))}


def cmd_ikd(args, cfg):
    b = ikd(parse_diagram(_read(args.left)), parse_diagram(_read(args.right)), cfg.mode, cfg.cap)
    return {"lower": b.lower, "upper": b.upper, "exact": b.exact, "coupling": _coupling(b.coupling)}


def cmd_aikd(args, cfg):
    g1 = linear_sequence(parse_diagram(_read(args.left)))
    g2 = linear_sequence(parse_diagram(_read(args.right)))
    mode = "greedy" if cfg.mode == "greedy" else "auto"
    est = asymptotic_distance(g1, g2, cfg.n_max, mode, cfg.cap)
    if cfg.format == "csv":
        return "n,value\n" + "".join(f"{n},{v!r}\n" for n, v in est.samples)
    return est.to_dict()


def cmd_mix(args, cfg):
    return diagram_to_dict(mix(parse_family(_read(args.family))).total)


def cmd_homog(args, cfg):
    if args.diagram:
        return check_homogeneous(parse_diagram(_read(args.diagram))).to_dict()
    doc = load_json(_read(args.spec))
    try:
        group = PermGroup.from_cycles(doc["generators"], doc.get("degree"))
        cat = doc["category"]
        shape = validate_category(cat["objects"], cat.get("arrows", []))
        subgroups = SubgroupDiagram.from_generators(group, shape, doc["subgroups"])
    except (KeyError, TypeError):
        raise ParseError("spec needs generators, category and subgroups") from None
    x = quotient_diagram(subgroups)
    report = check_homogeneous(x, cap=max(12, len(group)))
    return {
        "group_order": len(group),
        "sizes": {o: len(x.spaces[o]) for o in shape.objects},
        "homogeneous": report.homogeneous,
        "orbit_counts": dict(report.orbit_counts),
        "intersection_closed": intersection_closure_check(subgroups),
        "minimal": is_minimal(x)[0],
        "diagram": diagram_to_dict(x),
    }


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_chain_trop(args, cfg):
    point = chain_tropicalize(linear_sequence(parse_diagram(_read(args.diagram))), args.n)
    return {"x": point.as_top_first()}


def cmd_chain_rep(args, cfg):
    point = TropicalChainPoint.top_first(_floats(args.x))
    return diagram_to_dict(chain_representative(point, args.n))


def cmd_aep(args, cfg):
    try:
        p = Fraction(args.p)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad probability {args.p!r}") from None
    x = ProbSpace.from_masses([p, 1 - p]) if 0 <= p <= 1 else None
    if x is None:
        raise UsageError("p must lie in [0, 1]")
    curve = aep_curve(x, range(args.n_min, cfg.n_max + 1), args.method)
    if cfg.format == "csv":
        return curve.to_csv()
    return curve.to_dict()


def cmd_uniform_fan(args, cfg):
    if args.n < 1 or args.m < 1:
        raise UsageError("n and m must be positive")
    fan = uniform_fan(args.n, args.m, reduce=not args.no_reduce)
    value, bound = kd(fan), uniform_ikd_bound(args.n, args.m)
    out = {
        "kd": value,
        "bound": bound,
        "within_bound": value <= bound + cfg.tol,
        "top": encode_space(fan.top.initial_space),
    }
    if args.full:
        out["fan"] = fan_to_dict(fan)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["exact", "greedy"], default="exact")
    common.add_argument("--cap", type=int, default=None, help="cell cap for exact solvers")
    common.add_argument("--n-max", type=int, default=None)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="tropical", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    add("validate", cmd_validate, "validate a diagram document").add_argument("--diagram", required=True)
    add("entropy", cmd_entropy, "entropy vector of a diagram").add_argument("--diagram", required=True)
    add("kd", cmd_kd, "entropy distance of a fan document").add_argument("--fan", required=True)
    for name, fn, help_ in (
        ("ikd", cmd_ikd, "intrinsic entropy distance"),
        ("aikd", cmd_aikd, "asymptotic distance of the linear sequences"),
    ):
        p = add(name, fn, help_)
        p.add_argument("--left", required=True)
        p.add_argument("--right", required=True)
    add("mix", cmd_mix, "mixture of a family document").add_argument("--family", required=True)
    p = add("homog", cmd_homog, "quotient diagram of a subgroup diagram, or a homogeneity check")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec", help="JSON with degree, generators, category, subgroups")
    g.add_argument("--diagram")
    p = add("chain-trop", cmd_chain_trop, "tropical point of a chain diagram")
    p.add_argument("--diagram", required=True)
    p.add_argument("--n", type=int, default=1)
    p = add("chain-rep", cmd_chain_rep, "dyadic representative of a chain point")
    p.add_argument("--x", required=True, help="coordinates x_k,...,x_1 (finest first)")
    p.add_argument("--n", type=int, default=1)
    p = add("aep", cmd_aep, "uniformization bounds for tensor powers of a binary space")
    p.add_argument("--p", default="1/4", help="mass of the first atom")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--method", choices=["sequential", "greedy"], default="sequential")
    p = add("uniform-fan", cmd_uniform_fan, "the explicit fan between U_n and U_m")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--no-reduce", action="store_true")
    p.add_argument("--full", action="store_true", help="include the fan document")
    return parser


DEFAULT_N_MAX = {"aikd": 4, "aep": 200}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.n_max is None:
        args.n_max = DEFAULT_N_MAX.get(args.command, 4)
    if args.format == "csv" and args.command not in ("aikd", "aep"):
        parser.error("--format csv is only available for aikd and aep")
    try:
        cfg = _config(args)
        result = args.func(args, cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except TropicalError as exc:
        print(json.dumps(exc.to_dict(), ensure_ascii=False))
        return 1
    except ValueError as exc:
        print(json.dumps({"error": "value", "message": str(exc)}))
        return 1
    if isinstance(result, str):
        sys.stdout.write(result)
    else:
        print(json.dumps(result, indent=1, ensure_ascii=False))
    return 0


if __name__ == "__main__":
    sys.exit(main())
