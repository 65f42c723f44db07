"""Command-line front end.

Exit codes: 0 when the run succeeds and every checked claim holds, 1 when a
checked claim fails (the report is still written), 2 for usage or input
errors.  Reports are JSON (or CSV for ``bounds``) with sorted keys, so equal
arguments give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .bounds import NORMS, bounds_table, construction_params, lower_bound_k_measure
from .depth import BoxFamily, depth_decomposition, multiplicity_identity_check, pigeonhole_bound, pigeonhole_witness
from .geometry import ParseError, format_scalar, parse_scalar, scalar_from_float
from .neighborhood import TheoremViolation, audit_seclusion, candidate_values, lower_bound_witness
from .partitions import build_profile, grid, layered, spec_from_json
from .rounding import RoundingScheme, nfl_demo, output_set, universal_scheme
from .sperner import GridColoring, InvalidColoring, find_rich_point, validate_no_opposite_faces

log = logging.getLogger("secluded")

THREADS_ENV = "SECLUDED_THREADS"


class UsageError(Exception):
    pass


def _to_jsonable(obj):
    if isinstance(obj, Fraction):
        return format_scalar(obj)
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, _to_jsonable(k))): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_to_jsonable(v) for v in items]
    return obj


def _exactify(obj, allow_inexact: bool):
    """Replace JSON floats by exact dyadic text, or refuse them."""
    if isinstance(obj, float):
        if not allow_inexact:
            raise ParseError(f"float {obj!r} in input; write it as p/q or a decimal string, or pass --allow-inexact")
        return format_scalar(scalar_from_float(obj))
    if isinstance(obj, dict):
        return {k: _exactify(v, allow_inexact) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_exactify(v, allow_inexact) for v in obj]
    return obj


class _Ctx:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.allow_inexact = args.allow_inexact

    def scalar(self, text: str) -> Fraction:
        try:
            return parse_scalar(text)
        except ParseError:
            if not self.allow_inexact:
                raise
            try:
                value = float.fromhex(text) if "0x" in text.lower() else float(text)
            except ValueError:
                raise ParseError(f"cannot read {text!r} as a number") from None
            return scalar_from_float(value)

    def point(self, text: str) -> tuple[Fraction, ...]:
        parts = [t for t in text.split(",") if t.strip()]
        if not parts:
            raise ParseError("empty point")
        return tuple(self.scalar(t.strip()) for t in parts)

    def load_json(self, path: str) -> dict:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path} is not valid JSON: {exc}") from None
        return _exactify(data, self.allow_inexact)

    def spec(self, text: str):
        """A partition from a JSON file, or the shorthand ``grid:D`` / ``layered:D``."""
        kind, _, dim = text.partition(":")
        if kind in ("grid", "layered") and dim.isdigit():
            return grid(int(dim)) if kind == "grid" else layered(int(dim))
        return spec_from_json(self.load_json(text))


def _threads(value: str | None) -> int:
    raw = value if value is not None else os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"thread count must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("thread count must be at least 1")
    return n


def _dims(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        lo, sep, hi = part.partition("..")
        if sep:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out or min(out) < 1:
        raise UsageError("dimensions must be positive integers")
    return out


# -- subcommands ------------------------------------------------------------


def cmd_round(ctx: _Ctx) -> tuple[dict, int]:
    a = ctx.args
    eps0, x = ctx.scalar(a.eps0), ctx.point(a.x)
    if len(x) != a.d:
        raise UsageError(f"--x has {len(x)} coordinates, --d is {a.d}")
    scheme = universal_scheme(a.d, eps0)
    if a.representative != "center":
        scheme = RoundingScheme(scheme.spec, scheme.scale, a.representative)
    return {"x": x, "output": scheme(x), "member": scheme.member(x), "scheme": scheme.to_json(), "accuracy": 2 * a.d * eps0}, 0


def cmd_output_set(ctx: _Ctx) -> tuple[dict, int]:
    a = ctx.args
    eps0, x = ctx.scalar(a.eps0), ctx.point(a.x)
    if len(x) != a.d:
        raise UsageError(f"--x has {len(x)} coordinates, --d is {a.d}")
    try:
        rep = output_set(a.d, eps0, x)
    except AssertionError as exc:
        return {"error": str(exc)}, 1
    return {"x": x, "outputs": rep.outputs, "k_observed": rep.k_observed, "k_claimed": a.d + 1, "scheme": universal_scheme(a.d, eps0).to_json()}, 0


def cmd_audit(ctx: _Ctx) -> tuple[dict, int]:
    a = ctx.args
    spec, eps = ctx.spec(a.spec), ctx.scalar(a.epsilon)
    res = audit_seclusion(
        spec,
        eps,
        strategy=a.strategy,
        budget=a.budget,
        kind=a.ball,
        seed=a.seed,
        workers=_threads(a.threads),
        max_exact_dim=None if a.force else 4,
    )
    report = {
        "spec": spec.to_json(),
        "max": res.max_count,
        "witness": res.witness,
        "members": res.members,
        "strategy": res.strategy,
        "exhaustive": res.exhaustive,
        "search_space": math.prod(len(candidate_values(spec, i, eps, a.ball == "closed")) for i in range(spec.dim))
        if a.strategy == "exact"
        else None,
        "ball": res.ball_kind,
        "seed": a.seed,
    }
    code = 0
    if a.claim_k is not None:
        report["claim_k"] = a.claim_k
        report["claim_holds"] = res.max_count <= a.claim_k
        code = 0 if report["claim_holds"] else 1
    return report, code


def cmd_witness(ctx: _Ctx) -> tuple[dict, int]:
    a = ctx.args
    spec, eps = ctx.spec(a.spec), ctx.scalar(a.epsilon)
    bound = lower_bound_k_measure(spec.dim, eps, math.prod(spec.sides()), "linf")
    report = {"spec": spec.to_json(), "bound": bound, "ball": "open"}
    try:
        point, count = lower_bound_witness(spec, eps)
    except TheoremViolation as exc:
        report["error"] = str(exc)
        return report, 1
    report.update(point=point, count=count)
    return report, 0


def cmd_construct(ctx: _Ctx) -> tuple[dict, int]:
    a = ctx.args
    spec, claim = build_profile(lambda d: a.f, a.d)
    k, eps = construction_params(a.f, a.d)
    report = {"spec": spec.to_json(), "claim": {"k": claim.k, "epsilon": claim.epsilon}, "f": a.f}
    assert (k, eps) == (claim.k, claim.epsilon)
    if a.verify:
        res = audit_seclusion(spec, claim.epsilon, workers=_threads(a.threads), max_exact_dim=None)
        report["audit"] = {"max": res.max_count, "witness": res.witness}
        if res.max_count > claim.k:
            return report, 1
    return report, 0


def cmd_depth(ctx: _Ctx) -> tuple[dict, int]:
    fam = BoxFamily.from_json(ctx.load_json(ctx.args.family))
    total, integral, ok = multiplicity_identity_check(fam)
    cells = depth_decomposition(fam)
    report = {
        "family": fam.to_json(),
        "cells": [{"cell": c.cell.to_json(), "depth": c.depth} for c in cells],
        "max_depth": max((c.depth for c in cells), default=0),
        "sum_volumes": total,
        "integral": integral,
        "identity_holds": ok,
        "pigeonhole_bound": pigeonhole_bound(fam),
    }
    try:
        point, depth = pigeonhole_witness(fam)
    except TheoremViolation as exc:
        report["error"] = str(exc)
        return report, 1
    report.update(witness=point, witness_depth=depth)
    return report, 0 if ok else 1


def cmd_sperner(ctx: _Ctx) -> tuple[dict, int]:
    data = ctx.load_json(ctx.args.coloring)
    try:
        coloring = GridColoring.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed coloring: {exc}") from None
    eps = ctx.scalar(ctx.args.epsilon)
    check = validate_no_opposite_faces(coloring)
    if not check.valid:
        raise InvalidColoring(check.violations)
    report = {"coloring": {"d": coloring.d, "resolution": list(coloring.resolution), "palette": coloring.palette}, "epsilon": eps}
    try:
        rich = find_rich_point(coloring, eps)
    except TheoremViolation as exc:
        report["error"] = str(exc)
        return report, 1
    report.update(point=rich.point, colors_found=rich.colors_found, count=rich.count, bound=rich.bound)
    return report, 0


def cmd_bounds(ctx: _Ctx) -> tuple[dict | str, int]:
    a = ctx.args
    norms = [n.strip() for n in a.norms.split(",") if n.strip()]
    rows = bounds_table(_dims(a.d), ctx.scalar(a.eps), ctx.scalar(a.M), norms, a.digits)
    if a.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["norm", "d", "k", "value", "exact", "stirling_approx"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue(), 0
    return {"eps": ctx.scalar(a.eps), "M": ctx.scalar(a.M), "rows": rows}, 0


def cmd_nfl_demo(ctx: _Ctx) -> tuple[dict, int]:
    a = ctx.args
    delta = ctx.scalar(a.delta)
    out = nfl_demo(a.d, ctx.scalar(a.eps0), delta, a.trials, a.seed)
    ok = out["transversal_size"] >= out["k_lower_bound"]
    return out, 0 if ok else 1


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="secluded", description="Secluded partitions, rounding and neighborhood checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--allow-inexact", action="store_true", help="accept binary floats, converted exactly as dyadic rationals")
    common.add_argument("--threads", help=f"worker processes (default ${THREADS_ENV} or 1)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("round", parents=[common], help="universal rounding of one point")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--eps0", required=True)
    s.add_argument("--x", required=True, help="comma separated coordinates")
    s.add_argument("--representative", choices=["center", "corner"], default="center")
    s.set_defaults(func=cmd_round)

    s = sub.add_parser("output-set", parents=[common], help="all rounding outputs over the closed eps0-ball at x")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--eps0", required=True)
    s.add_argument("--x", required=True)
    s.set_defaults(func=cmd_output_set)

    s = sub.add_parser("audit", parents=[common], help="largest neighborhood of a partition")
    s.add_argument("--spec", required=True, help="partition JSON file, or grid:D / layered:D")
    s.add_argument("--epsilon", required=True)
    s.add_argument("--claim-k", type=int)
    s.add_argument("--strategy", choices=["exact", "randomized"], default="exact")
    s.add_argument("--budget", type=int)
    s.add_argument("--ball", choices=["closed", "open"], default="closed")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--force", action="store_true", help="allow exact audits above d=4")
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("witness", parents=[common], help="open ball meeting the guaranteed number of members")
    s.add_argument("--spec", required=True)
    s.add_argument("--epsilon", required=True)
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("construct", parents=[common], help="product of layered blocks of dimension f")
    s.add_argument("--f", type=int, required=True, help="block dimension f(d)")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--verify", action="store_true", help="audit the claimed degree")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("depth", parents=[common], help="depth decomposition of a box family")
    s.add_argument("--family", required=True)
    s.set_defaults(func=cmd_depth)

    s = sub.add_parser("sperner", parents=[common], help="rich point of a grid coloring")
    s.add_argument("--coloring", required=True)
    s.add_argument("--epsilon", required=True)
    s.set_defaults(func=cmd_sperner)

    s = sub.add_parser("bounds", parents=[common], help="lower-bound table")
    s.add_argument("--d", default="1..20", help="list like 1,2,5 or a range 1..20")
    s.add_argument("--eps", default="1/4")
    s.add_argument("--M", default="1")
    s.add_argument("--norms", default=",".join(NORMS))
    s.add_argument("--digits", type=int, default=30)
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("nfl-demo", parents=[common], help="adversarial transversal against the universal scheme")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--eps0", required=True)
    s.add_argument("--delta", default="1/2")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_nfl_demo)
    return p


def _params(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "verbose", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    ctx = _Ctx(args)
    try:
        report, code = args.func(ctx)
    except InvalidColoring as exc:
        print(f"secluded: invalid coloring: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, KeyError, TypeError) as exc:
        print(f"secluded {args.command}: {exc}", file=sys.stderr)
        return 2
    if isinstance(report, str):
        _emit(report, args.out)
        return code
    report = dict(report)
    report.setdefault("command", args.command)
    report["params"] = _params(args)
    report["version"] = __version__
    _emit(json.dumps(_to_jsonable(report), sort_keys=True, indent=2) + "\n", args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
