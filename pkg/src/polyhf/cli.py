"""Command-line front end: build, gb, tri, solve, inverse, reproduce.

Exit status: 0 success, 1 reproduction mismatch, 2 usage error, 3 budget exceeded.
Every flag can also be set through an environment variable ``POLYHF_<FLAG>``
(upper case, dashes as underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import hf2model as hm
from .groebner import (
    Budget,
    BudgetExceeded,
    DimensionError,
    MonomialOrder,
    PolySystem,
    groebner_basis,
    is_trivial_ideal,
    is_zero_dimensional,
    lex_basis,
    load_system,
)
from .numkernel import DomainError, format_rational, parse_rational
from .polyring import UsageError
from .reproduce import CHECKS, Context, inverse_solutions, infeasibility_basis
from .rootsolve import solutions_to_csv, solutions_to_json, solve_triangular_system
from .stickelberger import InconsistencyError, compare_solution_sets, solve_by_eigenvalues
from .triangular import decompose_triangular

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
ENV_PREFIX = "POLYHF_"
BUILTIN_SYSTEMS = ("uhf", "uhf-fixed", "ground-state", "rhf-opt", "rhf")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _env(name: str, default):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(str(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--precision-bits", type=int, default=int(_env("precision-bits", 256)))
    p.add_argument("--grid", type=_rational, default=_rational(_env("grid", "1/1000")))
    p.add_argument("--degree", type=int, default=int(_env("degree", 4)))
    p.add_argument("--center", type=_rational, default=_rational(_env("center", "7/5")))
    p.add_argument("--tol", type=_rational, default=_rational(_env("tol", "1e-8")))
    p.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    budget = _env("budget-spairs", None)
    p.add_argument("--budget-spairs", type=int, default=int(budget) if budget else None)
    p.add_argument("--out", default=_env("out", None), help="output directory (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=_env("format", "json"))
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="polyhf", description="Polynomial Hartree-Fock for minimal-basis H2.")
    parser.add_argument("--version", action="version", version=f"polyhf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", parents=[common], help="emit the energy functional and a stationarity system")
    b.add_argument("--system", choices=BUILTIN_SYSTEMS, default="uhf")
    b.add_argument("--fixed-r", type=_rational, default=None)
    b.add_argument("--ground-state", action="store_true")
    b.add_argument("--egap", type=_rational, default=None)
    b.add_argument("--stability", action="store_true")
    b.add_argument("--order", choices=("lex", "grevlex"), default=None)

    g = sub.add_parser("gb", parents=[common], help="reduced Groebner basis of a system")
    g.add_argument("system")
    g.add_argument("--order", choices=("lex", "grevlex"), default=None)

    t = sub.add_parser("tri", parents=[common], help="triangular decomposition of a system")
    t.add_argument("system")

    s = sub.add_parser("solve", parents=[common], help="real solutions of a system")
    s.add_argument("system")
    s.add_argument("--route", choices=("tri", "stick", "both"), default="tri")

    i = sub.add_parser("inverse", parents=[common], help="distance giving a target occupied-unoccupied gap")
    i.add_argument("--egap", type=_rational, default=Fraction(9, 10))
    i.add_argument("--stability", action="store_true")

    r = sub.add_parser("reproduce", parents=[common], help="compare against the stored reference values")
    r.add_argument("item", choices=sorted(CHECKS) + ["all"])
    return parser


# ---------------------------------------------------------------- manifest / output

@dataclass
class RunManifest:
    command: list[str]
    config: dict
    inputs: dict = field(default_factory=dict)
    tool_version: str = __version__
    python: str = platform.python_version()
    wall_time_s: float = 0.0


def _config(args) -> hm.HF2Config:
    return hm.HF2Config(center=args.center, taylor_degree=args.degree, grid=args.grid,
                        precision_bits=args.precision_bits)


def _context(args) -> Context:
    budget = Budget(max_spairs=args.budget_spairs) if args.budget_spairs else None
    return Context(_config(args), args.tol, args.seed, budget)


def _run_config(args) -> dict:
    d = _config(args).to_dict()
    d.update(tol=format_rational(args.tol), seed=args.seed, budget_spairs=args.budget_spairs, format=args.format)
    for k in ("order", "route", "egap", "fixed_r", "system", "item"):
        v = getattr(args, k, None)
        if v is not None:
            d[k] = format_rational(v) if isinstance(v, Fraction) else v
    return d


class Output:
    """Collects named output documents; writes them to --out or stdout."""

    def __init__(self, args, argv):
        self.args = args
        self.manifest = RunManifest(list(argv), _run_config(args))
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def flush(self, started: float) -> None:
        self.manifest.wall_time_s = round(time.perf_counter() - started, 3)
        if self.args.out:
            out = Path(self.args.out)
            out.mkdir(parents=True, exist_ok=True)
            for name, text in self.files.items():
                (out / name).write_text(text, encoding="utf-8")
            (out / "manifest.json").write_text(json.dumps(asdict(self.manifest), indent=2) + "\n", encoding="utf-8")
        else:
            for text in self.files.values():
                sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _table_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: "" if v is None else (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------------- system loading

def _builtin(name: str, config: hm.HF2Config) -> hm.ModelSystem:
    if name == "uhf":
        return hm.uhf_stationarity(config)
    if name == "uhf-fixed":
        return hm.apply_constraint(hm.uhf_stationarity(config), hm.FixedDistance(config.center))
    if name == "ground-state":
        return hm.apply_constraint(hm.uhf_stationarity(config), hm.GroundState())
    if name == "rhf-opt":
        return hm.rhf_optimization_system(config)
    if name == "rhf":
        return hm.rhf_fixed_system(config)
    raise UsageError(f"unknown built-in system {name!r}")


def _load(source: str, args, output: Output) -> PolySystem:
    """A system file path, or one of the built-in model systems."""
    if source in BUILTIN_SYSTEMS and not Path(source).exists():
        ms = _builtin(source, _config(args))
        return PolySystem(ms.nonzero(), ms.system.order)
    try:
        data = Path(source).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read system file: {exc}") from None
    output.manifest.inputs[source] = hashlib.sha256(data).hexdigest()
    return load_system(source)


# ---------------------------------------------------------------- commands

def cmd_build(args, out: Output) -> int:
    config = _config(args)
    ms = _builtin(args.system, config)
    if args.fixed_r is not None:
        ms = hm.apply_constraint(ms, hm.FixedDistance(args.fixed_r))
    if args.ground_state:
        ms = hm.apply_constraint(ms, hm.GroundState())
    if args.egap is not None:
        ms = hm.apply_constraint(ms, hm.GapTarget(args.egap))
    if args.stability:
        ms = hm.apply_constraint(ms, hm.Stability())
    if args.order:
        ms.system = ms.system.with_order(args.order)
    out.add("functional.json", _json(ms.functional.to_dict()))
    out.add("system.json", _json(ms.to_dict()))
    return EXIT_OK


def cmd_gb(args, out: Output) -> int:
    F = _load(args.system, args, out)
    order = MonomialOrder(args.order or F.order.kind, F.vars)
    budget = Budget(max_spairs=args.budget_spairs) if args.budget_spairs else None
    G = lex_basis(F, F.vars, budget) if order.kind == "lex" else groebner_basis(F, order, budget)
    d = G.to_dict()
    d["trivial"] = is_trivial_ideal(G)
    d["zero_dimensional"] = (not d["trivial"]) and is_zero_dimensional(G)
    out.add("basis.json", _json(d))
    return EXIT_OK


def cmd_tri(args, out: Output) -> int:
    F = _load(args.system, args, out)
    budget = Budget(max_spairs=args.budget_spairs) if args.budget_spairs else None
    T = decompose_triangular(lex_basis(F, F.vars, budget), budget)
    out.add("triangular.json", T.to_json())
    return EXIT_OK


def _emit_solutions(out: Output, name: str, sols, names, fmt: str) -> None:
    if fmt == "csv":
        out.add(f"{name}.csv", solutions_to_csv(sols, names))
    else:
        out.add(f"{name}.json", solutions_to_json(sols))


def cmd_solve(args, out: Output) -> int:
    F = _load(args.system, args, out)
    ctx = _context(args)
    names = F.vars.names
    tri = stick = None
    if args.route in ("tri", "both"):
        T = decompose_triangular(lex_basis(F, F.vars, ctx.budget), ctx.budget)
        tri = solve_triangular_system(T, F, ctx.tol, ctx.config.precision_bits)
        _emit_solutions(out, "solutions_tri", tri, names, args.format)
    if args.route in ("stick", "both"):
        G = groebner_basis(F, MonomialOrder("grevlex", F.vars), ctx.budget)
        stick, report = solve_by_eigenvalues(G, F, ctx.tol, precision_bits=ctx.config.precision_bits, seed=ctx.seed)
        _emit_solutions(out, "solutions_stick", stick, names, args.format)
        if report.clusters:
            print(f"note: repeated eigenvalues with multiplicities {report.clusters}", file=sys.stderr)
    if args.route == "both":
        agree, notes = compare_solution_sets(tri, stick, Fraction(1, 10 ** 6))
        verdict = {"routes_agree": agree, "triangular": len(tri), "eigenvalue": len(stick), "discrepancies": notes}
        out.add("agreement.json", _json(verdict))
        print(f"routes agree: {agree} ({len(tri)} triangular, {len(stick)} eigenvalue)", file=sys.stderr)
        for n in notes:
            print(f"discrepancy: {n}", file=sys.stderr)
        if not agree:
            return EXIT_MISMATCH
    return EXIT_OK


def cmd_inverse(args, out: Output) -> int:
    ctx = _context(args)
    if args.stability:
        G = infeasibility_basis(ctx, args.egap)
        if is_trivial_ideal(G):
            print("infeasible: Gröbner basis = {1}")
            out.add("basis.json", _json(G.to_dict()))
            return EXIT_OK
        out.add("basis.json", _json(G.to_dict()))
        print(f"feasible: basis has {len(G)} elements")
        return EXIT_OK
    sols, ms = inverse_solutions(ctx, args.egap)
    _emit_solutions(out, "solutions", sols, ms.vars.names, args.format)
    roots = sorted({round(float(s.values["r"]), 9) for s in sols})
    valid = [r for r in roots if 1 <= r <= 2]
    print(f"real r: {', '.join(f'{r:.6f}' for r in roots)}; inside expansion range [1, 2]: "
          f"{', '.join(f'{r:.6f}' for r in valid) or 'none'}", file=sys.stderr)
    return EXIT_OK


def cmd_reproduce(args, out: Output) -> int:
    ctx = _context(args)
    items = list(CHECKS) if args.item == "all" else [args.item]
    status = EXIT_OK
    report = {}
    for item in items:
        check = CHECKS[item](ctx)
        print(f"{'PASS' if check.ok else 'FAIL'} {item}")
        for line in check.lines:
            print(f"  {line}")
        report[item] = {"ok": check.ok, "lines": check.lines}
        if check.rows:
            if item in ("deviation-curve", "gap-curve") or args.format == "csv":
                out.files[f"{item}.csv"] = _table_csv(check.rows)
            else:
                report[item]["rows"] = check.rows
        if not check.ok:
            status = EXIT_MISMATCH
    if args.out:
        out.add("report.json", _json(report))
    else:
        # keep stdout a readable report; curves only go to files
        out.files = {}
    return status


COMMANDS = {
    "build": cmd_build,
    "gb": cmd_gb,
    "tri": cmd_tri,
    "solve": cmd_solve,
    "inverse": cmd_inverse,
    "reproduce": cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Output(args, argv)
    try:
        status = COMMANDS[args.command](args, out)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, DomainError, DimensionError, hm.UnsupportedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InconsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    out.flush(started)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
