"""Command-line front end.

Exit codes: 0 success, 2 functional failure (wrong level, conflict, floating
output, lint error), 3 parse/IO/config error, 4 stimulus does not match the
netlist inputs.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from addersim import cells
from addersim.metrics import build_report, estimate_power, extract_cout_delay, render_csv, render_markdown
from addersim.netlist import NetlistError, flatten, parse_file, serialize, validate
from addersim.oracle import verify_flat
from addersim.params import ModelParams, load_config
from addersim.simulator import ConvergenceError, StimulusError, read_stimulus, run_transient

EXIT_OK, EXIT_FAIL, EXIT_IO, EXIT_STIMULUS = 0, 2, 3, 4
PARAM_FLAGS = ("vdd", "vtn", "vtp", "rn", "rp", "cg", "csd", "freq", "period_ns")

log = logging.getLogger("addersim")


class UsageError(Exception):
    pass


def _params(args) -> ModelParams:
    try:
        config = load_config(args.config)
        merged = {k: v for k, v in config.items() if k in ModelParams.__dataclass_fields__}
        merged.update({k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k) is not None})
        return ModelParams(**merged)
    except (OSError, ValueError) as exc:
        raise UsageError(f"configuration: {exc}") from exc


def _load(target: str):
    """Corpus cell name or netlist path -> (FlatNetlist, source filename or None)."""
    if target in cells.CELLS:
        return flatten(cells.build_cell(target)), None
    path = Path(target)
    if not path.is_file():
        raise UsageError(f"{target}: no such cell or file")
    try:
        design = parse_file(path)
    except (NetlistError, UnicodeDecodeError) as exc:
        raise UsageError(f"{target}: {exc}") from exc
    return flatten(design, source=str(path)), str(path)


def _spec_for(flat) -> cells.CellSpec:
    spec = cells.CELLS.get(flat.name)
    if spec and list(spec.inputs) == flat.input_names and list(spec.outputs) == flat.output_names:
        return spec
    if flat.input_names == ["a", "b", "c"] and flat.output_names == ["sum", "carry"]:
        return cells.CellSpec(flat.name, ("a", "b", "c"), ("sum", "carry"), len(flat.devices),
                              cells.reference_adder, "user netlist")
    raise UsageError(f"{flat.name}: cannot infer a reference function (expected inputs a b c, outputs sum carry)")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_list(args) -> int:
    width = max(len(n) for n in cells.CELLS)
    for name in sorted(cells.CELLS):
        spec = cells.CELLS[name]
        print(f"{name:<{width}}  {spec.transistors:>2}T  {spec.note}")
    return EXIT_OK


def cmd_netlist(args) -> int:
    if args.cell not in cells.CELLS:
        raise UsageError(f"unknown cell {args.cell!r}")
    _emit(serialize(cells.build_cell(args.cell)), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    flat, _ = _load(args.target)
    report = verify_flat(flat, _spec_for(flat))
    _emit(report.render(), args.output)
    return EXIT_OK if report.levels_correct else EXIT_FAIL


def cmd_sim(args) -> int:
    params = _params(args)
    flat, _ = _load(args.netlist)
    try:
        stim = read_stimulus(args.stimulus)
    except (OSError, StimulusError) as exc:
        raise UsageError(f"{args.stimulus}: {exc}") from exc
    trace = run_transient(flat, stim, params)
    _emit(trace.to_csv(), args.output)

    toggles = {}
    for _, n, _ in trace.changes:
        toggles[trace.nets[n]] = toggles.get(trace.nets[n], 0) + 1
    out = sys.stderr if not args.output else sys.stdout
    print(f"{flat.name}: {len(stim.rows)} vectors, {len(trace.changes)} events", file=out)
    for name in flat.nets:
        if name in toggles:
            print(f"  {name}: {toggles[name]} transitions", file=out)
    if "carry" in flat.nets:
        print(f"  cout delay: {extract_cout_delay(trace, params):.4f} ns", file=out)
    print(f"  est. power: {estimate_power(trace, flat, params):.4f} uW", file=out)
    return EXIT_OK


def cmd_lint(args) -> int:
    flat, source = _load(args.netlist)
    diags = validate(flat)
    for d in diags:
        print(d.render(source or args.netlist))
    return EXIT_FAIL if any(d.severity == "error" for d in diags) else EXIT_OK


def cmd_compare(args) -> int:
    params = _params(args)
    names = list(cells.ADDERS) if args.all else args.cells
    if not names:
        raise UsageError("compare needs cell names or --all")
    designs = []
    for name in names:
        flat, _ = _load(name)
        designs.append((name, flat))
    rows = build_report(designs, params)
    for r in rows:
        if r.error:
            log.error("%s: %s", r.design, r.error)
    text = render_csv(rows) if args.format == "csv" else render_markdown(rows, params)
    _emit(text, args.output)
    return EXIT_OK if any(r.error is None for r in rows) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model parameters")
    g.add_argument("--vdd", type=float)
    g.add_argument("--vtn", type=float)
    g.add_argument("--vtp", type=float)
    g.add_argument("--rn", type=float, help="NMOS ohms per square")
    g.add_argument("--rp", type=float, help="PMOS ohms per square")
    g.add_argument("--cg", type=float, help="gate capacitance per terminal (F)")
    g.add_argument("--csd", type=float, help="source/drain capacitance per terminal (F)")
    g.add_argument("--freq", type=float, help="vector rate (Hz)")
    g.add_argument("--period-ns", dest="period_ns", type=float)
    common.add_argument("--seedless-deterministic", action="store_true", default=True,
                        help="accepted for compatibility; runs are always deterministic")
    common.add_argument("--config", help="key=value config file (default $ADDERSIM_CONFIG or ./addersim.cfg)")
    common.add_argument("-o", "--output", help="write result here instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="addersim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", parents=[common], help="list corpus cells").set_defaults(func=cmd_list)

    p = sub.add_parser("netlist", parents=[common], help="emit a corpus cell netlist")
    p.add_argument("cell")
    p.set_defaults(func=cmd_netlist)

    p = sub.add_parser("verify", parents=[common], help="check a cell against its truth table")
    p.add_argument("target", help="corpus cell name or netlist path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sim", parents=[common], help="transient simulation to a trace CSV")
    p.add_argument("netlist")
    p.add_argument("--stimulus", required=True)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("lint", parents=[common], help="structural netlist checks")
    p.add_argument("netlist")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("compare", parents=[common], help="comparison table across designs")
    p.add_argument("cells", nargs="*")
    p.add_argument("--all", action="store_true", help="all seven adders in table order")
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"addersim: {exc}", file=sys.stderr)
        return EXIT_IO
    except StimulusError as exc:
        print(f"addersim: {exc}", file=sys.stderr)
        return EXIT_STIMULUS
    except ConvergenceError as exc:
        print(f"addersim: internal error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
