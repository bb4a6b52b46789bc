"""Transistor count, area, delay, power and power-delay product per design.

All analog figures are switch-level model estimates: node energy is
1/2 C dV^2 per level change, delay is the last carry event after each vector.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from dataclasses import dataclass

from addersim import cells
from addersim.netlist import FlatNetlist, NetKind, count_transistors, flatten
from addersim.params import ModelParams
from addersim.simulator import Stimulus, Trace, detect_hazards, node_capacitance, run_transient, settle
from addersim.strength import Level, Signal, Strength

__all__ = [
    "ModelParams",
    "MetricsRow",
    "build_report",
    "estimate_area",
    "estimate_power",
    "extract_cout_delay",
    "render_csv",
    "render_markdown",
    "total_capacitance",
]

CSV_HEADER = ["design", "transistors", "area_lambda2", "cout_delay_ns", "avg_power_uw", "pdp_uw_ns"]


def node_voltage(s: Signal, params: ModelParams) -> float:
    """Voltage of a definite level; weak levels sit one threshold off the rail."""
    weak = s.strength is Strength.WEAK
    if s.level is Level.L1:
        return params.vdd - params.vtn if weak else params.vdd
    return params.vtp if weak else 0.0


def swing(old: Signal, new: Signal, params: ModelParams) -> float:
    if old.level == new.level:
        return 0.0
    if Level.LX in (old.level, new.level):
        return params.vdd
    return abs(node_voltage(new, params) - node_voltage(old, params))


def trace_energy(trace: Trace, flat: FlatNetlist, params: ModelParams) -> float:
    """Switching energy in joules over the whole trace."""
    cap = node_capacitance(flat, params)
    index = [flat.net(n) for n in trace.nets]
    values = list(trace.initial)
    energy = 0.0
    for _, n, s in trace.changes:
        dv = swing(values[n], s, params)
        energy += 0.5 * cap[index[n]] * dv * dv
        values[n] = s
    return energy


def estimate_power(trace: Trace, flat: FlatNetlist, params: ModelParams) -> float:
    """Average dynamic power in microwatts."""
    if trace.duration_fs <= 0:
        raise ValueError("trace has zero duration")
    return trace_energy(trace, flat, params) / (trace.duration_fs * 1e-15) * 1e6


def estimate_area(flat: FlatNetlist, params: ModelParams | None = None) -> float:
    """Layout area estimate in lambda^2: k_layout times the summed W*L."""
    params = params or ModelParams()
    return params.k_layout * sum(d.width * d.length for d in flat.devices)


def total_capacitance(flat: FlatNetlist, params: ModelParams | None = None) -> float:
    """Switchable capacitance in farads, supplies excluded."""
    params = params or ModelParams()
    cap = node_capacitance(flat, params)
    return float(sum(c for c, k in zip(cap, flat.kinds)
                     if k not in (NetKind.SUPPLY_HIGH, NetKind.SUPPLY_LOW)))


def extract_cout_delay(trace: Trace, params: ModelParams | None = None, net: str = "carry") -> float:
    """Worst time from a vector's application to the last carry change, in ns."""
    if net not in trace.nets:
        raise ValueError(f"trace has no carry-out net {net!r}")
    params = params or ModelParams()
    starts = list(trace.vector_times_fs) or list(
        range(0, trace.duration_fs, round(params.period * 1_000_000))
    )
    bounds = starts[1:] + [trace.duration_fs + 1]
    i = trace.nets.index(net)
    worst = 0
    for start, stop in zip(starts, bounds):
        last = [t for t, n, _ in trace.changes if n == i and start <= t < stop]
        if last:
            worst = max(worst, last[-1] - start)
    return worst / 1_000_000


@dataclass
class MetricsRow:
    design: str
    transistors: int
    area_lambda2: float | None = None
    cout_delay_ns: float | None = None
    avg_power_uw: float | None = None
    hazards: int | None = None
    error: str | None = None

    @property
    def pdp_uw_ns(self) -> float | None:
        if self.avg_power_uw is None or self.cout_delay_ns is None:
            return None
        return self.avg_power_uw * self.cout_delay_ns


def _resolve_design(item) -> tuple[str, FlatNetlist]:
    if isinstance(item, FlatNetlist):
        return item.name, item
    if isinstance(item, tuple):
        return item
    return item, flatten(cells.build_cell(item))


def evaluate(name: str, flat: FlatNetlist, params: ModelParams, stimulus: Stimulus | None = None) -> MetricsRow:
    row = MetricsRow(name, count_transistors(flat))
    row.area_lambda2 = estimate_area(flat, params)
    try:
        stim = stimulus or Stimulus.counting(tuple(flat.input_names))
        trace = run_transient(flat, stim, params)
        row.avg_power_uw = estimate_power(trace, flat, params)
        row.cout_delay_ns = extract_cout_delay(trace, params)
        hazards = 0
        for bind in stim.rows:
            hazards += len(detect_hazards(flat, bind, result=settle(flat, bind, params=params)))
        row.hazards = hazards
    except Exception as exc:  # annotated per row; the report keeps going
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def build_report(designs: Sequence, params: ModelParams | None = None, stimulus: Stimulus | None = None) -> list[MetricsRow]:
    """One row per design, in the order given.

    ``designs`` holds corpus cell names, ``FlatNetlist`` objects or
    ``(name, FlatNetlist)`` pairs.
    """
    params = params or ModelParams()
    rows = []
    for item in designs:
        name, flat = _resolve_design(item)
        rows.append(evaluate(name, flat, params, stimulus))
    return rows


def _num(x, fmt):
    return "" if x is None else format(x, fmt)


def render_csv(rows: Sequence[MetricsRow]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([
            r.design, r.transistors, _num(r.area_lambda2, "g"),
            _num(r.cout_delay_ns, ".6g"), _num(r.avg_power_uw, ".6g"), _num(r.pdp_uw_ns, ".6g"),
        ])
    return out.getvalue()


def render_markdown(rows: Sequence[MetricsRow], params: ModelParams | None = None) -> str:
    params = params or ModelParams()
    lines = [
        "| design | transistors | area (λ²) | Cout delay (ns) | avg power (µW) | PDP (µW·ns) | hazards | note |",
        "|---|---:|---:|---:|---:|---:|---:|---|",
    ]
    for r in rows:
        lines.append(
            f"| {r.design} | {r.transistors} | {_num(r.area_lambda2, 'g')} | {_num(r.cout_delay_ns, '.4f')} "
            f"| {_num(r.avg_power_uw, '.4f')} | {_num(r.pdp_uw_ns, '.4f')} | {_num(r.hazards, 'd')} | {r.error or ''} |"
        )
    lines.append("")
    lines.append(
        f"Delay and power are switch-level RC estimates at vdd={params.vdd:g} V, "
        f"{params.period:g} ns per vector; they are not analog simulation results."
    )
    return "\n".join(lines) + "\n"
