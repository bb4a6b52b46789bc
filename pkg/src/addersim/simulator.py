"""Switch-level simulation over a flattened netlist.

Nets are grouped into channel-connected components (CCCs).  Within one CCC,
given the switch position of every device, the steady value of each net is
the least fixpoint of "resolve the retained charge with everything conducted
in from neighbours".  ``settle`` iterates CCC solves until gate values stop
changing; ``run_transient`` does the same work event by event, delaying each
net change by the RC product of its winning drive path and its node
capacitance.
"""

from __future__ import annotations

import csv
import heapq
import io
import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from addersim.netlist import FlatNetlist
from addersim.params import ModelParams
from addersim.strength import (
    S0,
    S1,
    SX,
    Z,
    Level,
    Signal,
    Strength,
    SwitchState,
    degrade,
    from_token,
    gate_state,
    merge,
    resolve,
    retain,
    to_token,
)

# Unknown devices per CCC enumerated exactly; beyond this an X-gated device
# conducts an X of its degraded strength instead.
MAX_HYPOTHESES = 12
FS_PER_NS = 1_000_000


class ConvergenceError(RuntimeError):
    """Iteration bound exceeded while settling (an internal fault)."""


class StimulusError(ValueError):
    """Stimulus does not match the netlist's input ports."""


@dataclass(frozen=True)
class Ccc:
    nets: tuple[int, ...]
    devices: tuple[int, ...]


def partition_ccc(flat: FlatNetlist) -> list[Ccc]:
    """Group non-fixed nets joined by drain-source channels.

    Supplies and inputs are ideal drivers: they attach to every CCC they
    touch but never merge two CCCs.
    """
    n = len(flat.nets)
    rows, cols = [], []
    for d in flat.devices:
        if not flat.is_fixed(d.drain) and not flat.is_fixed(d.source):
            rows.append(d.drain)
            cols.append(d.source)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)

    members: dict[int, list[int]] = {}
    for i in range(n):
        if not flat.is_fixed(i):
            members.setdefault(int(labels[i]), []).append(i)
    devs: dict[int, list[int]] = {}
    for k, d in enumerate(flat.devices):
        for t in (d.drain, d.source):
            if not flat.is_fixed(t):
                devs.setdefault(int(labels[t]), []).append(k)
                break
    groups = sorted(members.items(), key=lambda kv: kv[1][0])
    return [Ccc(tuple(nets), tuple(devs.get(label, ()))) for label, nets in groups]


def _fixed_values(flat: FlatNetlist, inputs: Mapping[str, object]) -> dict[int, Signal]:
    names = set(flat.input_names)
    given = set(inputs)
    if names != given:
        parts = []
        if names - given:
            parts.append("missing " + ", ".join(sorted(names - given)))
        if given - names:
            parts.append("unknown " + ", ".join(sorted(given - names)))
        raise StimulusError(f"{flat.name}: input mismatch ({'; '.join(parts)})")
    fixed = {flat.vdd: S1, flat.gnd: S0}
    for name, value in inputs.items():
        fixed[flat.net(name)] = _as_signal(value)
    return fixed


def _as_signal(value) -> Signal:
    if isinstance(value, Signal):
        return value
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("0", "1"):
            return S1 if v == "1" else S0
        if v == "x":
            return SX
        raise StimulusError(f"bad input value {value!r}")
    return S1 if value else S0


class Engine:
    """Precomputed connectivity for repeated CCC solves on one netlist."""

    def __init__(self, flat: FlatNetlist, params: ModelParams | None = None):
        self.flat = flat
        self.params = params or ModelParams()
        self.cccs = partition_ccc(flat)
        n = len(flat.nets)
        self.ccc_of = [-1] * n
        for k, c in enumerate(self.cccs):
            for m in c.nets:
                self.ccc_of[m] = k
        self.gated: list[set[int]] = [set() for _ in range(n)]
        self.touching: list[set[int]] = [set() for _ in range(n)]
        for k, c in enumerate(self.cccs):
            for di in c.devices:
                d = flat.devices[di]
                self.gated[d.gate].add(k)
                for t in (d.drain, d.source):
                    if flat.is_fixed(t):
                        self.touching[t].add(k)
        self.fixed = [flat.is_fixed(i) for i in range(n)]
        self.res = [
            self.params.on_resistance(d.kind, d.width, d.length) for d in flat.devices
        ]
        self.cap_ff = node_capacitance(flat, self.params) * 1e15

    # -- one CCC -------------------------------------------------------------

    def solve(self, k: int, values: Sequence[Signal], charge: Mapping[int, Signal]):
        """Steady values and drive resistances for the members of CCC ``k``."""
        ccc = self.cccs[k]
        devs = self.flat.devices
        on, unknown = [], []
        for di in ccc.devices:
            st = gate_state(devs[di].kind, values[devs[di].gate])
            if st is SwitchState.ON:
                on.append(di)
            elif st is SwitchState.UNKNOWN:
                unknown.append(di)

        if len(unknown) <= MAX_HYPOTHESES:
            result = None
            for mask in itertools.product((True, False), repeat=len(unknown)):
                conducting = on + [di for di, m in zip(unknown, mask) if m]
                vals = self._fixpoint(ccc, conducting, (), values, charge)
                result = vals if result is None else {n: merge(result[n], vals[n]) for n in vals}
        else:
            result = self._fixpoint(ccc, on, unknown, values, charge)
        res = self._drive_resistance(ccc, on + unknown, values, result)
        return result, res

    def _fixpoint(self, ccc, conducting, x_conducting, values, charge):
        devs = self.flat.devices
        fixed = self.fixed
        val = {n: charge[n] for n in ccc.nets}
        edges = [(di, False) for di in conducting] + [(di, True) for di in x_conducting]
        changed = True
        while changed:
            changed = False
            for di, blur in edges:
                d = devs[di]
                for src, dst in ((d.drain, d.source), (d.source, d.drain)):
                    if fixed[dst]:
                        continue
                    s = degrade(d.kind, values[src] if fixed[src] else val[src])
                    if blur:
                        s = Signal(Level.LX, s.strength)
                    new = resolve(val[dst], s)
                    if new != val[dst]:
                        val[dst] = new
                        changed = True
        return val

    def _drive_resistance(self, ccc, conducting, values, final):
        """Smallest series resistance among paths delivering each net's value.

        Dijkstra over (net, source level, threshold-dropped) states seeded at
        the fixed drivers the CCC touches.
        """
        devs = self.flat.devices
        fixed = self.fixed
        adj: dict[int, list[tuple[int, int]]] = {}
        for di in conducting:
            d = devs[di]
            adj.setdefault(d.drain, []).append((d.source, di))
            adj.setdefault(d.source, []).append((d.drain, di))
        heap = []
        for f in sorted({t for di in conducting for t in (devs[di].drain, devs[di].source) if fixed[t]}):
            heap.append((0.0, f, int(values[f].level), False))
        heapq.heapify(heap)
        best: dict[tuple[int, int, bool], float] = {}
        res = {n: 0.0 for n in ccc.nets}
        found: set[int] = set()
        while heap:
            dist, net, level, dropped = heapq.heappop(heap)
            key = (net, level, dropped)
            if key in best:
                continue
            best[key] = dist
            if not fixed[net] and net not in found:
                got = Strength.WEAK if dropped else Strength.STRONG
                want = final[net]
                if got == want.strength and (want.level == level or want.level is Level.LX):
                    res[net] = dist
                    found.add(net)
            for nxt, di in adj.get(net, ()):
                if fixed[nxt]:
                    continue
                d = devs[di]
                drop = dropped or degrade(d.kind, Signal(Level(level), Strength.STRONG)).strength < Strength.STRONG
                if (nxt, level, drop) not in best:
                    heapq.heappush(heap, (dist + self.res[di], nxt, level, drop))
        return res

    # -- whole circuit -------------------------------------------------------

    def initial(self, fixed: Mapping[int, Signal], prev: Sequence[Signal] | None) -> list[Signal]:
        values = [Z] * len(self.flat.nets) if prev is None else list(prev)
        for i, s in fixed.items():
            values[i] = s
        return values

    def settle(self, fixed: Mapping[int, Signal], prev: Sequence[Signal] | None = None):
        values = self.initial(fixed, prev)
        charge = {i: retain(values[i]) for i in range(len(values)) if not self.fixed[i]}
        res = [0.0] * len(values)
        bound = len(values) * len(Strength) * 3
        for it in range(1, bound + 1):
            new = list(values)
            for k in range(len(self.cccs)):
                vals, r = self.solve(k, values, charge)
                for n, s in vals.items():
                    new[n] = s
                    res[n] = r[n]
            if new == values:
                return SettleResult(self.flat, values, res, it)
            values = new
        raise ConvergenceError(f"{self.flat.name}: no fixpoint after {bound} iterations")


@dataclass
class SettleResult:
    flat: FlatNetlist
    values: list[Signal]
    resistance: list[float]
    iterations: int

    def __getitem__(self, name: str) -> Signal:
        return self.values[self.flat.net(name)]

    def by_name(self) -> dict[str, Signal]:
        return dict(zip(self.flat.nets, self.values))


def settle(
    flat: FlatNetlist,
    inputs: Mapping[str, object],
    prev: Sequence[Signal] | None = None,
    params: ModelParams | None = None,
) -> SettleResult:
    """Steady state for one input vector, starting from ``prev`` (power-on if None).

    Retained charge comes from ``prev``; resistances are in ohms.
    """
    engine = Engine(flat, params)
    return engine.settle(_fixed_values(flat, inputs), prev)


def node_capacitance(flat: FlatNetlist, params: ModelParams) -> np.ndarray:
    """Per-net capacitance in farads: gate and source/drain terminals summed."""
    cap = np.zeros(len(flat.nets))
    for d in flat.devices:
        cap[d.gate] += params.cg
        cap[d.drain] += params.csd
        cap[d.source] += params.csd
    return cap


# -- stimulus and trace ---------------------------------------------------------


@dataclass
class Stimulus:
    inputs: tuple[str, ...]
    rows: list[dict[str, Signal]]
    times_ns: list[float] | None = None

    def __post_init__(self):
        if not self.rows:
            raise StimulusError("empty stimulus")
        for r in self.rows:
            if set(r) != set(self.inputs):
                raise StimulusError("every stimulus row must bind every input")
        if self.times_ns is not None:
            if len(self.times_ns) != len(self.rows):
                raise StimulusError("one time per row required")
            if any(b < a for a, b in zip(self.times_ns, self.times_ns[1:])) or self.times_ns[0] < 0:
                raise StimulusError("stimulus times must be non-negative and non-decreasing")

    def schedule(self, period_ns: float) -> list[float]:
        if self.times_ns is not None:
            return list(self.times_ns)
        return [k * period_ns for k in range(len(self.rows))]

    @classmethod
    def counting(cls, names=("a", "b", "c")) -> "Stimulus":
        """Binary counting sequence over ``names`` (first name is the MSB)."""
        rows = []
        for k in range(2 ** len(names)):
            bits = [(k >> (len(names) - 1 - j)) & 1 for j in range(len(names))]
            rows.append({n: (S1 if b else S0) for n, b in zip(names, bits)})
        return cls(tuple(names), rows)


def read_stimulus(source) -> Stimulus:
    """Parse stimulus CSV: ``time_ns,<inputs...>`` or bare ``<inputs...>`` rows."""
    text = source.read() if hasattr(source, "read") else Path(source).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    lines = [r for r in reader if r and any(c.strip() for c in r)]
    if not lines:
        raise StimulusError("empty stimulus file")
    header = [h.strip() for h in lines[0]]
    timed = header[0] == "time_ns"
    names = tuple(header[1:] if timed else header)
    if not names or len(set(names)) != len(names):
        raise StimulusError("stimulus header must name distinct inputs")
    rows, times = [], []
    for lineno, r in enumerate(lines[1:], start=2):
        if len(r) != len(header):
            raise StimulusError(f"stimulus line {lineno}: expected {len(header)} fields")
        cells = [c.strip() for c in r]
        if timed:
            try:
                times.append(float(cells[0]))
            except ValueError:
                raise StimulusError(f"stimulus line {lineno}: bad time {cells[0]!r}") from None
            cells = cells[1:]
        rows.append({n: _as_signal(c) for n, c in zip(names, cells)})
    return Stimulus(names, rows, times if timed else None)


def write_stimulus(stim: Stimulus) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow((["time_ns"] if stim.times_ns is not None else []) + list(stim.inputs))
    for k, row in enumerate(stim.rows):
        cells = [to_token(row[n]) for n in stim.inputs]
        w.writerow(([f"{stim.times_ns[k]:g}"] if stim.times_ns is not None else []) + cells)
    return out.getvalue()


@dataclass
class Trace:
    nets: list[str]
    changes: list[tuple[int, int, Signal]]  # (time_fs, net index, new signal)
    duration_fs: int
    vector_times_fs: list[int]
    initial: list[Signal] = field(default_factory=list)

    @property
    def duration_ps(self) -> float:
        return self.duration_fs / 1000

    def history(self, net: str) -> list[tuple[float, Signal]]:
        i = self.nets.index(net)
        return [(t / 1000, s) for t, n, s in self.changes if n == i]

    def final(self) -> dict[str, Signal]:
        values = list(self.initial)
        for _, n, s in self.changes:
            values[n] = s
        return dict(zip(self.nets, values))

    def at(self, time_fs: int) -> dict[str, Signal]:
        """Net values just before ``time_fs``."""
        values = list(self.initial)
        for t, n, s in self.changes:
            if t >= time_fs:
                break
            values[n] = s
        return dict(zip(self.nets, values))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["time_ps", "net", "signal"])
        for t, n, s in self.changes:
            w.writerow([f"{t / 1000:.3f}", self.nets[n], to_token(s)])
        return out.getvalue()


def read_trace(text: str, nets: Sequence[str], duration_fs: int, vector_times_fs=()) -> Trace:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["time_ps", "net", "signal"]:
        raise ValueError("trace CSV must start with 'time_ps,net,signal'")
    index = {n: i for i, n in enumerate(nets)}
    changes = [(round(float(t) * 1000), index[n], from_token(s)) for t, n, s in rows[1:]]
    return Trace(list(nets), changes, duration_fs, list(vector_times_fs), [Z] * len(nets))


def run_transient(flat: FlatNetlist, stim: Stimulus, params: ModelParams | None = None) -> Trace:
    """Event-driven simulation of ``stim`` from the power-on state.

    Every net change caused by an event at time t lands at t + R*C, with R
    the settled drive-path resistance and C the node capacitance; equal-time
    events are applied in ascending net index.
    """
    params = params or ModelParams()
    engine = Engine(flat, params)
    names = set(flat.input_names)
    if set(stim.inputs) != names:
        _fixed_values(flat, {n: S0 for n in stim.inputs})  # raises with details

    times_fs = [round(t * FS_PER_NS) for t in stim.schedule(params.period)]
    duration = times_fs[-1] + round(params.period * FS_PER_NS)
    values = engine.initial({flat.vdd: S1, flat.gnd: S0}, None)
    initial = list(values)

    seq = itertools.count()
    heap: list[tuple[int, int, int, Signal]] = []
    pending: dict[int, tuple[int, int, Signal]] = {}
    for t, row in zip(times_fs, stim.rows):
        for name in flat.input_names:
            heapq.heappush(heap, (t, flat.net(name), next(seq), row[name]))

    changes = []
    budget = 1000 * (len(flat.nets) + 1) * len(stim.rows)
    while heap:
        t, n, s_id, sig = heapq.heappop(heap)
        if t > duration:
            break
        if not engine.fixed[n]:
            if pending.get(n, (None, None))[1] != s_id:
                continue
            del pending[n]
        if values[n] == sig:
            continue
        values[n] = sig
        changes.append((t, n, sig))
        budget -= 1
        if budget < 0:
            raise ConvergenceError(f"{flat.name}: transient does not settle (oscillation?)")

        affected = set(engine.gated[n])
        if engine.fixed[n]:
            affected |= engine.touching[n]
        else:
            affected.add(engine.ccc_of[n])
        for k in sorted(affected):
            ccc = engine.cccs[k]
            charge = {m: retain(values[m]) for m in ccc.nets}
            vals, res = engine.solve(k, values, charge)
            for m in ccc.nets:
                target = vals[m]
                if target == values[m]:
                    pending.pop(m, None)
                    continue
                if m in pending and pending[m][2] == target:
                    continue
                when = t + round(res[m] * engine.cap_ff[m])
                entry = (when, next(seq), target)
                pending[m] = entry
                heapq.heappush(heap, (when, m, entry[1], target))

    return Trace(list(flat.nets), changes, duration, times_fs, initial)


# -- hazards -------------------------------------------------------------------


@dataclass(frozen=True)
class Hazard:
    kind: str  # static-path | floating | weak-output | unknown-output
    net: str
    message: str


def detect_hazards(
    flat: FlatNetlist,
    inputs: Mapping[str, object],
    prev: Sequence[Signal] | None = None,
    result: SettleResult | None = None,
) -> list[Hazard]:
    """Settle one vector and report contention, floating and weak outputs."""
    if result is None:
        result = settle(flat, inputs, prev)
    values = result.values
    fixed = [flat.is_fixed(i) for i in range(len(flat.nets))]
    on = [d for d in flat.devices if gate_state(d.kind, values[d.gate]) is SwitchState.ON]
    out: list[Hazard] = []

    # Contention: an ON-connected group reaching drivers at both levels.
    adj: dict[int, list[int]] = {}
    for d in on:
        if fixed[d.drain] and fixed[d.source]:
            if {values[d.drain].level, values[d.source].level} == {Level.L0, Level.L1}:
                out.append(Hazard("static-path", d.name, f"{d.name} shorts {flat.nets[d.drain]} to {flat.nets[d.source]}"))
            continue
        adj.setdefault(d.drain, []).append(d.source)
        adj.setdefault(d.source, []).append(d.drain)
    seen: set[int] = set()
    static_nets: set[int] = set()
    for start in range(len(flat.nets)):
        if fixed[start] or start in seen or start not in adj:
            continue
        group, drivers, stack = [], set(), [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            group.append(u)
            for v in adj[u]:
                if fixed[v]:
                    drivers.add(v)
                elif v not in seen:
                    seen.add(v)
                    stack.append(v)
        levels = {values[v].level for v in drivers}
        if Level.L0 in levels and Level.L1 in levels:
            net = min(group)
            static_nets.update(group)
            src = ", ".join(flat.nets[v] for v in sorted(drivers))
            out.append(Hazard("static-path", flat.nets[net], f"{flat.nets[net]} conducts between {src}"))

    for i in flat.outputs:
        s = values[i]
        name = flat.nets[i]
        if s.strength <= Strength.CHARGED:
            out.append(Hazard("floating", name, f"{name} is undriven ({to_token(s)})"))
        elif s.level is Level.LX and i not in static_nets:
            out.append(Hazard("unknown-output", name, f"{name} resolves to X"))
        elif s.strength is Strength.WEAK and s.level is not Level.LX:
            out.append(Hazard("weak-output", name, f"{name} is threshold-degraded ({to_token(s)})"))
    return out
