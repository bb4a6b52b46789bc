"""Brute-force checks that do not share code paths with the simulator.

``path_enumerate`` computes steady net values by guessing the level of every
internal gate net, enumerating every simple conducting path from every driver
under that guess, and keeping the guesses that reproduce themselves.  It is
exponential and only meant for small cells.
"""

from __future__ import annotations

import csv
import io
import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from addersim import cells
from addersim.netlist import FlatNetlist, flatten
from addersim.simulator import Hazard, detect_hazards, settle
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
    gate_state,
    merge,
    resolve,
    retain,
    to_token,
)

DEVICE_BUDGET = 32
GOLDEN_HEADER = ["cell", "a", "b", "c", "sum_signal", "carry_signal", "status"]


class OracleError(RuntimeError):
    pass


def _signal(v) -> Signal:
    if isinstance(v, Signal):
        return v
    if v is None:
        return SX
    return S1 if int(v) else S0


def _paths_value(flat: FlatNetlist, conducting, fixed: Mapping[int, Signal], charge: Mapping[int, Signal]):
    neighbours: dict[int, list] = {}
    for d in conducting:
        neighbours.setdefault(d.drain, []).append((d.source, d))
        neighbours.setdefault(d.source, []).append((d.drain, d))

    values = {}
    for target in charge:
        acc = charge[target]
        # Walk backwards from the target; the path's devices are applied from
        # the source end once a driver is reached.
        stack = [(target, (target,), ())]
        while stack:
            net, visited, devs = stack.pop()
            for nxt, d in neighbours.get(net, ()):
                if nxt in visited:
                    continue
                path = devs + (d,)
                if nxt in fixed:
                    sig = fixed[nxt]
                else:
                    sig = charge[nxt]
                    stack.append((nxt, visited + (nxt,), path))
                for dev in reversed(path):
                    sig = degrade(dev.kind, sig)
                acc = resolve(acc, sig)
        values[target] = acc
    return values


def path_enumerate(
    flat: FlatNetlist,
    inputs: Mapping[str, object],
    prev: Sequence[Signal] | None = None,
) -> dict[str, Signal]:
    """Steady value of every net by exhaustive path enumeration."""
    if len(flat.devices) > DEVICE_BUDGET:
        raise OracleError(f"{flat.name}: {len(flat.devices)} devices exceeds the enumeration budget of {DEVICE_BUDGET}")
    if set(inputs) != set(flat.input_names):
        raise OracleError(f"{flat.name}: inputs must be exactly {flat.input_names}")

    fixed = {flat.vdd: S1, flat.gnd: S0}
    for name, v in inputs.items():
        fixed[flat.net(name)] = _signal(v)
    charge = {}
    for i in range(len(flat.nets)):
        if i not in fixed:
            charge[i] = retain(prev[i]) if prev is not None else Z

    gate_nets = sorted({d.gate for d in flat.devices if d.gate not in fixed})
    combined = None
    for guess in itertools.product((Level.L0, Level.L1, Level.LX), repeat=len(gate_nets)):
        assumed = dict(zip(gate_nets, guess))
        sure, unsure = [], []
        for d in flat.devices:
            g = fixed[d.gate] if d.gate in fixed else Signal(assumed[d.gate], Strength.STRONG)
            state = gate_state(d.kind, g)
            if state is SwitchState.ON:
                sure.append(d)
            elif state is SwitchState.UNKNOWN:
                unsure.append(d)
        outcome = None
        for pick in itertools.product((True, False), repeat=len(unsure)):
            conducting = sure + [d for d, p in zip(unsure, pick) if p]
            vals = _paths_value(flat, conducting, fixed, charge)
            outcome = vals if outcome is None else {n: merge(outcome[n], vals[n]) for n in vals}
        if all(outcome[g].level == assumed[g] for g in gate_nets):
            combined = outcome if combined is None else {n: merge(combined[n], outcome[n]) for n in outcome}
    if combined is None:
        raise OracleError(f"{flat.name}: no self-consistent gate assignment")
    result = {flat.nets[i]: s for i, s in fixed.items()}
    result.update({flat.nets[i]: s for i, s in combined.items()})
    return {n: result[n] for n in flat.nets}


# -- verification reports --------------------------------------------------------

STATUS_ORDER = ("strong-correct", "weak-correct", "charged-correct", "floating", "conflict", "wrong-level")


def classify(expected: bool, observed: Signal) -> str:
    if observed.strength is Strength.FLOATING:
        return "floating"
    if observed.level is Level.LX:
        return "conflict"
    if observed.level != (Level.L1 if expected else Level.L0):
        return "wrong-level"
    return {
        Strength.STRONG: "strong-correct",
        Strength.WEAK: "weak-correct",
        Strength.CHARGED: "charged-correct",
    }[observed.strength]


def worst(statuses) -> str:
    return max(statuses, key=STATUS_ORDER.index)


@dataclass(frozen=True)
class VectorResult:
    inputs: tuple[int, ...]
    expected: tuple[bool, ...]
    observed: tuple[Signal, ...]
    statuses: tuple[str, ...]
    hazards: tuple[Hazard, ...] = ()

    @property
    def status(self) -> str:
        return worst(self.statuses)


@dataclass
class VerifyReport:
    cell: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    rows: list[VectorResult] = field(default_factory=list)

    @property
    def levels_correct(self) -> bool:
        return all(r.status in STATUS_ORDER[:3] for r in self.rows)

    def render(self) -> str:
        head = " ".join(self.inputs) + " | " + " ".join(self.outputs) + " | status"
        lines = [f"{self.cell}: {len(self.rows)} vectors", head]
        for r in self.rows:
            ins = " ".join(str(v) for v in r.inputs)
            outs = " ".join(f"{to_token(s):>2}" for s in r.observed)
            note = "; ".join(h.message for h in r.hazards)
            lines.append(f"{ins} | {outs} | {r.status}" + (f"  [{note}]" if note else ""))
        return "\n".join(lines) + "\n"

    def golden_rows(self) -> list[list[str]]:
        rows = []
        for r in self.rows:
            ins = [str(v) for v in r.inputs] + [""] * (3 - len(r.inputs))
            outs = [to_token(s) for s in r.observed] + [""] * (2 - len(r.observed))
            rows.append([self.cell] + ins + outs + [r.status])
        return rows


def verify_flat(flat: FlatNetlist, spec: cells.CellSpec, solver: str = "settle") -> VerifyReport:
    """Check every input vector of ``spec`` against its reference function.

    ``solver`` picks ``settle`` (the simulator) or ``oracle`` (path enumeration).
    """
    report = VerifyReport(spec.name, spec.inputs, spec.outputs)
    for vec in cells.vectors(spec):
        binding = dict(zip(spec.inputs, vec))
        if solver == "oracle":
            values = path_enumerate(flat, binding)
            hazards = ()
        else:
            result = settle(flat, binding)
            values = result.by_name()
            hazards = tuple(detect_hazards(flat, binding, result=result))
        expected = tuple(spec.reference(*vec))
        observed = tuple(values[o] for o in spec.outputs)
        statuses = tuple(classify(e, o) for e, o in zip(expected, observed))
        report.rows.append(VectorResult(vec, expected, observed, statuses, hazards))
    return report


def verify_cell(name: str, solver: str = "settle") -> VerifyReport:
    spec = cells.CELLS[name]
    return verify_flat(flatten(cells.build_cell(name)), spec, solver)


def expectation_csv(reports: Sequence[VerifyReport]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(GOLDEN_HEADER)
    for rep in reports:
        w.writerows(rep.golden_rows())
    return out.getvalue()


def write_expectations(directory, names: Sequence[str] | None = None) -> list[Path]:
    """Regenerate golden expectation tables from the path-enumeration oracle."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in names or sorted(cells.CELLS):
        path = directory / f"{name}.csv"
        path.write_text(expectation_csv([verify_cell(name, solver="oracle")]), encoding="utf-8")
        written.append(path)
    return written


# -- boolean identities ------------------------------------------------------------


@dataclass(frozen=True)
class IdentityResult:
    name: str
    expression: str
    passed: bool
    mismatches: tuple[tuple[int, ...], ...]


def _maj(a, b, c):
    return (a + b + c) >= 2


def _par(a, b, c):
    return bool(a ^ b ^ c)


_IDENTITIES = [
    # (name, expression, candidate, reference, arity, expected mismatches)
    ("carry-and-or", "ab + (a^b)c", lambda a, b, c: bool((a and b) or ((a ^ b) and c)), _maj, 3, ()),
    ("carry-expanded", "ab + abc + a'bc + ab'c",
     lambda a, b, c: bool((a and b) or (a and b and c) or ((not a) and b and c) or (a and (not b) and c)), _maj, 3, ()),
    ("carry-mux-ab", "ab(a^b)' + (a^b)c", lambda a, b, c: bool((a and b and not (a ^ b)) or ((a ^ b) and c)), _maj, 3, ()),
    ("carry-pass-b", "(a'b)'b + (a^b)c", lambda a, b, c: bool(((not ((not a) and b)) and b) or ((a ^ b) and c)), _maj, 3, ()),
    ("carry-mux-a", "(a^b)'a + (a^b)c", lambda a, b, c: bool(((not (a ^ b)) and a) or ((a ^ b) and c)), _maj, 3, ()),
    ("sum-cascade", "(a^b)^c", lambda a, b, c: bool((a ^ b) ^ c), _par, 3, ()),
    ("sum-mux", "(a^b)c' + (a^b)'c", lambda a, b, c: bool(((a ^ b) and not c) or ((not (a ^ b)) and c)), _par, 3, ()),
    ("and-from-pass", "(a'b)'b = ab", lambda a, b: bool((not ((not a) and b)) and b), lambda a, b: bool(a and b), 2, ()),
    # The complemented-product reading (ab)'b equals a'b, not ab. It differs
    # at a=0,b=1 (true where ab is false) and at a=b=1 (false where ab is true).
    ("and-misread", "(ab)'b = (a'+b')b != ab", lambda a, b: bool(((not a) or (not b)) and b),
     lambda a, b: bool(a and b), 2, ((0, 1), (1, 1))),
]


def check_identities() -> list[IdentityResult]:
    """Brute-force every factored carry/sum form against its reference."""
    results = []
    for name, expr, candidate, reference, arity, expected in _IDENTITIES:
        bad = tuple(
            v for v in itertools.product((0, 1), repeat=arity)
            if bool(candidate(*v)) != bool(reference(*v))
        )
        results.append(IdentityResult(name, expr, bad == expected, bad))
    return results
