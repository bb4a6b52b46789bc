"""Reconstructed full-adder corpus and its primitive modules.

Each cell is built programmatically as a ``Design``; the golden netlists under
``cells/`` are ``serialize(build_cell(name))``.  Transistor counts are fixed
per design.  Topologies inside the low-count adders are reconstructions: they
honour the published device counts and the factored carry/sum equations, and
any weak, floating or contended outputs they show are findings, not bugs.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

from addersim.netlist import Design, Device, Instance, Subckt
from addersim.strength import Kind

N, P = Kind.NMOS, Kind.PMOS


@dataclass(frozen=True)
class CellSpec:
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    transistors: int
    reference: Callable[..., tuple[bool, ...]]
    note: str

    @property
    def is_adder(self) -> bool:
        return self.outputs == ("sum", "carry")


def reference_adder(a: bool, b: bool, c: bool) -> tuple[bool, bool]:
    """(sum, carry) of a one-bit full adder."""
    a, b, c = bool(a), bool(b), bool(c)
    return a ^ b ^ c, (a + b + c) >= 2


def gdi_function(g: bool, p: bool, n: bool) -> bool:
    """Boolean behaviour of a GDI cell: P when G is low, N when G is high."""
    return bool(p) if not g else bool(n)


def _m(ident, drain, gate, source, kind, **kw) -> Device:
    return Device(ident, kind, drain, gate, source, **kw)


def _sub(name, ports, inputs, outputs, devices=(), instances=()) -> Subckt:
    return Subckt(name, tuple(ports), list(devices), list(instances), tuple(inputs), tuple(outputs))


def _tsinv() -> Subckt:
    # Pull-up source is the data rail, so the "supply" is only high when rail is.
    return _sub("tsinv", ["in", "rail", "out"], ["in", "rail"], ["out"], [
        _m("M1", "out", "in", "rail", P),
        _m("M2", "out", "in", "gnd", N),
    ])


def _xor3() -> Subckt:
    # Cross-coupled PMOS pass pair plus an always-on PMOS pull-down.  The load
    # only delivers a weak 0, so either pass device overrides it.
    return _sub("xor3", ["a", "b", "out"], ["a", "b"], ["out"], [
        _m("M1", "out", "b", "a", P),
        _m("M2", "out", "a", "b", P),
        _m("M3", "out", "gnd", "gnd", P),
    ])


def _gdi() -> Subckt:
    return _sub("gdi", ["g", "p", "n", "out"], ["g", "p", "n"], ["out"], [
        _m("M1", "out", "g", "p", P),
        _m("M2", "out", "g", "n", N),
    ])


_ADDER_PORTS = (["a", "b", "c", "sum", "carry"], ["a", "b", "c"], ["sum", "carry"])


def _xor_sum() -> list[Instance]:
    return [Instance("X1", "xor3", ("a", "b", "x")), Instance("X2", "xor3", ("x", "c", "sum"))]


def _conv28() -> list[Subckt]:
    devices = []
    k = iter(range(1, 29))

    def add(d, g, s, kind):
        devices.append(_m(f"M{next(k)}", d, g, s, kind))

    # Mirror carry stage: cb = not(ab + c(a + b)).
    add("n1", "a", "vdd", P)
    add("n1", "b", "vdd", P)
    add("cb", "c", "n1", P)
    add("n2", "a", "vdd", P)
    add("cb", "b", "n2", P)
    add("n3", "a", "gnd", N)
    add("n3", "b", "gnd", N)
    add("cb", "c", "n3", N)
    add("n4", "a", "gnd", N)
    add("cb", "b", "n4", N)
    add("carry", "cb", "vdd", P)
    add("carry", "cb", "gnd", N)
    # Mirror sum stage: sb = not(abc + cb(a + b + c)).
    for x in "abc":
        add("n5", x, "vdd", P)
    add("sb", "cb", "n5", P)
    add("n6", "a", "vdd", P)
    add("n7", "b", "n6", P)
    add("sb", "c", "n7", P)
    for x in "abc":
        add("n8", x, "gnd", N)
    add("sb", "cb", "n8", N)
    add("n9", "a", "gnd", N)
    add("n10", "b", "n9", N)
    add("sb", "c", "n10", N)
    add("sum", "sb", "vdd", P)
    add("sum", "sb", "gnd", N)
    return [_sub("conv28", *_ADDER_PORTS, devices)]


def _serf10() -> list[Subckt]:
    # Two 4T XNORs without a ground path, then a 2T carry mux selected by y.
    return [_sub("serf10", *_ADDER_PORTS, [
        _m("M1", "y", "a", "b", N),
        _m("M2", "y", "b", "a", N),
        _m("M3", "m1", "a", "vdd", P),
        _m("M4", "y", "b", "m1", P),
        _m("M5", "sum", "y", "c", N),
        _m("M6", "sum", "c", "y", N),
        _m("M7", "m2", "y", "vdd", P),
        _m("M8", "sum", "c", "m2", P),
        _m("M9", "carry", "y", "a", N),
        _m("M10", "carry", "y", "c", P),
    ])]


def _chow8() -> list[Subckt]:
    top = _sub("chow8", *_ADDER_PORTS, [
        _m("M1", "carry", "x", "a", P),
        _m("M2", "carry", "x", "c", N),
    ], _xor_sum())
    return [_xor3(), top]


def _p12() -> list[Subckt]:
    top = _sub("p12", *_ADDER_PORTS, [], _xor_sum() + [
        Instance("X3", "gdi", ("a", "gnd", "b", "ab")),
        Instance("X4", "gdi", ("x", "gnd", "c", "xc")),
        Instance("X5", "gdi", ("ab", "xc", "vdd", "carry")),
    ])
    return [_xor3(), _gdi(), top]


def _p10() -> list[Subckt]:
    top = _sub("p10", *_ADDER_PORTS, [
        _m("M1", "carry", "x", "ab", P),
        _m("M2", "carry", "x", "c", N),
    ], _xor_sum() + [Instance("X3", "tsinv", ("x", "b", "ab"))])
    return [_xor3(), _tsinv(), top]


def _p8() -> list[Subckt]:
    top = _sub("p8", *_ADDER_PORTS, [
        _m("M1", "carry", "x", "b", P),
        _m("M2", "carry", "x", "c", N),
    ], _xor_sum())
    return [_xor3(), top]


def _p6() -> list[Subckt]:
    return [_sub("p6", *_ADDER_PORTS, [
        _m("M1", "x", "b", "a", P),
        _m("M2", "x", "a", "b", P),
        _m("M3", "carry", "x", "a", P),
        _m("M4", "carry", "x", "c", N),
        _m("M5", "sum", "c", "x", P),
        _m("M6", "sum", "x", "c", P),
    ])]


def _single(factory):
    return lambda: [factory()]


def _xor_ref(a, b):
    return (bool(a) ^ bool(b),)


def _tsinv_ref(in_, rail):
    return ((not in_) and bool(rail),)


def _gdi_ref(g, p, n):
    return (gdi_function(g, p, n),)


_ADDER = (("a", "b", "c"), ("sum", "carry"))

CELLS: dict[str, CellSpec] = {
    "conv28": CellSpec("conv28", *_ADDER, 28, reference_adder,
                       "conventional static CMOS mirror adder"),
    "chow8": CellSpec("chow8", *_ADDER, 8, reference_adder,
                      "8T reference: two 3T XOR stages, carry mux selecting a or c"),
    "serf10": CellSpec("serf10", *_ADDER, 10, reference_adder,
                       "SERF: two ground-free 4T XNORs plus a 2T carry mux"),
    "p12": CellSpec("p12", *_ADDER, 12, reference_adder,
                    "two 3T XOR stages; carry = ab + (a^b)c from three GDI cells"),
    "p10": CellSpec("p10", *_ADDER, 10, reference_adder,
                    "two 3T XOR stages; ab from a tri-state inverter, carry mux on a^b"),
    "p8": CellSpec("p8", *_ADDER, 8, reference_adder,
                   "two 3T XOR stages; carry = (a'b)'b + (a^b)c via one PMOS and one NMOS"),
    "p6": CellSpec("p6", *_ADDER, 6, reference_adder,
                   "2T XOR, 2T sum mux, carry = (a^b)'a + (a^b)c"),
    "tsinv": CellSpec("tsinv", ("in", "rail"), ("out",), 2, _tsinv_ref,
                      "inverter whose pull-up rail is a data signal"),
    "xor3": CellSpec("xor3", ("a", "b"), ("out",), 3, _xor_ref,
                     "3T XOR: PMOS pass pair with a weak PMOS pull-down"),
    "gdi": CellSpec("gdi", ("g", "p", "n"), ("out",), 2, _gdi_ref,
                    "basic GDI cell: common gate G, PMOS diffusion P, NMOS diffusion N"),
}

_BUILDERS = {
    "conv28": _conv28,
    "chow8": _chow8,
    "serf10": _serf10,
    "p12": _p12,
    "p10": _p10,
    "p8": _p8,
    "p6": _p6,
    "tsinv": _single(_tsinv),
    "xor3": _single(_xor3),
    "gdi": _single(_gdi),
}

# Row order of the comparison table.
ADDERS = ("conv28", "chow8", "serf10", "p12", "p8", "p10", "p6")


def build_cell(name: str) -> Design:
    try:
        subckts = _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown cell {name!r}; known: {', '.join(sorted(CELLS))}") from None
    return Design({s.name: s for s in subckts}, name)


def vectors(spec: CellSpec) -> list[tuple[int, ...]]:
    """All input vectors of ``spec`` in binary counting order."""
    k = len(spec.inputs)
    return [tuple((v >> (k - 1 - j)) & 1 for j in range(k)) for v in range(2 ** k)]
