"""MOS netlist dialect: data model, parser, serializer, flattener and lint.

Grammar (one statement per line, ``#`` starts a comment)::

    .global <high> <low>
    .top <subckt>
    .subckt <name> <ports...>
    .inputs <ports...>
    .outputs <ports...>
    M<id> <drain> <gate> <source> [<bulk>] n|p [w=<lambda>] [l=<lambda>]
    X<id> <nets...> <subckt>
    .ends [<name>]

Net names are case-sensitive.  The two ``.global`` nets (``vdd gnd`` unless
declared otherwise) are shared by every subckt.  ``.top`` defaults to the last
subckt defined.  The bulk terminal is recorded but never simulated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

from addersim.strength import Kind

DEFAULT_W = 2.0
DEFAULT_L = 2.0
HEADER = "# addersim netlist"

_KINDS = {"n": Kind.NMOS, "nmos": Kind.NMOS, "p": Kind.PMOS, "pmos": Kind.PMOS}


class NetlistError(ValueError):
    """Malformed or inconsistent netlist source."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class NetlistSyntaxError(NetlistError):
    pass


@dataclass(frozen=True)
class Device:
    id: str
    kind: Kind
    drain: str
    gate: str
    source: str
    bulk: str | None = None
    width: float = DEFAULT_W
    length: float = DEFAULT_L
    line: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.width > 0 and self.length > 0):
            raise NetlistError(f"{self.id}: width and length must be positive", self.line)

    @property
    def terminals(self) -> tuple[str, str, str]:
        return (self.drain, self.gate, self.source)


@dataclass(frozen=True)
class Instance:
    id: str
    subckt: str
    nets: tuple[str, ...]
    line: int | None = field(default=None, compare=False)


@dataclass
class Subckt:
    name: str
    ports: tuple[str, ...]
    devices: list[Device] = field(default_factory=list)
    instances: list[Instance] = field(default_factory=list)
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    line: int | None = field(default=None, compare=False)

    @property
    def nets(self) -> set[str]:
        names = set(self.ports)
        for d in self.devices:
            names.update(d.terminals)
            if d.bulk is not None:
                names.add(d.bulk)
        for inst in self.instances:
            names.update(inst.nets)
        return names


@dataclass
class Design:
    subckts: dict[str, Subckt]
    top: str
    globals: tuple[str, str] = ("vdd", "gnd")

    @property
    def vdd(self) -> str:
        return self.globals[0]

    @property
    def gnd(self) -> str:
        return self.globals[1]

    @property
    def top_subckt(self) -> Subckt:
        return self.subckts[self.top]


# -- parsing ---------------------------------------------------------------


def _tokens(line: str) -> list[tuple[str, int]]:
    out = []
    i, n = 0, len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def _number(tok: str, col: int, lineno: int) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise NetlistSyntaxError(f"expected a number, got {tok!r}", lineno, col) from None
    if not value > 0:
        raise NetlistSyntaxError(f"dimension must be positive, got {tok!r}", lineno, col)
    return value


def _parse_device(toks, lineno: int) -> Device:
    ident = toks[0][0]
    positional, attrs = [], {}
    for tok, col in toks[1:]:
        if "=" in tok:
            key, _, val = tok.partition("=")
            key = key.lower()
            if key not in ("w", "l"):
                raise NetlistSyntaxError(f"unknown device attribute {key!r}", lineno, col)
            if key in attrs:
                raise NetlistSyntaxError(f"attribute {key!r} given twice", lineno, col)
            attrs[key] = _number(val, col + len(key) + 1, lineno)
        elif attrs:
            raise NetlistSyntaxError("terminal after attributes", lineno, col)
        else:
            positional.append((tok, col))
    if len(positional) not in (4, 5):
        col = positional[-1][1] if positional else toks[0][1]
        raise NetlistSyntaxError(
            f"{ident}: expected '<drain> <gate> <source> [<bulk>] n|p', got {len(positional)} fields",
            lineno,
            col,
        )
    kind_tok, kind_col = positional[-1]
    kind = _KINDS.get(kind_tok.lower())
    if kind is None:
        raise NetlistSyntaxError(f"{ident}: device type must be 'n' or 'p', got {kind_tok!r}", lineno, kind_col)
    nets = [t for t, _ in positional[:-1]]
    bulk = nets[3] if len(nets) == 4 else None
    return Device(
        ident, kind, nets[0], nets[1], nets[2], bulk,
        attrs.get("w", DEFAULT_W), attrs.get("l", DEFAULT_L), line=lineno,
    )


def parse(text: str) -> Design:
    """Parse netlist source into a ``Design``; raises ``NetlistError``."""
    subckts: dict[str, Subckt] = {}
    globals_ = ("vdd", "gnd")
    seen_global = False
    top: str | None = None
    top_line = None
    current: Subckt | None = None
    ids: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw.split("#", 1)[0])
        if not toks:
            continue
        head, col = toks[0]
        word = head.lower()
        args = [t for t, _ in toks[1:]]

        if word == ".global":
            if seen_global:
                raise NetlistError("duplicate .global declaration", lineno, col)
            if len(args) != 2 or args[0] == args[1]:
                raise NetlistSyntaxError(".global needs two distinct net names", lineno, col)
            if subckts or current is not None:
                raise NetlistSyntaxError(".global must precede all subckts", lineno, col)
            globals_ = (args[0], args[1])
            seen_global = True
        elif word == ".top":
            if len(args) != 1:
                raise NetlistSyntaxError(".top takes one subckt name", lineno, col)
            if top is not None:
                raise NetlistError("duplicate .top declaration", lineno, col)
            top, top_line = args[0], lineno
        elif word == ".subckt":
            if current is not None:
                raise NetlistSyntaxError("nested .subckt (missing .ends)", lineno, col)
            if not args:
                raise NetlistSyntaxError(".subckt needs a name", lineno, col)
            name, ports = args[0], tuple(args[1:])
            if name in subckts:
                raise NetlistError(f"duplicate definition of subckt {name!r}", lineno, toks[1][1])
            if len(set(ports)) != len(ports):
                raise NetlistError(f"subckt {name!r} repeats a port name", lineno, col)
            current = Subckt(name, ports, line=lineno)
            ids = set()
        elif word == ".ends":
            if current is None:
                raise NetlistSyntaxError(".ends without .subckt", lineno, col)
            if args and args[0] != current.name:
                raise NetlistSyntaxError(f".ends {args[0]} closes {current.name}", lineno, toks[1][1])
            subckts[current.name] = current
            current = None
        elif word in (".inputs", ".outputs"):
            if current is None:
                raise NetlistSyntaxError(f"{word} outside .subckt", lineno, col)
            for (tok, tcol) in toks[1:]:
                if tok not in current.ports:
                    raise NetlistError(f"{tok!r} is not a port of {current.name}", lineno, tcol)
                if tok in current.inputs or tok in current.outputs:
                    raise NetlistError(f"port {tok!r} given a direction twice", lineno, tcol)
                if word == ".inputs":
                    current.inputs += (tok,)
                else:
                    current.outputs += (tok,)
        elif word.startswith("."):
            raise NetlistSyntaxError(f"unknown directive {head!r}", lineno, col)
        elif word[0] in "mx":
            if current is None:
                raise NetlistSyntaxError(f"{head} outside .subckt", lineno, col)
            if head in ids:
                raise NetlistError(f"duplicate definition of {head!r} in {current.name}", lineno, col)
            ids.add(head)
            if word[0] == "m":
                current.devices.append(_parse_device(toks, lineno))
            else:
                if not args:
                    raise NetlistSyntaxError(f"{head}: missing subckt name", lineno, col)
                current.instances.append(Instance(head, args[-1], tuple(args[:-1]), line=lineno))
        else:
            raise NetlistSyntaxError(f"unrecognised statement {head!r}", lineno, col)

    if current is not None:
        raise NetlistSyntaxError(f"subckt {current.name!r} not closed with .ends", current.line)
    if not subckts:
        raise NetlistError("netlist defines no subckt")
    if top is None:
        top = next(reversed(subckts))
    elif top not in subckts:
        raise NetlistError(f"unknown top subckt {top!r}", top_line)
    design = Design(subckts, top, globals_)
    check(design)
    return design


def check(design: Design) -> None:
    """Check cross-references: known subckts, port arity, acyclic hierarchy."""
    if design.vdd == design.gnd:
        raise NetlistError("supply nets must differ")
    if design.top not in design.subckts:
        raise NetlistError(f"unknown top subckt {design.top!r}")
    for sub in design.subckts.values():
        for inst in sub.instances:
            child = design.subckts.get(inst.subckt)
            if child is None:
                raise NetlistError(f"{sub.name}/{inst.id}: unknown subckt {inst.subckt!r}", inst.line)
            if len(inst.nets) != len(child.ports):
                raise NetlistError(
                    f"{sub.name}/{inst.id}: {inst.subckt} has {len(child.ports)} ports, "
                    f"{len(inst.nets)} nets given",
                    inst.line,
                )

    state: dict[str, int] = {}

    def visit(name: str, trail: tuple[str, ...]):
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            raise NetlistError("instance cycle: " + " -> ".join(trail + (name,)))
        state[name] = 1
        for inst in design.subckts[name].instances:
            visit(inst.subckt, trail + (name,))
        state[name] = 2

    for name in design.subckts:
        visit(name, ())


def parse_file(path) -> Design:
    return parse(Path(path).read_text(encoding="utf-8"))


# -- serialization -----------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:g}"


def serialize(design: Design) -> str:
    lines = [HEADER, f".global {design.vdd} {design.gnd}", f".top {design.top}"]
    for sub in design.subckts.values():
        lines.append("")
        lines.append(" ".join((".subckt", sub.name) + sub.ports))
        if sub.inputs:
            lines.append(" ".join((".inputs",) + sub.inputs))
        if sub.outputs:
            lines.append(" ".join((".outputs",) + sub.outputs))
        for d in sub.devices:
            fields = [d.id, d.drain, d.gate, d.source]
            if d.bulk is not None:
                fields.append(d.bulk)
            fields.append(d.kind.value)
            if d.width != DEFAULT_W:
                fields.append(f"w={_fmt(d.width)}")
            if d.length != DEFAULT_L:
                fields.append(f"l={_fmt(d.length)}")
            lines.append(" ".join(fields))
        for inst in sub.instances:
            lines.append(" ".join((inst.id,) + inst.nets + (inst.subckt,)))
        lines.append(f".ends {sub.name}")
    return "\n".join(lines) + "\n"


# -- flattening --------------------------------------------------------------


class NetKind(enum.Enum):
    SUPPLY_HIGH = "supply-high"
    SUPPLY_LOW = "supply-low"
    INPUT = "input"
    OUTPUT = "output"
    INTERNAL = "internal"


@dataclass(frozen=True)
class FlatDevice:
    name: str
    kind: Kind
    drain: int
    gate: int
    source: int
    bulk: int | None = None
    width: float = DEFAULT_W
    length: float = DEFAULT_L
    line: int | None = field(default=None, compare=False)


@dataclass
class FlatNetlist:
    name: str
    nets: list[str]
    kinds: list[NetKind]
    devices: list[FlatDevice]
    source: str | None = None

    def __post_init__(self):
        self.index = {n: i for i, n in enumerate(self.nets)}

    def net(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise KeyError(f"{self.name} has no net {name!r}") from None

    def of_kind(self, kind: NetKind) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k is kind]

    @property
    def vdd(self) -> int:
        return self.of_kind(NetKind.SUPPLY_HIGH)[0]

    @property
    def gnd(self) -> int:
        return self.of_kind(NetKind.SUPPLY_LOW)[0]

    @property
    def inputs(self) -> list[int]:
        return self.of_kind(NetKind.INPUT)

    @property
    def outputs(self) -> list[int]:
        return self.of_kind(NetKind.OUTPUT)

    @property
    def input_names(self) -> list[str]:
        return [self.nets[i] for i in self.inputs]

    @property
    def output_names(self) -> list[str]:
        return [self.nets[i] for i in self.outputs]

    def is_fixed(self, i: int) -> bool:
        return self.kinds[i] in (NetKind.SUPPLY_HIGH, NetKind.SUPPLY_LOW, NetKind.INPUT)


def flatten(design: Design, source: str | None = None) -> FlatNetlist:
    """Expand the instance tree under ``design.top`` into one device list.

    Internal nets of instances are named by their hierarchical path
    (``X1/n3``); net indices are assigned supplies first, then top ports, then
    internal nets in name order, so the result does not depend on the order
    instances were declared in.
    """
    check(design)
    vdd, gnd = design.globals
    leaf: list[tuple[str, Device, dict[str, str]]] = []

    def expand(sub: Subckt, binding: dict[str, str], prefix: str):
        for port in sub.ports:
            if port in design.globals:
                raise NetlistError(f"port {port!r} of {sub.name} collides with a global net", sub.line)

        def local(net: str) -> str:
            if net in design.globals:
                return net
            if net in binding:
                return binding[net]
            return prefix + net

        mapping = {t: local(t) for t in sub.nets}
        for d in sub.devices:
            leaf.append((prefix + d.id, d, mapping))
        for inst in sub.instances:
            child = design.subckts[inst.subckt]
            expand(child, {p: local(n) for p, n in zip(child.ports, inst.nets)}, f"{prefix}{inst.id}/")

    top = design.top_subckt
    expand(top, {p: p for p in top.ports}, "")

    kinds: dict[str, NetKind] = {vdd: NetKind.SUPPLY_HIGH, gnd: NetKind.SUPPLY_LOW}
    for p in top.ports:
        kinds[p] = NetKind.INPUT if p in top.inputs else NetKind.OUTPUT
    internal = set()
    for _, d, m in leaf:
        for t in d.terminals + ((d.bulk,) if d.bulk is not None else ()):
            if m[t] not in kinds:
                internal.add(m[t])
    order = [vdd, gnd]
    order += [p for p in top.ports if p in top.inputs]
    order += [p for p in top.ports if p not in top.inputs]
    order += sorted(internal)
    for n in internal:
        kinds[n] = NetKind.INTERNAL
    index = {n: i for i, n in enumerate(order)}

    devices = []
    for name, d, m in leaf:
        devices.append(FlatDevice(
            name, d.kind, index[m[d.drain]], index[m[d.gate]], index[m[d.source]],
            index[m[d.bulk]] if d.bulk is not None else None,
            d.width, d.length, line=d.line,
        ))
    return FlatNetlist(design.top, order, [kinds[n] for n in order], devices, source)


def count_transistors(flat: FlatNetlist) -> int:
    return len(flat.devices)


# -- lint --------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int | None = None
    net: str | None = None

    def render(self, filename: str | None = None) -> str:
        return f"{filename or '<netlist>'}:{self.line or 0}: {self.severity}: {self.message}"


def validate(flat: FlatNetlist) -> list[Diagnostic]:
    """Structural lint; returns diagnostics, never raises."""
    channel = [[] for _ in flat.nets]
    gates = [[] for _ in flat.nets]
    for d in flat.devices:
        channel[d.drain].append(d)
        channel[d.source].append(d)
        gates[d.gate].append(d)

    out = []
    for i, name in enumerate(flat.nets):
        kind = flat.kinds[i]
        if kind in (NetKind.SUPPLY_HIGH, NetKind.SUPPLY_LOW, NetKind.INPUT):
            continue
        if gates[i] and not channel[i]:
            d = gates[i][0]
            out.append(Diagnostic("error", f"floating gate: net {name!r} drives the gate of {d.name} but nothing drives it", d.line, name))
            continue
        if kind is NetKind.OUTPUT and not channel[i]:
            out.append(Diagnostic("error", f"output {name!r} is not connected to any channel", None, name))
        elif kind is NetKind.INTERNAL and len(channel[i]) + len(gates[i]) == 1:
            d = (channel[i] or gates[i])[0]
            out.append(Diagnostic("warning", f"dangling net: {name!r} touches only {d.name}", d.line, name))
    if flat.devices:
        supplies = {flat.vdd, flat.gnd}
        if not any(t in supplies for d in flat.devices for t in (d.drain, d.gate, d.source)):
            out.append(Diagnostic("warning", "missing supply connection: no device touches vdd or gnd", flat.devices[0].line))
    return out
