import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from addersim import cells
from addersim.netlist import (
    Design,
    Device,
    NetKind,
    NetlistError,
    NetlistSyntaxError,
    Subckt,
    count_transistors,
    flatten,
    parse,
    serialize,
    validate,
)
from addersim.strength import Kind

from conftest import INVERTER

XOR_PAIR = """\
.subckt xor3 a b out
M1 out b a p
M2 out a b p
M3 out gnd gnd p
.ends
.subckt top a b c y
.inputs a b c
.outputs y
X1 a b t xor3
X2 t c y xor3
.ends
"""


def test_parse_inverter():
    d = parse(INVERTER)
    assert list(d.subckts) == ["inv"]
    assert len(d.top_subckt.devices) == 2
    assert d.top_subckt.inputs == ("in",)


def test_parse_gdi_cell_has_two_devices():
    d = parse(serialize(cells.build_cell("gdi")))
    devs = d.top_subckt.devices
    assert len(devs) == 2
    assert devs[0].gate == devs[1].gate == "g"
    assert {x.kind for x in devs} == {Kind.NMOS, Kind.PMOS}


def test_missing_terminal_is_a_syntax_error_on_that_line():
    text = ".subckt s in out\nM1 out in gnd n\nM2 out in vdd\n.ends\n"
    with pytest.raises(NetlistSyntaxError) as err:
        parse(text)
    assert err.value.line == 3
    assert err.value.column is not None


@pytest.mark.parametrize("text, fragment", [
    (".subckt a x\nX1 x nosuch\n.ends\n", "unknown subckt"),
    (".subckt a x y\n.ends\n.subckt b p\nX1 p a\n.ends\n", "2 ports"),
    (".subckt a x\n.ends\n.subckt a y\n.ends\n", "duplicate definition"),
    (".subckt a x\nM1 x x gnd n\nM1 x x gnd n\n.ends\n", "duplicate definition"),
    (".subckt a x\nX1 x b\n.ends\n.subckt b y\nX1 y a\n.ends\n", "cycle"),
    (".subckt a x\nM1 x x gnd q\n.ends\n", "'n' or 'p'"),
    (".subckt a x\nM1 x x gnd n w=0\n.ends\n", "positive"),
    (".subckt a x\n", "not closed"),
    (".subckt a x\n.inputs y\n.ends\n", "not a port"),
    (".bogus\n", "unknown directive"),
    (".top zz\n.subckt a x\n.ends\n", "unknown top"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(NetlistError, match=fragment):
        parse(text)


def test_comments_and_bulk():
    text = "# hi\n.global VDD VSS\n.subckt s g p n out  # GDI\nM1 out g p p p\nM2 out g n n n w=4\n.ends s\n"
    d = parse(text)
    m1, m2 = d.top_subckt.devices
    assert d.globals == ("VDD", "VSS")
    assert m1.bulk == "p" and m1.kind is Kind.PMOS
    assert m2.bulk == "n" and m2.width == 4


def test_net_names_are_case_sensitive():
    d = parse(".subckt s A a\nM1 A a gnd n\n.ends\n")
    assert {"A", "a"} <= d.top_subckt.nets


def test_serialize_round_trip_corpus():
    for name in cells.CELLS:
        d = cells.build_cell(name)
        text = serialize(d)
        again = parse(text)
        assert again == d
        assert serialize(again) == text


def test_serialize_empty_design():
    d = Design({"top": Subckt("top", ())}, "top")
    text = serialize(d)
    assert text.splitlines()[-2:] == [".subckt top", ".ends top"]
    assert parse(text) == d


def test_serialize_emits_non_default_width():
    d = Design({"s": Subckt("s", ("x",), [Device("M1", Kind.NMOS, "x", "x", "gnd", width=6)])}, "s")
    text = serialize(d)
    assert "w=6" in text and "l=" not in text
    assert parse(text) == d


def test_flatten_two_xor_instances():
    flat = flatten(parse(XOR_PAIR))
    assert count_transistors(flat) == 6
    assert "X1/M1" in [d.name for d in flat.devices]
    assert flat.kinds[flat.net("t")] is NetKind.INTERNAL


def test_flatten_empty_top():
    flat = flatten(parse(".subckt e\n.ends\n"))
    assert count_transistors(flat) == 0
    assert validate(flat) == []


@pytest.mark.parametrize("name, count", [
    ("conv28", 28), ("chow8", 8), ("serf10", 10), ("p12", 12), ("p8", 8), ("p10", 10), ("p6", 6),
])
def test_transistor_counts(corpus, name, count):
    assert count_transistors(corpus[name]) == count


def test_flatten_net_kinds_partition(corpus):
    for flat in corpus.values():
        assert len(flat.kinds) == len(flat.nets) == len(set(flat.nets))
        assert flat.kinds[:2] == [NetKind.SUPPLY_HIGH, NetKind.SUPPLY_LOW]
        for d in flat.devices:
            for t in (d.drain, d.gate, d.source):
                assert 0 <= t < len(flat.nets)


def test_port_named_like_global_is_rejected():
    with pytest.raises(NetlistError, match="collides"):
        flatten(parse(".subckt s vdd\n.ends\n"))


def _device_multiset(flat):
    return sorted(
        (d.name, d.kind.value, flat.nets[d.drain], flat.nets[d.gate], flat.nets[d.source])
        for d in flat.devices
    )


@settings(max_examples=30, deadline=None)
@given(st.randoms(use_true_random=False))
def test_flatten_independent_of_instance_order(rnd: random.Random):
    d = cells.build_cell("p12")
    base = flatten(d)
    top = d.top_subckt
    shuffled = list(top.instances)
    rnd.shuffle(shuffled)
    d2 = Design(dict(d.subckts), d.top, d.globals)
    d2.subckts[d.top] = Subckt(top.name, top.ports, list(top.devices), shuffled, top.inputs, top.outputs)
    other = flatten(d2)
    assert other.nets == base.nets
    assert other.kinds == base.kinds
    assert _device_multiset(other) == _device_multiset(base)


def test_count_invariant_under_refactoring():
    # p8 with its XOR stages inlined keeps the same leaf devices.
    flat = flatten(cells.build_cell("p8"))
    lines = [".subckt p8i a b c sum carry", ".inputs a b c", ".outputs sum carry"]
    for d in flat.devices:
        lines.append(f"M{d.name.replace('/', '_')} {flat.nets[d.drain].replace('/', '_')} "
                     f"{flat.nets[d.gate]} {flat.nets[d.source]} {d.kind.value}")
    lines.append(".ends")
    inlined = flatten(parse("\n".join(lines)))
    assert count_transistors(inlined) == count_transistors(flat) == 8


_names = st.sampled_from(["a", "b", "x", "y", "out", "n1", "gnd", "vdd"])
_devices = st.builds(
    lambda i, k, d, g, s, b, w, l: Device(f"M{i}", k, d, g, s, b, w, l),
    st.integers(0, 10**6), st.sampled_from(list(Kind)), _names, _names, _names,
    st.one_of(st.none(), _names),
    st.sampled_from([2.0, 3.0, 4.5]), st.sampled_from([2.0, 1.0]),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(_devices, max_size=8, unique_by=lambda d: d.id))
def test_round_trip_property(devices):
    sub = Subckt("s", ("a", "b", "out"), devices, inputs=("a", "b"), outputs=("out",))
    d = Design({"s": sub}, "s")
    again = parse(serialize(d))
    assert again == d
    assert parse(serialize(again)) == again


def test_validate_clean_on_conv28(corpus):
    assert validate(corpus["conv28"]) == []


def test_validate_floating_gate():
    flat = flatten(parse(".subckt s in out\n.inputs in\n.outputs out\nM1 out g gnd n\nM2 out in vdd p\n.ends\n"))
    diags = validate(flat)
    assert [d.severity for d in diags if "floating gate" in d.message] == ["error"]
    assert diags[0].line == 4
    assert diags[0].render("s.sp").startswith("s.sp:4: error: floating gate")


def test_validate_dangling_net():
    flat = flatten(parse(".subckt s in out\n.inputs in\n.outputs out\nM1 out in vdd p\nM2 out in gnd n\nM3 stub in gnd n\n.ends\n"))
    diags = validate(flat)
    assert len(diags) == 1 and "dangling net" in diags[0].message and diags[0].net == "stub"


def test_validate_missing_supply(corpus):
    assert any("missing supply" in d.message for d in validate(corpus["p6"]))
