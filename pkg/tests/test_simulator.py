import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from addersim import cells
from addersim.netlist import flatten, parse
from addersim.params import ModelParams
from addersim.simulator import (
    ConvergenceError,
    StimulusError,
    Stimulus,
    partition_ccc,
    read_stimulus,
    run_transient,
    settle,
    detect_hazards,
    write_stimulus,
)
from addersim.strength import ALL_SIGNALS, S0, S1, SX, W0, W1, Z, Level, Strength

from conftest import FIXTURES

VECTORS = list(itertools.product((0, 1), repeat=3))


def _bind(vec):
    return dict(zip("abc", vec))


def test_inverter_partition_is_one_ccc(inverter):
    (ccc,) = partition_ccc(inverter)
    assert [inverter.nets[i] for i in ccc.nets] == ["out"]
    assert len(ccc.devices) == 2


def test_supplies_and_inputs_never_merge_cccs(corpus):
    flat = corpus["p8"]
    for ccc in partition_ccc(flat):
        assert not any(flat.is_fixed(i) for i in ccc.nets)
    covered = sorted(i for c in partition_ccc(flat) for i in c.nets)
    assert covered == [i for i in range(len(flat.nets)) if not flat.is_fixed(i)]


def test_partition_covers_every_device_once(corpus):
    for flat in corpus.values():
        devs = sorted(k for c in partition_ccc(flat) for k in c.devices)
        assert devs == sorted(set(devs))


def test_settle_inverter(inverter):
    assert settle(inverter, {"in": 1})["out"] == S0
    assert settle(inverter, {"in": 0})["out"] == S1
    assert settle(inverter, {"in": "x"})["out"] == SX


def test_settle_weak_carry(corpus):
    flat = corpus["p8"]
    assert settle(flat, {"a": 1, "b": 0, "c": 1})["carry"] == W1
    assert settle(flat, {"a": 0, "b": 0, "c": 0})["carry"] == W0
    assert settle(flat, {"a": 1, "b": 1, "c": 0})["carry"].level is Level.L1


def test_settle_rejects_mismatched_inputs(corpus):
    with pytest.raises(StimulusError, match="missing c"):
        settle(corpus["p8"], {"a": 0, "b": 0})
    with pytest.raises(StimulusError, match="unknown d"):
        settle(corpus["p8"], {"a": 0, "b": 0, "c": 0, "d": 1})


def test_charge_retention_on_isolated_node():
    flat = flatten(parse(".subckt s en d q\n.inputs en d\n.outputs q\nM1 q en d n\n.ends\n"))
    first = settle(flat, {"en": 1, "d": 0})
    assert first["q"] == S0
    held = settle(flat, {"en": 0, "d": 1}, prev=first.values)
    assert held["q"].level is Level.L0 and held["q"].strength is Strength.CHARGED
    assert settle(flat, {"en": 0, "d": 1})["q"] == Z


def test_settle_is_idempotent(corpus):
    for name, flat in corpus.items():
        spec = cells.CELLS[name]
        for vec in cells.vectors(spec):
            bind = dict(zip(spec.inputs, vec))
            once = settle(flat, bind)
            twice = settle(flat, bind, prev=once.values)
            assert twice.values == once.values, (name, vec)


def test_settle_deterministic(corpus):
    flat = corpus["conv28"]
    runs = [settle(flat, _bind((1, 0, 1))).values for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(cells.ADDERS)), st.sampled_from(VECTORS), st.integers(0, 2), st.integers(0, 1))
def test_more_information_never_contradicts(name, vec, pos, bit):
    # Replacing an X input with a definite value never flips a definite level.
    flat = flatten(cells.build_cell(name))
    unknown = dict(_bind(vec))
    unknown["abc"[pos]] = "x"
    known = dict(_bind(vec))
    known["abc"[pos]] = bit
    vague = settle(flat, unknown).by_name()
    exact = settle(flat, known).by_name()
    for net, s in vague.items():
        if s.level is not Level.LX and s.strength > Strength.CHARGED:
            assert exact[net].level == s.level, net


def test_convergence_error_is_a_runtime_error():
    assert issubclass(ConvergenceError, RuntimeError)


# -- transient -----------------------------------------------------------------


def test_inverter_transient_delays(inverter):
    stim = Stimulus(("in",), [{"in": S0}, {"in": S1}])
    trace = run_transient(inverter, stim)
    out = trace.history("out")
    # Rising through the PMOS: 20k ohm * 2 fF; falling through the NMOS: 10k * 2 fF.
    assert out == [(40.0, S1), (10_020.0, S0)]


def test_repeated_vector_has_no_events(inverter):
    stim = Stimulus(("in",), [{"in": S1}, {"in": S1}])
    trace = run_transient(inverter, stim)
    assert all(t < 10_000_000 for t, _, _ in trace.changes)


def test_p12_truth_table_per_period(corpus):
    flat = corpus["p12"]
    stim = Stimulus.counting()
    trace = run_transient(flat, stim)
    for k, vec in enumerate(VECTORS):
        end = trace.vector_times_fs[k + 1] if k + 1 < len(VECTORS) else trace.duration_fs + 1
        values = trace.at(end)
        s, c = cells.reference_adder(*vec)
        assert values["sum"].level is (Level.L1 if s else Level.L0)
        assert values["carry"].level is (Level.L1 if c else Level.L0)


def test_transient_matches_settle_at_period_end(corpus):
    flat = corpus["conv28"]
    trace = run_transient(flat, Stimulus.counting())
    final = trace.final()
    last = settle(flat, _bind((1, 1, 1)))
    assert final["sum"] == last["sum"] and final["carry"] == last["carry"]


def test_transient_is_deterministic(corpus):
    flat = corpus["p6"]
    a = run_transient(flat, Stimulus.counting()).to_csv()
    b = run_transient(flat, Stimulus.counting()).to_csv()
    assert a == b
    assert a.startswith("time_ps,net,signal\n")


def test_transient_rejects_input_mismatch(corpus):
    stim = Stimulus(("a", "b"), [{"a": S0, "b": S1}])
    with pytest.raises(StimulusError):
        run_transient(corpus["p8"], stim)


def test_period_parameter_spaces_vectors(inverter):
    stim = Stimulus(("in",), [{"in": S0}, {"in": S1}])
    trace = run_transient(inverter, stim, ModelParams(freq=2e8))
    assert trace.vector_times_fs == [0, 5_000_000]


def test_stimulus_round_trip():
    stim = read_stimulus(FIXTURES.parent.parent / "stimuli" / "count8.csv")
    assert stim.inputs == ("a", "b", "c")
    assert [tuple(int(r[n].level) for n in "abc") for r in stim.rows] == VECTORS
    assert read_stimulus(__import__("io").StringIO(write_stimulus(stim))).rows == stim.rows


def test_stimulus_timed_and_errors(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("time_ns,a\n0,1\n5,x\n")
    stim = read_stimulus(p)
    assert stim.times_ns == [0.0, 5.0] and stim.rows[1]["a"] == SX
    p.write_text("a,b\n1\n")
    with pytest.raises(StimulusError):
        read_stimulus(p)
    p.write_text("a\n2\n")
    with pytest.raises(StimulusError):
        read_stimulus(p)


# -- hazards -------------------------------------------------------------------


def test_conflict_fixture_is_static_path():
    flat = flatten(parse((FIXTURES / "conflict.sp").read_text()))
    kinds = {h.kind for h in detect_hazards(flat, {"in1": 0, "in2": 1})}
    assert "static-path" in kinds
    assert detect_hazards(flat, {"in1": 1, "in2": 1}) == []


def test_conv28_has_no_hazards(corpus):
    for vec in VECTORS:
        assert detect_hazards(corpus["conv28"], _bind(vec)) == []


def test_p8_weak_carry_is_reported(corpus):
    hz = detect_hazards(corpus["p8"], _bind((0, 0, 1)))
    assert any(h.kind == "weak-output" and h.net == "carry" for h in hz)


def test_floating_output_is_reported(corpus):
    hz = detect_hazards(corpus["p6"], _bind((0, 1, 1)))
    assert any(h.kind == "floating" and h.net == "sum" for h in hz)


def test_signal_domain_is_closed_under_settle(corpus):
    for vec in VECTORS:
        assert set(settle(corpus["p6"], _bind(vec)).values) <= set(ALL_SIGNALS)
