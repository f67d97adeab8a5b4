import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from graphdd.benchgen import TopologySpec, gen_bv, gen_random, heavy_hex_edges, make_device
from graphdd.schedule import (
    DD_GATE_NAME,
    CollisionError,
    DeviceModel,
    IdleWindow,
    Instruction,
    ScheduleError,
    as_time,
    extract_idles,
    find_gaps,
    insert_gates,
    parse_circuit,
    parse_device,
    serialize_circuit,
    serialize_device,
    skipped_gaps,
)
from graphdd.validation import check_circuit, check_device

from _support import circuit, fig2_circuit, gate, line, measure


def test_parse_minimal_device():
    dev = parse_device(b'{"num_qubits": 3, "couplings": [[0,1],[1,2]], "granularity": 1, '
                       b'"x_gate_duration": 0, "max_idle": 10000}')
    assert dev.num_qubits == 3
    assert dev.coupling == {(0, 1), (1, 2)}
    assert dev.neighbors[1] == (0, 2)


def test_self_coupling_rejected():
    with pytest.raises(ScheduleError, match="self-coupling"):
        parse_device('{"num_qubits": 2, "couplings": [[0,0]]}')


@pytest.mark.parametrize("text, msg", [
    ("{not json", "malformed JSON"),
    ('{"num_qubits": 2, "couplings": [[0,1],[1,0]]}', "duplicate"),
    ('{"num_qubits": 2, "couplings": [[0,5]]}', "invalid qubit"),
    ('{"num_qubits": 2, "couplings": [[0]]}', "invalid coupling"),
    ('{"num_qubits": 2, "granularity": 0}', "granularity"),
    ('{"num_qubits": 2, "x_gate_duration": 50, "max_idle": 100}', "max_idle"),
    ('{"couplings": []}', "num_qubits"),
])
def test_bad_devices(text, msg):
    with pytest.raises(ScheduleError, match=msg):
        parse_device(text)


def test_heavy_hex_has_144_edges():
    dev = make_device(TopologySpec("heavy_hex", 127))
    again = parse_device(serialize_device(dev))
    assert len(again.coupling) == 144
    # brute-force degree check: heavy-hex nodes have degree 1..3
    degree = {q: len(again.neighbors[q]) for q in range(127)}
    assert max(degree.values()) == 3 and min(degree.values()) >= 1
    assert len(heavy_hex_edges()) == sum(degree.values()) // 2


def test_device_roundtrip_keeps_t2():
    dev = DeviceModel(2, frozenset({(0, 1)}), 2, 4, 100, t2=(5000, 6000))
    assert parse_device(serialize_device(dev)) == dev


def test_empty_circuit_is_valid():
    c = parse_circuit('{"device": "d", "num_qubits": 2, "instructions": []}', line(2))
    assert c.instructions == ()
    assert extract_idles(c) == []


def test_overlap_rejected():
    raw = {"device": "d", "num_qubits": 1, "instructions": [
        {"kind": "gate", "name": "a", "qubits": [0], "start": 0, "duration": 100},
        {"kind": "gate", "name": "b", "qubits": [0], "start": 50, "duration": 100},
    ]}
    with pytest.raises(ScheduleError, match="overlap on qubit 0"):
        parse_circuit(json.dumps(raw))


def test_unknown_qubit_rejected():
    raw = {"num_qubits": 1, "instructions": [{"kind": "measure", "qubits": [3], "start": 0, "duration": 5}]}
    with pytest.raises(ScheduleError, match="unknown qubit"):
        parse_circuit(raw)


def test_circuit_wider_than_device_rejected():
    with pytest.raises(ScheduleError):
        check_circuit(circuit(3, gate(2, 0, 10)), line(2))


@pytest.mark.parametrize("kwargs", [
    dict(kind="teleport", qubits=(0,), start=0, duration=1),
    dict(kind="gate", qubits=(0,), start=0, duration=0, name="h"),
    dict(kind="gate", qubits=(0,), start=-1, duration=1, name="h"),
    dict(kind="gate", qubits=(0,), start=0, duration=1),
])
def test_bad_instructions(kwargs):
    with pytest.raises(ScheduleError):
        Instruction(**kwargs)


def test_check_device_accepts_several_forms():
    dev = line(2)
    assert check_device(dev) is dev
    assert check_device({"num_qubits": 2, "couplings": [[0, 1]]}).coupling == {(0, 1)}
    with pytest.raises(TypeError):
        check_device(42)


def test_as_time():
    assert as_time("3/2") == Fraction(3, 2)
    assert as_time(Fraction(4, 2)) == 2 and isinstance(as_time(Fraction(4, 2)), int)
    assert as_time(5.0) == 5
    for bad in ("x", True, 1.5):
        with pytest.raises(ScheduleError):
            as_time(bad)


def test_single_gap():
    c = circuit(1, gate(0, 0, 10), gate(0, 110, 10))
    (w,) = extract_idles(c)
    assert (w.qubit, w.start, w.end) == (0, 10, 110)


def test_no_gaps():
    assert extract_idles(circuit(1, gate(0, 0, 10), gate(0, 10, 10))) == []


def test_leading_and_trailing_time_excluded():
    c = circuit(2, gate(0, 0, 10), gate(1, 50, 10), measure(0, 500), measure(1, 300))
    gaps = find_gaps(c)
    assert gaps == [(0, 10, 500), (1, 60, 300)]


def test_barrier_cuts_and_delay_is_transparent():
    c = circuit(
        1,
        gate(0, 0, 10),
        Instruction("delay", (0,), 10, 40),
        Instruction("barrier", (0,), 100, 0),
        measure(0, 200),
    )
    assert find_gaps(c) == [(0, 10, 100), (0, 100, 200)]


def test_short_idles_skipped():
    dev = line(1, granularity=4, x_dur=10)
    c = circuit(1, gate(0, 0, 10), gate(0, 30, 10), gate(0, 100, 10))
    assert skipped_gaps(c, dev.min_idle()) == [(0, 10, 30)]
    assert [(w.start, w.end) for w in extract_idles(c, dev.min_idle())] == [(40, 100)]


def test_fig2_equivalent_has_nine_windows():
    ws = extract_idles(fig2_circuit())
    assert [w.id for w in ws] == list(range(9))
    assert all(w.origin == (w.id, 0) for w in ws)


def test_insert_identity_and_direct_placement():
    dev = line(1, x_dur=10)
    c = circuit(1, gate(0, 0, 10), gate(0, 1010, 10))
    assert insert_gates(c, [IdleWindow(0, 0, 10, 1010)], dev) is c
    out = insert_gates(c, [IdleWindow(0, 0, 10, 1010, gates=(10, 510))], dev)
    dd = [i for i in out.instructions if i.is_dd]
    assert [(i.start, i.duration, i.name) for i in dd] == [(10, 10, DD_GATE_NAME), (510, 10, DD_GATE_NAME)]
    assert set(c.instructions) <= set(out.instructions)


def test_insert_collision_detected():
    dev = line(1, x_dur=10)
    c = circuit(1, gate(0, 0, 10), gate(0, 100, 10))
    with pytest.raises(CollisionError):
        insert_gates(c, [IdleWindow(0, 0, 10, 100, gates=(95,))], dev)


def test_dd_gates_may_sit_inside_delays():
    dev = line(1, x_dur=10)
    c = circuit(1, gate(0, 0, 10), Instruction("delay", (0,), 10, 90), gate(0, 100, 10))
    out = insert_gates(c, [IdleWindow(0, 0, 10, 100, gates=(20, 60))], dev)
    assert check_circuit(out) is out
    assert out.dd_gate_count == 2


def test_bv_roundtrip_is_byte_stable():
    dev = line(5)
    c = gen_bv(5, dev)
    data = serialize_circuit(c)
    again = parse_circuit(data, dev)
    assert again == c
    assert serialize_circuit(again) == data


def test_rational_times_roundtrip():
    c = circuit(1, gate(0, 0, 10), Instruction("gate", (0,), Fraction(61, 3), 0, DD_GATE_NAME), gate(0, 100, 10))
    data = serialize_circuit(c)
    assert '"61/3"' in data.decode()
    assert parse_circuit(data) == c


def test_output_sorted_by_start_then_qubit():
    c = circuit(3, gate(2, 0, 10), gate(0, 5, 10), gate(1, 0, 10))
    rows = json.loads(serialize_circuit(c))["instructions"]
    assert [(r["start"], r["qubits"]) for r in rows] == [(0, [1]), (0, [2]), (5, [0])]


@settings(max_examples=40, deadline=None)
@given(width=st.integers(1, 8), depth=st.integers(0, 12), seed=st.integers(0, 10_000))
def test_random_circuits_roundtrip_and_windows_disjoint(width, depth, seed):
    dev = make_device(TopologySpec("line", width))
    c = gen_random(width, depth, seed, dev)
    assert parse_circuit(serialize_circuit(c), dev) == c
    ws = extract_idles(c)
    per = {}
    for w in ws:
        per.setdefault(w.qubit, []).append((w.start, w.end))
        # every window lies in a gap: no instruction on that qubit intersects it
        for inst in c.on_qubit(w.qubit):
            if inst.kind != "barrier":
                assert inst.end <= w.start or inst.start >= w.end
    for spans in per.values():
        spans.sort()
        assert all(b[0] >= a[1] for a, b in zip(spans, spans[1:]))
