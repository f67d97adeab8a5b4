"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

from collections import defaultdict
from typing import Optional

from .schedule import DeviceModel, ScheduleError, ScheduledCircuit, parse_circuit, parse_device


def check_device(device) -> DeviceModel:
    """Accept a DeviceModel, a JSON string/bytes, or a dict."""
    if isinstance(device, DeviceModel):
        return device
    if isinstance(device, (str, bytes, bytearray, dict)):
        return parse_device(device)
    raise TypeError(f"expected a DeviceModel, got {type(device).__name__}")


def check_circuit(circuit, device: Optional[DeviceModel] = None) -> ScheduledCircuit:
    """Validate qubit indices and per-qubit disjointness; return the circuit.

    Gates, measures and DD gates may not overlap on a qubit.  Delays may
    host DD gates but must not overlap any other instruction.
    """
    if isinstance(circuit, (str, bytes, bytearray, dict)):
        return parse_circuit(circuit, device)
    if not isinstance(circuit, ScheduledCircuit):
        raise TypeError(f"expected a ScheduledCircuit, got {type(circuit).__name__}")
    width = circuit.num_qubits
    if device is not None and width > device.num_qubits:
        raise ScheduleError(f"circuit uses {width} qubits, device has {device.num_qubits}")
    busy = defaultdict(list)
    delays = defaultdict(list)
    for inst in circuit.instructions:
        for q in inst.qubits:
            if not 0 <= q < width:
                raise ScheduleError(f"unknown qubit index {q}")
        if len(set(inst.qubits)) != len(inst.qubits):
            raise ScheduleError(f"repeated qubit in {inst}")
        if inst.kind == "barrier":
            continue
        target = delays if inst.kind == "delay" else busy
        for q in inst.qubits:
            target[q].append(inst)
    for q, insts in busy.items():
        spans = sorted((i.start, i.end) for i in insts)
        for (s0, e0), (s1, _) in zip(spans, spans[1:]):
            if s1 < e0:
                raise ScheduleError(f"overlap on qubit {q} at t={s1}")
    for q, ds in delays.items():
        hard = sorted((i.start, i.end) for i in busy.get(q, ()) if not i.is_dd)
        for d in ds:
            for s, e in hard:
                if s < d.end and d.start < e:
                    raise ScheduleError(f"overlap on qubit {q}: delay at t={d.start}")
    return circuit
