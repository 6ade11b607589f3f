import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dqclayout.circuit import (Circuit, CircuitError, GateKind, Instruction, decompose_multiqubit,
                               depth, from_dag, gate_count, lower_gate, normalize_angle,
                               strip_final_measurements, to_dag)
from dqclayout.bench import gen_ghz

import oracles


def test_depth_and_count_trivial():
    assert depth(Circuit(2)) == 0
    assert gate_count(Circuit(2)) == 0
    c = Circuit(1)
    c.h(0)
    assert depth(c) == 1


def test_ghz6_depth_is_7():
    # hand evaluation: H, five chained CX, then the measure on q5
    assert depth(gen_ghz(6)) == 7


def test_ghz6_gate_count_is_12():
    assert gate_count(gen_ghz(6)) == 12


def test_barriers_are_free():
    c = Circuit(2)
    for _ in range(3):
        c.add("barrier", 0, 1)
    assert gate_count(c) == 0 and depth(c) == 0
    c.h(0)
    c.add("barrier", 0, 1)
    c.h(1)
    # barrier orders h(1) after h(0) but adds no layer of its own
    assert depth(c) == 2


def test_depth_skip():
    c = Circuit(2)
    c.h(0)
    c.add("remote", 0, 1, label="r0")
    c.h(1)
    assert depth(c) == 3
    assert depth(c, skip={GateKind.REMOTE}) == 2


def test_dag_edges():
    c = Circuit(2)
    c.h(0)
    c.cx(0, 1)
    assert to_dag(c).edges == [(0, 1)]
    assert to_dag(Circuit(3)).nodes == []


def test_dag_classical_edge():
    c = Circuit(2, 1)
    c.measure(0, 0)
    c.add("x", 1, condition=(0, 1))
    assert to_dag(c).edges == [(0, 1)]


def test_measure_waits_for_earlier_readers():
    c = Circuit(3, 1)
    c.measure(0, 0)
    c.add("x", 1, condition=(0, 1))
    c.measure(2, 0)
    d = to_dag(c)
    assert (1, 2) in d.edges and (0, 2) in d.edges


def test_dag_roundtrip_preserves_order_for_program_order_input():
    c = gen_ghz(4)
    assert from_dag(to_dag(c)) == c


def test_instruction_validation():
    with pytest.raises(CircuitError):
        Instruction(GateKind.CX, (0, 0))
    with pytest.raises(CircuitError):
        Instruction(GateKind.RZ, (0,))
    with pytest.raises(CircuitError):
        Instruction(GateKind.H, (0, 1))
    with pytest.raises(CircuitError):
        Circuit(1).cx(0, 1)


def test_cz_lowering_matches_oracle():
    seq = lower_gate(Instruction(GateKind.CZ, (0, 1)))
    assert [i.kind for i in seq] == [GateKind.H, GateKind.CX, GateKind.H]
    assert seq[0].qubits == (1,)
    u = oracles.unitary(Circuit(2, 0, seq))
    assert oracles.same_up_to_phase(oracles.controlled(oracles.Z, 0, 1, 2), u, 1e-12)


def test_swap_lowering_matches_oracle():
    u = oracles.unitary(Circuit(2, 0, lower_gate(Instruction(GateKind.SWAP, (0, 1)))))
    perm = np.eye(4)[[0, 2, 1, 3]]
    assert oracles.same_up_to_phase(perm, u, 1e-12)


@pytest.mark.parametrize("qs", [(0, 1, 2), (2, 0, 1), (1, 2, 0)])
def test_ccx_lowering_matches_oracle(qs):
    seq = lower_gate(Instruction(GateKind.CCX, qs))
    assert len(seq) == 15
    assert all(i.kind in (GateKind.H, GateKind.T, GateKind.TDG, GateKind.CX) for i in seq)
    u = oracles.unitary(Circuit(3, 0, seq))
    assert oracles.same_up_to_phase(oracles.ccx(*qs, 3), u, 1e-12)


def test_decompose_cx_only_unchanged():
    c = gen_ghz(3)
    assert decompose_multiqubit(c) == c


def test_decompose_keep():
    c = Circuit(2)
    c.add("cz", 0, 1)
    assert decompose_multiqubit(c, keep={GateKind.CX, GateKind.CZ}) == c
    with pytest.raises(CircuitError):
        decompose_multiqubit(c, keep={GateKind.CZ})


def test_conditioned_lowering_keeps_condition():
    c = Circuit(2, 1)
    c.add("cz", 0, 1, condition=(0, 1))
    out = decompose_multiqubit(c)
    assert all(i.condition == (0, 1) for i in out.instructions)


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_normalize_angle_range(theta):
    a = normalize_angle(theta)
    assert -math.pi < a <= math.pi
    assert abs(np.exp(1j * a) - np.exp(1j * theta)) < 1e-6


def test_strip_final_measurements_keeps_read_bits():
    c = Circuit(2, 2)
    c.h(0)
    c.measure(0, 0)
    c.add("x", 1, condition=(0, 1))
    c.measure(1, 1)
    out = strip_final_measurements(c)
    assert [i.kind for i in out.instructions] == [GateKind.H, GateKind.MEASURE, GateKind.X]


_gates = st.sampled_from(["h", "x", "s", "t", "cx", "rz", "measure"])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(_gates, st.integers(0, 3), st.integers(0, 3)), max_size=30))
def test_depth_bounded_by_count(ops):
    c = Circuit(4, 4)
    for g, a, b in ops:
        if g == "cx":
            if a != b:
                c.cx(a, b)
        elif g == "rz":
            c.rz(0.1, a)
        elif g == "measure":
            c.measure(a, b)
        else:
            c.add(g, a)
    assert 0 <= depth(c) <= gate_count(c)
    order = to_dag(c).topological_order()
    pos = {n: k for k, n in enumerate(order)}
    assert all(pos[p] < pos[s] for p, s in to_dag(c).edges)
