import math
import random

import pytest

from dqclayout.backends import BUILTIN_BACKENDS, BackendSpec
from dqclayout.bench import STANDARD_BACKENDS, gen_ghz
from dqclayout.circuit import Circuit, GateKind, Instruction
from dqclayout.partition import PartitionPlan
from dqclayout.pipeline import compile_circuit
from dqclayout.transpiler import (QubitMap, TranslationError, conformance_violations,
                                  optimize_1q, route, translate_basis)

import oracles

PATH5 = BackendSpec.build("path5", 5, [(0, 1), (1, 2), (2, 3), (3, 4)], ["rz", "sx", "x", "cx"])
IBM = BUILTIN_BACKENDS["FakeVigoV2"].basis_gates
RX_BASIS = {GateKind.RZ, GateKind.RX, GateKind.CX}


def one(kind, angle=None):
    return Circuit(1, 0, [Instruction(GateKind(kind), (0,), angle=angle)])


def test_route_adjacent_unchanged():
    c = Circuit(5)
    c.cx(0, 1)
    out, qmap = route(c, PATH5)
    assert out.instructions == c.instructions
    assert qmap.l2p == [0, 1, 2, 3, 4]


def test_route_distance_two_inserts_one_swap():
    c = Circuit(5)
    c.cx(0, 2)
    out, qmap = route(c, PATH5)
    kinds = [i.kind for i in out.instructions]
    assert kinds == [GateKind.SWAP, GateKind.CX]
    assert PATH5.are_coupled(*out.instructions[1].qubits)
    assert out.instructions[0].qubits == (0, 1)
    assert qmap[0] == 1


def test_route_single_qubit_only():
    c = Circuit(3)
    c.h(0)
    c.rz(0.3, 2)
    out, qmap = route(c, PATH5)
    assert out.instructions == c.instructions and qmap.l2p == [0, 1, 2]


def test_route_fixed_qubits_stay_put():
    c = Circuit(3)
    c.cx(0, 1)
    c.add("remote", 1, 2, label="r0")
    c.cx(1, 0)
    initial = QubitMap([0, 1, 4], frozenset({2}))
    out, final = route(c, PATH5, initial)
    assert final[2] == 4
    assert out.instructions[1].qubits == (1, 4)


@pytest.mark.parametrize("kind,angle", [
    ("h", None), ("x", None), ("y", None), ("z", None), ("s", None), ("sdg", None),
    ("t", None), ("tdg", None), ("sx", None), ("rx", 0.7), ("ry", -2.1), ("rz", 1.3),
    ("rx", math.pi), ("ry", -math.pi),
])
@pytest.mark.parametrize("basis", [IBM, RX_BASIS], ids=["rz-sx-x-cx", "rz-rx-cx"])
def test_translation_matches_oracle(kind, angle, basis):
    c = one(kind, angle)
    out = translate_basis(c, basis)
    assert all(i.kind in basis for i in out.instructions)
    assert oracles.same_up_to_phase(oracles.unitary(c), oracles.unitary(out), 1e-12)


def test_h_rule_shape():
    out = translate_basis(one("h"), IBM)
    assert [(i.kind, i.angle) for i in out.instructions] == [
        (GateKind.RZ, math.pi / 2), (GateKind.SX, None), (GateKind.RZ, math.pi / 2)]


def test_native_rz_unchanged():
    c = one("rz", 0.4)
    assert translate_basis(c, IBM) == c


def test_cz_must_be_lowered_first():
    c = Circuit(2)
    c.add("cz", 0, 1)
    with pytest.raises(TranslationError):
        translate_basis(c, IBM)


def test_optimize_merges_rz():
    c = Circuit(1)
    c.rz(math.pi / 4, 0)
    c.rz(math.pi / 4, 0)
    out = optimize_1q(c)
    assert len(out) == 1 and out.instructions[0].angle == pytest.approx(math.pi / 2)


def test_optimize_cancels_xx_and_zero_rz():
    c = Circuit(1)
    c.x(0)
    c.x(0)
    c.rz(0.0, 0)
    assert len(optimize_1q(c)) == 0


def test_optimize_does_not_cross_cx_or_conditions():
    c = Circuit(2, 1)
    c.rz(0.2, 0)
    c.cx(0, 1)
    c.rz(-0.2, 0)
    c.add("x", 1, condition=(0, 1))
    c.x(1)
    assert optimize_1q(c) == c


def test_optimize_preserves_unitary():
    rng = random.Random(5)
    for _ in range(20):
        c = Circuit(2)
        for _ in range(20):
            r = rng.random()
            if r < 0.4:
                c.rz(rng.choice([0.0, math.pi, -math.pi / 2, rng.uniform(-4, 4)]), rng.randrange(2))
            elif r < 0.7:
                c.x(rng.randrange(2))
            elif r < 0.85:
                c.add("sx", rng.randrange(2))
            else:
                c.cx(0, 1)
        assert oracles.same_up_to_phase(oracles.unitary(c), oracles.unitary(optimize_1q(c)), 1e-10)


def test_ghz6_group1_on_athens_conforms():
    plan = PartitionPlan.from_ranges(["q0-q1", "q2-q3", "q4-q5"], ["Q0", "Q1", "Q2"],
                                     STANDARD_BACKENDS)
    comp = compile_circuit(gen_ghz(6), plan)
    athens = [c for c in comp.compiled if c.backend == "FakeAthensV2"]
    assert athens and conformance_violations(athens[0], BUILTIN_BACKENDS["FakeAthensV2"]) == []


def test_empty_subcircuit():
    c = Circuit(3)
    plan = PartitionPlan.from_ranges(["q0-q2"], ["Q0"], {"Q0": "FakeVigoV2"})
    comp = compile_circuit(c, plan)
    assert comp.compiled[0].circuit.instructions == []


def test_routing_on_vigo_semantics():
    # CX(0,2) and CX(2,3): 0-2 is not an edge on Vigo, so routing must swap
    c = Circuit(4)
    c.h(0)
    c.cx(0, 2)
    c.cx(2, 3)
    c.cx(3, 0)
    plan = PartitionPlan.from_ranges(["q0-q3"], ["Q0"], {"Q0": "FakeVigoV2"})
    cc = compile_circuit(c, plan).compiled[0]
    assert cc.circuit.count_ops().get("cx", 0) > 3
    assert conformance_violations(cc, BUILTIN_BACKENDS["FakeVigoV2"]) == []
    u = oracles.logical_unitary(cc, 4, 5)
    assert oracles.same_up_to_phase(oracles.unitary(c), u, 1e-9)
