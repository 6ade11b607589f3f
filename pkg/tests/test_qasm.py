import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from dqclayout.bench import gen_bitcode, gen_ghz, gen_qaoa
from dqclayout.circuit import Circuit, GateKind, Instruction
from dqclayout.qasm import EmitError, ErrorKind, ParseError, emit_qasm, parse_qasm


def test_minimal_program():
    c = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];")
    assert c.num_qubits == 2
    assert c.instructions == [Instruction(GateKind.H, (0,)), Instruction(GateKind.CX, (0, 1))]


def test_pi_literal():
    c = parse_qasm("qreg q[1]; rz(pi/2) q[0];")
    assert c.instructions[0].angle == 1.5707963267948966


def test_unknown_gate_is_semantic():
    with pytest.raises(ParseError) as e:
        parse_qasm("qreg q[1]; foo q[0];")
    assert e.value.kind is ErrorKind.SEMANTIC
    assert "foo" in str(e.value)
    assert e.value.span.line == 1 and e.value.span.column == 12


def test_error_span_line():
    with pytest.raises(ParseError) as e:
        parse_qasm("OPENQASM 2.0;\nqreg q[1];\nh q[3];\n")
    assert e.value.span.line == 3


def test_expressions():
    c = parse_qasm("qreg q[1]; rz(-pi/4 + 2*0.5^2) q[0]; rx(sin(pi/2)) q[0]; ry(-(1)) q[0];")
    assert c.instructions[0].angle == pytest.approx(-math.pi / 4 + 0.5)
    assert c.instructions[1].angle == pytest.approx(1.0)
    assert c.instructions[2].angle == -1.0


def test_broadcast_and_registers():
    c = parse_qasm("qreg a[2]; qreg b[2]; creg c[2]; cx a,b; measure b -> c;")
    assert [i.qubits for i in c.instructions] == [(0, 2), (1, 3), (2,), (3,)]
    assert [i.clbits for i in c.instructions[2:]] == [(0,), (1,)]


def test_conditions():
    c = parse_qasm("qreg q[2]; creg c[2]; creg f[1]; if(c[1]==1) x q[0]; if(f==0) z q[1];")
    assert c.instructions[0].condition == (1, 1)
    assert c.instructions[1].condition == (2, 0)
    with pytest.raises(ParseError):
        parse_qasm("qreg q[1]; creg c[2]; if(c==1) x q[0];")


def test_emit_simple():
    c = Circuit(1)
    c.h(0)
    assert "h q[0];" in emit_qasm(c)


def test_emit_rejects_placeholder():
    c = Circuit(2)
    c.add("remote", 0, 1, label="r0")
    with pytest.raises(EmitError):
        emit_qasm(c)


@pytest.mark.parametrize("c", [gen_ghz(6), gen_bitcode(3, 2, [0, 1, 0]), gen_qaoa(4)],
                         ids=["ghz6", "bitcode3", "qaoa4"])
def test_benchmark_roundtrip(c):
    assert parse_qasm(emit_qasm(c)) == c


def test_conditioned_roundtrip():
    c = Circuit(2, 3)
    c.measure(0, 2)
    c.add("x", 1, condition=(2, 1))
    c.add("rz", 0, angle=0.1 + 1e-16, condition=(2, 0))
    assert parse_qasm(emit_qasm(c)) == c


_ONE = ["h", "x", "y", "z", "s", "sdg", "t", "tdg", "sx"]
_ROT = ["rx", "ry", "rz"]


def random_circuit(rng: random.Random) -> Circuit:
    n = rng.randint(1, 6)
    m = rng.randint(0, 4)
    c = Circuit(n, m)
    for _ in range(rng.randint(0, 30)):
        r = rng.random()
        cond = (rng.randrange(m), rng.randint(0, 1)) if m and rng.random() < 0.2 else None
        if r < 0.3:
            c.add(rng.choice(_ONE), rng.randrange(n), condition=cond)
        elif r < 0.55:
            c.add(rng.choice(_ROT), rng.randrange(n), angle=rng.uniform(-10, 10), condition=cond)
        elif r < 0.75 and n >= 2:
            c.add(rng.choice(["cx", "cz", "swap"]), *rng.sample(range(n), 2), condition=cond)
        elif r < 0.8 and n >= 3:
            c.add("ccx", *rng.sample(range(n), 3))
        elif r < 0.9 and m:
            c.measure(rng.randrange(n), rng.randrange(m))
        elif r < 0.95:
            c.reset(rng.randrange(n))
        else:
            c.add("barrier", *rng.sample(range(n), rng.randint(1, n)))
    return c


def test_roundtrip_200_generated():
    rng = random.Random(2024)
    for k in range(200):
        c = random_circuit(rng)
        text = emit_qasm(c)
        assert parse_qasm(text) == c, f"circuit {k}:\n{text}"
        assert emit_qasm(parse_qasm(text)) == text


_junk = st.text(alphabet=st.sampled_from(list("qreg[]();,->=+-*/^ \n0123456789.pihcxmasureif\"")),
                max_size=80)


@settings(max_examples=400, deadline=None)
@given(_junk)
def test_fuzz_structured_errors_only(text):
    try:
        parse_qasm(text)
    except ParseError as e:
        assert e.span.line >= 1 and e.span.column >= 1
        assert isinstance(e.kind, ErrorKind)


@pytest.mark.parametrize("text", [
    "qreg q[99999999999999999999999];",
    "qreg q[1]; rz(" + "(" * 500 + "1" + ")" * 500 + ") q[0];",
    "qreg q[1]; rz(1e999) q[0];",
    "qreg q[1]; rz(1/0) q[0];",
    "qreg q[1]; qreg q[1];",
    "qreg pi[1];",
    "gate foo a { h a; } qreg q[1];",
    "\x00\xff",
    "",
])
def test_hostile_inputs(text):
    try:
        parse_qasm(text)
    except ParseError as e:
        assert e.span.line >= 1
