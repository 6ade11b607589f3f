"""
Benchmark circuit generators: GHZ, BitCode, TFIM and QAOA.

Every generator ends with a final measurement of qubit i into clbit i, so the
output bitstring reads q_{n-1} ... q_0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .circuit import Circuit

DEFAULT_TFIM = dict(steps=3, J=1.0, h=1.0, dt=0.2)
DEFAULT_QAOA = dict(gamma=0.35, beta=0.45)


def _measure_all(c: Circuit, n: int) -> Circuit:
    for q in range(n):
        c.measure(q, q)
    return c


def gen_ghz(n: int) -> Circuit:
    if n < 1:
        raise ValueError("GHZ needs at least one qubit")
    c = Circuit(n, n)
    c.h(0)
    for i in range(n - 1):
        c.cx(i, i + 1)
    return _measure_all(c, n)


def gen_bitcode(n_data: int, rounds: int = 2, initial_bits: Sequence[int] | None = None) -> Circuit:
    """Bit-flip repetition code with data and ancilla qubits interleaved (d0, a0, d1, a1, ...).

    Syndrome bits of round r, ancilla i land in clbit ``n + r*(n_data-1) + i``
    after the ``n = 2*n_data - 1`` final-measurement bits.
    """
    if n_data < 2:
        raise ValueError("BitCode needs at least two data qubits")
    bits = list(initial_bits) if initial_bits is not None else [0] * n_data
    if len(bits) != n_data or any(b not in (0, 1) for b in bits):
        raise ValueError(f"initial_bits must be {n_data} values in {{0, 1}}")
    n = 2 * n_data - 1
    n_anc = n_data - 1
    c = Circuit(n, n + rounds * n_anc)
    for i, b in enumerate(bits):
        if b:
            c.x(2 * i)
    for r in range(rounds):
        for i in range(n_anc):
            c.cx(2 * i, 2 * i + 1)
            c.cx(2 * i + 2, 2 * i + 1)
        for i in range(n_anc):
            c.measure(2 * i + 1, n + r * n_anc + i)
        for i in range(n_anc):
            c.reset(2 * i + 1)
    return _measure_all(c, n)


def gen_tfim(n: int, steps: int = 3, J: float = 1.0, h: float = 1.0, dt: float = 0.2) -> Circuit:
    """Trotterised transverse-field Ising chain starting from |1...1>."""
    if n < 2:
        raise ValueError("TFIM needs at least two qubits")
    c = Circuit(n, n)
    for q in range(n):
        c.x(q)
    for _ in range(steps):
        for i in range(n - 1):
            c.cx(i, i + 1)
            c.rz(2 * J * dt, i + 1)
            c.cx(i, i + 1)
        for q in range(n):
            c.rx(2 * h * dt, q)
    return _measure_all(c, n)


def gen_qaoa(n: int, gamma: float = 0.35, beta: float = 0.45) -> Circuit:
    """One QAOA layer on the complete graph K_n."""
    if n < 2:
        raise ValueError("QAOA needs at least two qubits")
    c = Circuit(n, n)
    for q in range(n):
        c.h(q)
    for i in range(n):
        for j in range(i + 1, n):
            c.cx(i, j)
            c.rz(2 * gamma, j)
            c.cx(i, j)
    for q in range(n):
        c.rx(2 * beta, q)
    return _measure_all(c, n)


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str
    size: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in GENERATORS:
            raise ValueError(f"unknown benchmark family {self.family!r}")
        if self.size < 2:
            raise ValueError("benchmark size must be at least 2")

    @classmethod
    def parse(cls, text: str) -> "BenchmarkSpec":
        """``family:size[:key=value,...]``, e.g. ``qaoa:4:gamma=0.3,beta=0.2``."""
        parts = text.split(":")
        if len(parts) < 2:
            raise ValueError(f"benchmark must look like family:size, got {text!r}")
        params = {}
        if len(parts) > 2 and parts[2]:
            for kv in parts[2].split(","):
                key, _, val = kv.partition("=")
                if key == "initial_bits":
                    params[key] = [int(ch) for ch in val]
                else:
                    params[key] = float(val) if "." in val or "e" in val else int(val)
        try:
            size = int(parts[1])
        except ValueError:
            raise ValueError(f"bad benchmark size {parts[1]!r}") from None
        return cls(parts[0].lower(), size, params)

    def build(self) -> Circuit:
        return GENERATORS[self.family](self.size, **self.params)

    @property
    def label(self) -> str:
        return f"{self.family}-{self.size}"


def _bitcode(n_data: int, **kw) -> Circuit:
    kw.setdefault("rounds", 2)
    if "initial_bits" not in kw:
        kw["initial_bits"] = [1 if i == n_data // 2 else 0 for i in range(n_data)]
    return gen_bitcode(n_data, **kw)


GENERATORS = {
    "ghz": gen_ghz,
    "bitcode": _bitcode,
    "tfim": gen_tfim,
    "qaoa": gen_qaoa,
}


@dataclass(frozen=True)
class SuiteEntry:
    name: str
    bench: str
    partitions: tuple[str, ...]
    assignment: tuple[str, ...]


STANDARD_BACKENDS = {"Q0": "FakeVigoV2", "Q1": "FakeAthensV2", "Q2": "FakeLagosV2"}

BENCHMARK_SUITE: tuple[SuiteEntry, ...] = (
    SuiteEntry("GHZ-6", "ghz:6", ("q0-q1", "q2-q3", "q4-q5"), ("Q0", "Q1", "Q2")),
    SuiteEntry("GHZ-6", "ghz:6", ("q0-q1", "q2-q3", "q4-q5"), ("Q0", "Q2", "Q1")),
    SuiteEntry("GHZ-6", "ghz:6", ("q0", "q1-q2", "q3-q5"), ("Q0", "Q2", "Q1")),
    SuiteEntry("GHZ-12", "ghz:12", ("q0-q3", "q4-q7", "q8-q11"), ("Q0", "Q1", "Q2")),
    SuiteEntry("BitCode-3", "bitcode:3", ("q0-q2", "q3-q4"), ("Q0", "Q1")),
    SuiteEntry("BitCode-3", "bitcode:3", ("q0", "q1-q4"), ("Q0", "Q1")),
    SuiteEntry("TFIM", "tfim:3", ("q0", "q1-q2"), ("Q0", "Q1")),
    SuiteEntry("TFIM", "tfim:3", ("q0-q1", "q2"), ("Q0", "Q1")),
    SuiteEntry("Qaoa-4", "qaoa:4", ("q0-q1", "q2-q3"), ("Q0", "Q1")),
    SuiteEntry("Qaoa-6", "qaoa:6", ("q0-q1", "q2-q3", "q4-q5"), ("Q0", "Q1", "Q2")),
    SuiteEntry("Qaoa-8", "qaoa:8", ("q0-q2", "q3-q5", "q6-q7"), ("Q0", "Q1", "Q2")),
    SuiteEntry("Qaoa-10", "qaoa:10", ("q0-q3", "q4-q6", "q7-q9"), ("Q0", "Q1", "Q2")),
)
