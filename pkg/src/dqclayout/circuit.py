"""
Circuit intermediate representation.

Contains:
    - GateKind: the gate alphabet shared by every pipeline stage
    - Instruction / Circuit: an ordered instruction list over flat qubit and clbit indices
    - CircuitDag: dependency graph (shared qubit, or measure -> conditioned consumer)
    - depth(), gate_count(): metrics (Barrier excluded, Measure/Reset included)
    - decompose_multiqubit(): lower CZ/SWAP/CCX to CX plus single-qubit gates
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from math import pi
from typing import Iterable, Sequence


class CircuitError(ValueError):
    """Raised for structurally invalid circuits or instructions."""


class DecompositionError(CircuitError):
    """Raised when a multi-qubit gate has no lowering rule."""


class GateKind(str, Enum):
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    SX = "sx"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CX = "cx"
    CZ = "cz"
    SWAP = "swap"
    CCX = "ccx"
    MEASURE = "measure"
    RESET = "reset"
    BARRIER = "barrier"
    REMOTE = "remote"

    @property
    def num_qubits(self) -> int | None:
        """Fixed arity, or None for variadic kinds (Barrier, placeholders)."""
        return _ARITY.get(self)

    @property
    def is_rotation(self) -> bool:
        return self in ROTATIONS

    @property
    def is_unitary(self) -> bool:
        return self not in NON_UNITARY


_ARITY = {
    **{k: 1 for k in "H X Y Z S SDG T TDG SX RX RY RZ MEASURE RESET".split()},
    "CX": 2, "CZ": 2, "SWAP": 2, "CCX": 3,
}
_ARITY = {GateKind[k]: v for k, v in _ARITY.items()}

ROTATIONS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ})
NON_UNITARY = frozenset({GateKind.MEASURE, GateKind.RESET, GateKind.BARRIER, GateKind.REMOTE})
SINGLE_QUBIT_GATES = frozenset(
    k for k, n in _ARITY.items() if n == 1 and k not in NON_UNITARY
)
MULTI_QUBIT_GATES = frozenset({GateKind.CX, GateKind.CZ, GateKind.SWAP, GateKind.CCX})


@dataclass(frozen=True)
class Instruction:
    """One operation. ``angle`` is set only for rotations; ``label`` only for placeholders."""

    kind: GateKind
    qubits: tuple[int, ...]
    clbits: tuple[int, ...] = ()
    angle: float | None = None
    condition: tuple[int, int] | None = None
    label: str | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "clbits", tuple(int(c) for c in self.clbits))
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"repeated qubit in {kind.value} {self.qubits}")
        arity = kind.num_qubits
        if arity is not None and len(self.qubits) != arity:
            raise CircuitError(f"{kind.value} takes {arity} qubit(s), got {len(self.qubits)}")
        if arity is None and not self.qubits:
            raise CircuitError(f"{kind.value} needs at least one qubit")
        if kind is GateKind.REMOTE and self.label is None:
            raise CircuitError("remote placeholder needs a label")
        if kind.is_rotation:
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError(f"{kind.value} needs a finite angle, got {self.angle!r}")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise CircuitError(f"{kind.value} takes no angle")
        if kind is GateKind.MEASURE and len(self.clbits) != 1:
            raise CircuitError("measure writes exactly one classical bit")
        if kind is not GateKind.MEASURE and self.clbits:
            raise CircuitError(f"{kind.value} writes no classical bits")
        if self.condition is not None:
            if not kind.is_unitary:
                raise CircuitError(f"{kind.value} cannot be conditioned")
            bit, value = self.condition
            if value not in (0, 1):
                raise CircuitError(f"condition value must be 0 or 1, got {value}")
            object.__setattr__(self, "condition", (int(bit), int(value)))

    @property
    def name(self) -> str:
        return self.kind.value

    def remap(self, qmap: Sequence[int] | dict, cmap: Sequence[int] | dict | None = None) -> "Instruction":
        """Return a copy with qubits (and optionally clbits / condition bit) relabelled."""
        clbits, condition = self.clbits, self.condition
        if cmap is not None:
            clbits = tuple(cmap[c] for c in clbits)
            if condition is not None:
                condition = (cmap[condition[0]], condition[1])
        return Instruction(self.kind, tuple(qmap[q] for q in self.qubits), clbits,
                           self.angle, condition, self.label)

    def __str__(self) -> str:
        s = self.kind.value
        if self.angle is not None:
            s += f"({self.angle:.6g})"
        if self.label is not None:
            s += f"[{self.label}]"
        s += " " + ",".join(f"q{q}" for q in self.qubits)
        if self.clbits:
            s += " -> " + ",".join(f"c{c}" for c in self.clbits)
        if self.condition is not None:
            s = f"if(c{self.condition[0]}=={self.condition[1]}) " + s
        return s


@dataclass
class Circuit:
    """Ordered instruction list over ``num_qubits`` qubits and ``num_clbits`` classical bits.

    Built by appending; treat as a value once handed to another stage.
    """

    num_qubits: int
    num_clbits: int = 0
    instructions: list[Instruction] = field(default_factory=list)
    qubit_labels: list[str] | None = None

    def __post_init__(self):
        if self.num_qubits < 0 or self.num_clbits < 0:
            raise CircuitError("register sizes must be non-negative")
        instrs, self.instructions = self.instructions, []
        for ins in instrs:
            self.append(ins)

    def append(self, ins: Instruction) -> "Circuit":
        for q in ins.qubits:
            if not 0 <= q < self.num_qubits:
                raise CircuitError(f"qubit {q} out of range for {self.num_qubits}-qubit circuit")
        bits = list(ins.clbits) + ([ins.condition[0]] if ins.condition else [])
        for c in bits:
            if not 0 <= c < self.num_clbits:
                raise CircuitError(f"clbit {c} out of range for {self.num_clbits} clbits")
        self.instructions.append(ins)
        return self

    def add(self, kind, *qubits, angle=None, clbits=(), condition=None, label=None) -> "Circuit":
        return self.append(Instruction(GateKind(kind), tuple(qubits), tuple(clbits),
                                       angle, condition, label))

    # short builders used by generators and tests
    def h(self, q): return self.add(GateKind.H, q)
    def x(self, q): return self.add(GateKind.X, q)
    def rx(self, theta, q): return self.add(GateKind.RX, q, angle=theta)
    def ry(self, theta, q): return self.add(GateKind.RY, q, angle=theta)
    def rz(self, theta, q): return self.add(GateKind.RZ, q, angle=theta)
    def cx(self, c, t): return self.add(GateKind.CX, c, t)
    def measure(self, q, c): return self.add(GateKind.MEASURE, q, clbits=(c,))
    def reset(self, q): return self.add(GateKind.RESET, q)

    def copy_empty(self) -> "Circuit":
        labels = list(self.qubit_labels) if self.qubit_labels else None
        return Circuit(self.num_qubits, self.num_clbits, [], labels)

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.num_qubits == other.num_qubits and self.num_clbits == other.num_clbits
                and self.instructions == other.instructions)

    def count_ops(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for ins in self.instructions:
            counts[ins.name] = counts.get(ins.name, 0) + 1
        return counts

    def placeholders(self) -> list[Instruction]:
        return [ins for ins in self.instructions if ins.kind is GateKind.REMOTE]

    def __str__(self) -> str:
        head = f"Circuit({self.num_qubits} qubits, {self.num_clbits} clbits)"
        return "\n".join([head] + [f"  {ins}" for ins in self.instructions])


@dataclass
class CircuitDag:
    """Dependency DAG; node ids are positions in the source instruction list."""

    num_qubits: int
    num_clbits: int
    nodes: list[Instruction]
    preds: list[set[int]]
    succs: list[set[int]]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, n) for n, ps in enumerate(self.preds) for p in ps)

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, always taking the lowest ready node id."""
        import heapq

        indeg = [len(p) for p in self.preds]
        ready = [n for n, d in enumerate(indeg) if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            n = heapq.heappop(ready)
            order.append(n)
            for s in self.succs[n]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    heapq.heappush(ready, s)
        if len(order) != len(self.nodes):
            raise CircuitError("dependency graph has a cycle")
        return order


def to_dag(c: Circuit) -> CircuitDag:
    """Build the dependency DAG.

    Edges join consecutive instructions on a qubit, and a conditioned gate to
    the most recent measure writing its condition bit. A measure that
    overwrites a bit also waits for earlier readers of that bit.
    """
    n = len(c.instructions)
    preds: list[set[int]] = [set() for _ in range(n)]
    last_on_qubit: dict[int, int] = {}
    last_writer: dict[int, int] = {}
    readers: dict[int, list[int]] = {}
    for i, ins in enumerate(c.instructions):
        for q in ins.qubits:
            if q in last_on_qubit:
                preds[i].add(last_on_qubit[q])
            last_on_qubit[q] = i
        if ins.condition is not None:
            bit = ins.condition[0]
            if bit in last_writer:
                preds[i].add(last_writer[bit])
            readers.setdefault(bit, []).append(i)
        for bit in ins.clbits:
            if bit in last_writer:
                preds[i].add(last_writer[bit])
            preds[i].update(r for r in readers.pop(bit, []) if r != i)
            last_writer[bit] = i
    succs: list[set[int]] = [set() for _ in range(n)]
    for i, ps in enumerate(preds):
        for p in ps:
            succs[p].add(i)
    return CircuitDag(c.num_qubits, c.num_clbits, list(c.instructions), preds, succs)


def from_dag(d: CircuitDag) -> Circuit:
    return Circuit(d.num_qubits, d.num_clbits, [d.nodes[i] for i in d.topological_order()])


def _weight(ins: Instruction) -> int:
    return 0 if ins.kind is GateKind.BARRIER else 1


def depth(c: Circuit, skip: Iterable[GateKind] = ()) -> int:
    """Longest weighted path through the DAG; Barrier (and any ``skip`` kinds) weigh 0."""
    skip = frozenset(skip)
    dag = to_dag(c)
    longest = [0] * len(dag.nodes)
    for i in range(len(dag.nodes)):  # source order is already topological
        ins = dag.nodes[i]
        w = 0 if ins.kind in skip else _weight(ins)
        longest[i] = w + max((longest[p] for p in dag.preds[i]), default=0)
    return max(longest, default=0)


def gate_count(c: Circuit, skip: Iterable[GateKind] = ()) -> int:
    skip = frozenset(skip)
    return sum(_weight(ins) for ins in c.instructions if ins.kind not in skip)


def _ccx_rules(a: int, b: int, t: int) -> list[Instruction]:
    G = GateKind
    seq = [
        (G.H, (t,)), (G.CX, (b, t)), (G.TDG, (t,)), (G.CX, (a, t)), (G.T, (t,)),
        (G.CX, (b, t)), (G.TDG, (t,)), (G.CX, (a, t)), (G.T, (b,)), (G.T, (t,)),
        (G.H, (t,)), (G.CX, (a, b)), (G.T, (a,)), (G.TDG, (b,)), (G.CX, (a, b)),
    ]
    return [Instruction(k, q) for k, q in seq]


def lower_gate(ins: Instruction) -> list[Instruction]:
    """Standard identity for one CZ/SWAP/CCX; the condition, if any, is copied onto each part."""
    G = GateKind
    if ins.kind is G.CZ:
        a, b = ins.qubits
        parts = [Instruction(G.H, (b,)), Instruction(G.CX, (a, b)), Instruction(G.H, (b,))]
    elif ins.kind is G.SWAP:
        a, b = ins.qubits
        parts = [Instruction(G.CX, (a, b)), Instruction(G.CX, (b, a)), Instruction(G.CX, (a, b))]
    elif ins.kind is G.CCX:
        parts = _ccx_rules(*ins.qubits)
    else:
        raise DecompositionError(f"no decomposition rule for {ins.kind.value}")
    if ins.condition is not None:
        parts = [Instruction(p.kind, p.qubits, condition=ins.condition) for p in parts]
    return parts


def decompose_multiqubit(c: Circuit, keep: Iterable[GateKind] | None = None) -> Circuit:
    """Rewrite every multi-qubit gate outside ``keep`` into CX + single-qubit gates."""
    keep = frozenset(keep) if keep is not None else frozenset({GateKind.CX}) | SINGLE_QUBIT_GATES
    if GateKind.CX not in keep:
        raise DecompositionError("keep set must contain cx")
    out = c.copy_empty()
    for ins in c.instructions:
        if ins.kind in keep or not ins.kind.is_unitary or len(ins.qubits) == 1:
            out.append(ins)
        else:
            for part in lower_gate(ins):
                out.append(part)
    return out


def normalize_angle(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    t = math.remainder(theta, 2 * pi)
    return pi if t == -pi else t


def strip_final_measurements(c: Circuit) -> Circuit:
    """Drop every unconditioned measure that is the last operation on its qubit
    and whose clbit no later instruction reads."""
    last: dict[int, int] = {}
    for i, ins in enumerate(c.instructions):
        for q in ins.qubits:
            last[q] = i
    drop = set()
    for i, ins in enumerate(c.instructions):
        if ins.kind is GateKind.MEASURE and ins.condition is None and last[ins.qubits[0]] == i:
            bit = ins.clbits[0]
            later = c.instructions[i + 1:]
            if not any(j.condition and j.condition[0] == bit or bit in j.clbits for j in later):
                drop.add(i)
    out = c.copy_empty()
    for i, ins in enumerate(c.instructions):
        if i not in drop:
            out.append(ins)
    return out
