"""
Stage 3: per-QPU compilation.

    route -> translate_basis -> optimize_1q

Routing is greedy: gates are taken in program order and a non-adjacent CX
gets SWAPs along a BFS shortest path (neighbours visited in ascending index
order) that walk its first operand toward the second. Only the physical
qubits initially hosting data take part in routing; communication qubits are
fixed and exempt from coupling checks, and placeholders are opaque.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import pi
from typing import Iterable, Sequence

from .backends import BackendSpec, CapacityError
from .circuit import (
    Circuit, CircuitError, GateKind, Instruction, SINGLE_QUBIT_GATES, normalize_angle,
)
from .scheduler import Mode, Subcircuit

G = GateKind


class TranslationError(CircuitError):
    pass


@dataclass
class QubitMap:
    """Logical -> physical assignment; ``fixed`` logicals never move."""

    l2p: list[int]
    fixed: frozenset[int] = frozenset()

    def __post_init__(self):
        if len(set(self.l2p)) != len(self.l2p):
            raise ValueError(f"qubit map is not injective: {self.l2p}")

    @classmethod
    def identity(cls, n: int) -> "QubitMap":
        return cls(list(range(n)))

    def copy(self) -> "QubitMap":
        return QubitMap(list(self.l2p), self.fixed)

    def __getitem__(self, logical: int) -> int:
        return self.l2p[logical]

    def p2l(self) -> dict[int, int]:
        return {p: l for l, p in enumerate(self.l2p)}

    def swap_physical(self, pa: int, pb: int) -> None:
        inv = self.p2l()
        la, lb = inv.get(pa), inv.get(pb)
        if la in self.fixed or lb in self.fixed:
            raise ValueError("cannot swap a fixed qubit")
        if la is not None:
            self.l2p[la] = pb
        if lb is not None:
            self.l2p[lb] = pa


def _shortest_path(adj: dict[int, list[int]], src: int, dst: int) -> list[int]:
    prev = {src: None}
    todo = deque([src])
    while todo:
        u = todo.popleft()
        if u == dst:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                todo.append(v)
    if dst not in prev:
        raise CircuitError(f"no path between physical qubits {src} and {dst}")
    path, u = [], dst
    while u is not None:
        path.append(u)
        u = prev[u]
    return path[::-1]


def route(sub: Circuit, spec: BackendSpec, initial: QubitMap | None = None) -> tuple[Circuit, QubitMap]:
    """Rewrite ``sub`` onto physical qubits, inserting SWAPs for non-adjacent CX pairs."""
    qmap = initial.copy() if initial is not None else QubitMap.identity(sub.num_qubits)
    if len(qmap.l2p) != sub.num_qubits:
        raise ValueError("initial map size does not match the circuit")
    region = sorted(qmap[l] for l in range(sub.num_qubits) if l not in qmap.fixed)
    for p in region:
        if p >= spec.num_qubits:
            raise CapacityError(f"data qubit mapped to {p}, beyond {spec.name}'s {spec.num_qubits} qubits")
    rset = set(region)
    adj = {p: [q for q in spec.neighbors(p) if q in rset] for p in region}
    width = max([spec.num_qubits] + [p + 1 for p in qmap.l2p])
    out = Circuit(width, sub.num_clbits)

    for ins in sub.instructions:
        movable = [q for q in ins.qubits if q not in qmap.fixed]
        if (ins.kind.is_unitary and len(ins.qubits) == 2 and len(movable) == 2):
            pa, pb = qmap[ins.qubits[0]], qmap[ins.qubits[1]]
            if not spec.are_coupled(pa, pb):
                if ins.condition is not None:
                    raise CircuitError("cannot route a conditioned two-qubit gate")
                path = _shortest_path(adj, pa, pb)
                for u, v in zip(path, path[1:-1]):
                    out.append(Instruction(G.SWAP, (u, v)))
                    qmap.swap_physical(u, v)
        elif ins.kind.is_unitary and len(ins.qubits) > 2:
            raise CircuitError(f"{ins.kind.value} must be lowered before routing")
        out.append(ins.remap(qmap.l2p))
    return out, qmap


def _rz(theta: float, q: int, cond=None) -> Instruction:
    return Instruction(G.RZ, (q,), angle=normalize_angle(theta), condition=cond)


def _rule(ins: Instruction, basis: frozenset[GateKind]) -> list[Instruction] | None:
    """One rewrite step toward ``basis``; None when no rule applies."""
    q = ins.qubits[0]
    cond, th = ins.condition, ins.angle
    sx_family = G.SX in basis and G.RZ in basis
    rx_family = G.RX in basis and G.RZ in basis

    def g(kind, *qs, angle=None):
        return Instruction(kind, qs, angle=angle, condition=cond)

    k = ins.kind
    if k is G.SWAP:
        a, b = ins.qubits
        return [g(G.CX, a, b), g(G.CX, b, a), g(G.CX, a, b)]
    if G.RZ in basis:
        diag = {G.Z: pi, G.S: pi / 2, G.SDG: -pi / 2, G.T: pi / 4, G.TDG: -pi / 4}
        if k in diag:
            return [_rz(diag[k], q, cond)]
    if sx_family:
        if k is G.H:
            return [_rz(pi / 2, q, cond), g(G.SX, q), _rz(pi / 2, q, cond)]
        if k is G.X:
            return [g(G.SX, q), g(G.SX, q)]
        if k is G.Y:
            return [_rz(pi, q, cond), g(G.X, q)]
        if k is G.RX:
            return [_rz(pi / 2, q, cond), g(G.SX, q), _rz(th + pi, q, cond), g(G.SX, q),
                    _rz(5 * pi / 2, q, cond)]
        if k is G.RY:
            return [g(G.SX, q), _rz(th + pi, q, cond), g(G.SX, q), _rz(pi, q, cond)]
    if rx_family:
        if k is G.H:
            return [_rz(pi / 2, q, cond), g(G.RX, q, angle=pi / 2), _rz(pi / 2, q, cond)]
        if k is G.X:
            return [g(G.RX, q, angle=pi)]
        if k is G.SX:
            return [g(G.RX, q, angle=pi / 2)]
        if k is G.Y:
            return [_rz(pi, q, cond), g(G.RX, q, angle=pi)]
        if k is G.RY:
            return [_rz(-pi / 2, q, cond), g(G.RX, q, angle=th), _rz(pi / 2, q, cond)]
    return None


def translate_basis(sub: Circuit, basis: Iterable[GateKind]) -> Circuit:
    """Rewrite every gate into ``basis`` (Measure/Reset/Barrier/placeholders pass through)."""
    basis = frozenset(GateKind(b) for b in basis)
    out = sub.copy_empty()

    def emit(ins: Instruction, depth: int):
        if ins.kind in basis or not ins.kind.is_unitary:
            out.append(ins)
            return
        parts = _rule(ins, basis) if depth < 4 else None
        if parts is None:
            raise TranslationError(f"no rule translating {ins.kind.value} into "
                                   f"{sorted(b.value for b in basis)}")
        for p in parts:
            emit(p, depth + 1)

    for ins in sub.instructions:
        emit(ins, 0)
    return out


_MERGEABLE = frozenset({G.RZ, G.X})
_ANGLE_TOL = 1e-12


def optimize_1q(sub: Circuit) -> Circuit:
    """Merge adjacent RZ pairs, drop RZ(0) and cancel X.X on each qubit's timeline.

    Only unconditioned single-qubit neighbours are combined, so nothing moves
    across a placeholder, measure, reset, barrier or multi-qubit gate.
    """
    slots: list[Instruction | None] = []
    stacks: dict[int, list[int]] = {}

    for ins in sub.instructions:
        simple = (ins.kind in SINGLE_QUBIT_GATES and ins.condition is None)
        if simple and ins.kind is G.RZ and abs(normalize_angle(ins.angle)) < _ANGLE_TOL:
            continue
        if simple and ins.kind in _MERGEABLE:
            q = ins.qubits[0]
            stack = stacks.get(q, [])
            top = slots[stack[-1]] if stack else None
            if top is not None and top.kind is ins.kind and top.condition is None:
                if ins.kind is G.X:
                    slots[stack.pop()] = None
                    continue
                theta = normalize_angle(top.angle + ins.angle)
                if abs(theta) < _ANGLE_TOL:
                    slots[stack.pop()] = None
                else:
                    slots[stack[-1]] = Instruction(G.RZ, (q,), angle=theta)
                continue
        slots.append(ins)
        for q in ins.qubits:
            stacks.setdefault(q, []).append(len(slots) - 1)

    out = sub.copy_empty()
    for ins in slots:
        if ins is not None:
            out.append(ins)
    return out


@dataclass
class CompiledSubcircuit:
    qpu: str
    backend: str
    circuit: Circuit
    initial_map: QubitMap
    final_map: QubitMap
    placeholder_positions: dict[str, tuple[int, tuple[int, ...]]]  # id -> (index, physical qubits)
    data_physical: list[int]
    comm_physical: list[int]


def compile_subcircuit(sub: Subcircuit, spec: BackendSpec, mode: Mode | str = Mode.EXPANDED,
                       optimize: bool = True) -> CompiledSubcircuit:
    mode = Mode(mode)
    needed = sub.num_data + (sub.num_comm if mode is Mode.STRICT else 0)
    if needed > spec.num_qubits:
        raise CapacityError(f"{sub.qpu} needs {needed} qubits on {spec.name} ({spec.num_qubits})")
    comm = frozenset(range(sub.num_data, sub.num_data + sub.num_comm))
    initial = QubitMap(list(sub.physical), comm)
    routed, final = route(sub.circuit, spec, initial)
    circ = translate_basis(routed, spec.basis_gates)
    if optimize:
        circ = optimize_1q(circ)
    positions = {ins.label: (i, ins.qubits) for i, ins in enumerate(circ.instructions)
                 if ins.kind is G.REMOTE}
    return CompiledSubcircuit(sub.qpu, spec.name, circ, initial, final, positions,
                              sorted(sub.physical[:sub.num_data]),
                              list(sub.physical[sub.num_data:]))


def conformance_violations(compiled: CompiledSubcircuit, spec: BackendSpec) -> list[str]:
    """Coupling and basis violations; empty when the subcircuit is executable on ``spec``."""
    exempt = set(compiled.comm_physical)
    bad = []
    for i, ins in enumerate(compiled.circuit.instructions):
        if ins.kind is G.REMOTE:
            continue
        if not spec.allows(ins.kind):
            bad.append(f"#{i} {ins}: {ins.kind.value} not in basis")
        if ins.kind.is_unitary and len(ins.qubits) == 2 and not exempt & set(ins.qubits):
            if not spec.are_coupled(*ins.qubits):
                bad.append(f"#{i} {ins}: qubits not coupled")
    return bad


def compile_all(subs: Sequence[Subcircuit], specs: Sequence[BackendSpec], mode: Mode | str,
                optimize: bool = True) -> list[CompiledSubcircuit]:
    return [compile_subcircuit(s, spec, mode, optimize) for s, spec in zip(subs, specs)]
