"""
Stage 2: place logical groups on QPUs, allocate one fresh EPR pair per remote
gate, register the TeleGate classical messages, and anchor each remote gate
behind a placeholder so the per-QPU compilers never see across it.

Per-QPU subcircuits use local indices: data qubits first (group order), then
communication qubits in EPR-ordinal order. ``physical[i]`` is where local
qubit ``i`` starts on the backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .backends import BackendRegistry, BackendSpec, CapacityError, is_connected
from .circuit import Circuit, GateKind, Instruction
from .partition import LogicalGroup, PartitionPlan, RemoteGate


class Mode(str, Enum):
    STRICT = "strict"
    EXPANDED = "expanded"


@dataclass(frozen=True)
class EprEvent:
    id: str
    qpu_a: str
    qpu_b: str
    comm_a: int
    comm_b: int
    ordinal: int
    remote_id: str


@dataclass(frozen=True)
class ClassicalMessage:
    from_qpu: str
    to_qpu: str
    bit: int
    consumer: str  # "<remote id>:x" (target-side X fix) or "<remote id>:z" (control-side Z fix)


@dataclass(frozen=True)
class Binding:
    """Where a remote gate's TeleGate runs: local qubit indices on each side."""

    remote: RemoteGate
    event: EprEvent | None
    control_qpu: str
    control_data: int
    control_comm: int
    target_qpu: str
    target_comm: int
    target_data: int
    bits: tuple[int, int]


@dataclass
class Subcircuit:
    qpu: str
    backend: str
    group: int
    data_qubits: list[int]
    num_comm: int
    circuit: Circuit
    physical: list[int]
    anchored: frozenset[str] = frozenset()

    @property
    def num_data(self) -> int:
        return len(self.data_qubits)


@dataclass
class Schedule:
    subcircuits: list[Subcircuit]
    bindings: dict[str, Binding]
    remotes: list[RemoteGate]
    mode: Mode
    num_clbits: int  # original clbits + two message bits per remote gate
    base_clbits: int
    epr_events: list[EprEvent] = field(default_factory=list)
    messages: list[ClassicalMessage] = field(default_factory=list)

    def subcircuit(self, qpu: str) -> Subcircuit:
        return next(s for s in self.subcircuits if s.qpu == qpu)

    @property
    def n_data(self) -> int:
        return sum(s.num_data for s in self.subcircuits)

    @property
    def n_comm(self) -> int:
        return sum(s.num_comm for s in self.subcircuits)

    @property
    def n_total(self) -> int:
        return self.n_data + self.n_comm


def data_region(spec: BackendSpec, k: int) -> list[int]:
    """Physical qubits hosting k data qubits: the lowest k indices when they are
    connected on the coupling graph, otherwise a BFS-grown connected set from 0."""
    if k > spec.num_qubits:
        raise CapacityError(f"{spec.name} needs {k} data qubits but has {spec.num_qubits}")
    lowest = list(range(k))
    if is_connected(lowest, spec.coupling):
        return lowest
    chosen = [0]
    while len(chosen) < k:
        frontier = sorted({nb for q in chosen for nb in spec.neighbors(q)} - set(chosen))
        chosen.append(frontier[0])
    return sorted(chosen)


def assign_and_allocate(groups: Sequence[LogicalGroup], remotes: Sequence[RemoteGate],
                        plan: PartitionPlan, registry: BackendRegistry,
                        mode: Mode | str = Mode.EXPANDED, num_clbits: int | None = None) -> Schedule:
    """Map data qubits to physical qubits and give every remote gate two comm qubits."""
    mode = Mode(mode)
    comm_of: dict[int, list[str]] = {g.index: [] for g in groups}  # group -> [remote id per slot]
    for r in remotes:
        comm_of[r.control_group].append(r.id)
        comm_of[r.target_group].append(r.id)

    subs: list[Subcircuit] = []
    slot: dict[tuple[int, str], int] = {}  # (group, remote id) -> local comm index
    for g in groups:
        qpu = plan.assignment[g.index]
        spec = registry[plan.backend_of(g.index)]
        k, m = len(g.data_qubits), len(comm_of[g.index])
        need = k + m if mode is Mode.STRICT else k
        if need > spec.num_qubits:
            what = "data+comm" if mode is Mode.STRICT else "data"
            raise CapacityError(f"{qpu} ({spec.name}) needs {need} {what} qubits "
                                f"but has {spec.num_qubits} ({mode.value} mode)")
        data_phys = data_region(spec, k)
        free = [q for q in range(spec.num_qubits) if q not in data_phys]
        free += list(range(spec.num_qubits, spec.num_qubits + m))  # virtual, expanded mode only
        physical = data_phys + free[:m]
        for j, rid in enumerate(comm_of[g.index]):
            slot[(g.index, rid)] = k + j

        circ = Circuit(k + m, g.local_circuit.num_clbits)
        for ins in g.local_circuit.instructions:
            if ins.kind is GateKind.REMOTE:
                comm = slot[(g.index, ins.label)]
                circ.append(Instruction(GateKind.REMOTE, (ins.qubits[0], comm), label=ins.label))
            else:
                circ.append(ins)
        subs.append(Subcircuit(qpu, spec.name, g.index, list(g.data_qubits), m, circ, physical))

    if num_clbits is None:
        num_clbits = groups[0].local_circuit.num_clbits if groups else 0
    base = num_clbits
    by_group = {s.group: s for s in subs}
    bindings: dict[str, Binding] = {}
    for r in remotes:
        cs, ts = by_group[r.control_group], by_group[r.target_group]
        bindings[r.id] = Binding(
            r, None,
            cs.qpu, cs.data_qubits.index(r.control), slot[(r.control_group, r.id)],
            ts.qpu, slot[(r.target_group, r.id)], ts.data_qubits.index(r.target),
            (base + 2 * r.ordinal, base + 2 * r.ordinal + 1),
        )
    return Schedule(subs, bindings, list(remotes), mode, base + 2 * len(remotes), base)


def schedule_remote(remotes: Sequence[RemoteGate], schedule: Schedule) -> Schedule:
    """Order EPR events by remote-gate position and register the two messages of each TeleGate."""
    events, messages, bindings = [], [], dict(schedule.bindings)
    for r in sorted(remotes, key=lambda r: r.ordinal):
        b = bindings[r.id]
        cs, ts = schedule.subcircuit(b.control_qpu), schedule.subcircuit(b.target_qpu)
        ev = EprEvent(f"epr{r.ordinal}", b.control_qpu, b.target_qpu,
                      cs.physical[b.control_comm], ts.physical[b.target_comm], r.ordinal, r.id)
        events.append(ev)
        bindings[r.id] = replace(b, event=ev)
        m1, m2 = b.bits
        messages.append(ClassicalMessage(b.control_qpu, b.target_qpu, m1, f"{r.id}:x"))
        messages.append(ClassicalMessage(b.target_qpu, b.control_qpu, m2, f"{r.id}:z"))
    return replace(schedule, bindings=bindings, epr_events=events, messages=messages)


def freeze_placeholders(schedule: Schedule) -> Schedule:
    """Mark every placeholder anchored; ids must be unique per subcircuit."""
    subs = []
    for s in schedule.subcircuits:
        ids = [ins.label for ins in s.circuit.placeholders()]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate placeholder id on {s.qpu}")
        subs.append(replace(s, anchored=frozenset(ids)))
    return replace(schedule, subcircuits=subs)


def build_schedule(groups: Sequence[LogicalGroup], remotes: Sequence[RemoteGate],
                   plan: PartitionPlan, registry: BackendRegistry,
                   mode: Mode | str = Mode.EXPANDED) -> Schedule:
    sched = assign_and_allocate(groups, remotes, plan, registry, mode)
    return freeze_placeholders(schedule_remote(remotes, sched))
