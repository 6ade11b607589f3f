"""
Stage 4: stitch compiled subcircuits into one global circuit and resolve each
placeholder into a TeleGate (one EPR pair, two measurements, two feed-forward
corrections, two resets).

Global qubit order: QPUs in schedule order; within a QPU, the physical qubits
hosting data (ascending) followed by its communication qubits.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

from .circuit import Circuit, GateKind, Instruction, depth, gate_count
from .scheduler import EprEvent, Schedule
from .transpiler import CompiledSubcircuit

G = GateKind


class AssemblyError(RuntimeError):
    pass


TELEGATE_TAGS = (
    "epr_prep", "epr_prep",
    "telegate_cx", "classical_msg", "correction",
    "telegate_cx", "telegate_cx", "classical_msg", "correction",
    "reset", "reset",
)


def expand_telegate(c_qubit: int, t_qubit: int, e1: int, e2: int, m1: int, m2: int,
                    consumed: set[int] | None = None) -> list[Instruction]:
    """Non-local CNOT from ``c_qubit`` to ``t_qubit`` over a fresh Bell pair (e1, e2).

    ``consumed`` tracks communication qubits already spent; reuse is an error.
    """
    if consumed is not None:
        for e in (e1, e2):
            if e in consumed:
                raise AssemblyError(f"communication qubit {e} already consumed")
        consumed.update((e1, e2))
    return [
        Instruction(G.H, (e1,)),
        Instruction(G.CX, (e1, e2)),
        Instruction(G.CX, (c_qubit, e1)),
        Instruction(G.MEASURE, (e1,), (m1,)),
        Instruction(G.X, (e2,), condition=(m1, 1)),
        Instruction(G.CX, (e2, t_qubit)),
        Instruction(G.H, (e2,)),
        Instruction(G.MEASURE, (e2,), (m2,)),
        Instruction(G.Z, (c_qubit,), condition=(m2, 1)),
        Instruction(G.RESET, (e1,)),
        Instruction(G.RESET, (e2,)),
    ]


@dataclass(frozen=True)
class QubitOwner:
    qpu: str
    role: str  # "data" | "comm"
    physical: int
    logical: int | None = None  # global data-qubit index initially placed here
    epr_event: str | None = None


@dataclass
class DistributedLayout:
    global_circuit: Circuit
    ownership: list[QubitOwner]
    epr_events: list[EprEvent]
    tags: list[str]
    output_clbits: list[int]
    message_bits: dict[str, tuple[int, int]]
    qpus: list[tuple[str, str]]  # (qpu name, backend name)
    groups: list[list[int]]
    mode: str
    final_data: dict[int, int] = field(default_factory=dict)  # logical data qubit -> global qubit at the end

    @property
    def n_data(self) -> int:
        return sum(o.role == "data" for o in self.ownership)

    @property
    def n_comm(self) -> int:
        return sum(o.role == "comm" for o in self.ownership)

    def qpu_of(self, global_qubit: int) -> str:
        return self.ownership[global_qubit].qpu


def _global_index(schedule: Schedule, compiled: Sequence[CompiledSubcircuit]):
    events = {}
    for ev in schedule.epr_events:
        events[(ev.qpu_a, ev.comm_a)] = ev.id
        events[(ev.qpu_b, ev.comm_b)] = ev.id
    owners: list[QubitOwner] = []
    index: dict[tuple[str, int], int] = {}
    for sub, comp in zip(schedule.subcircuits, compiled):
        start = {p: sub.data_qubits[i] for i, p in enumerate(sub.physical[:sub.num_data])}
        for p in comp.data_physical:
            index[(sub.qpu, p)] = len(owners)
            owners.append(QubitOwner(sub.qpu, "data", p, start[p]))
        for p in comp.comm_physical:
            index[(sub.qpu, p)] = len(owners)
            owners.append(QubitOwner(sub.qpu, "comm", p, None, events.get((sub.qpu, p))))
    return owners, index


def assemble(schedule: Schedule, compiled: Sequence[CompiledSubcircuit],
             output_clbits: Sequence[int] | None = None) -> DistributedLayout:
    """Interleave compiled subcircuits, expanding each placeholder pair into a TeleGate."""
    if len(compiled) != len(schedule.subcircuits):
        raise AssemblyError("one compiled subcircuit per scheduled QPU is required")
    by_qpu = {c.qpu: c for c in compiled}
    for s in schedule.subcircuits:
        if s.qpu not in by_qpu:
            raise AssemblyError(f"no compiled subcircuit for {s.qpu}")
    compiled = [by_qpu[s.qpu] for s in schedule.subcircuits]

    # every placeholder id must sit exactly once on its control side and once on its target side
    seen: dict[str, list[str]] = {}
    for comp in compiled:
        ids = [ins.label for ins in comp.circuit.placeholders()]
        if len(ids) != len(set(ids)):
            raise AssemblyError(f"duplicate placeholder id on {comp.qpu}")
        for rid in ids:
            seen.setdefault(rid, []).append(comp.qpu)
    for rid, qpus in seen.items():
        if rid not in schedule.bindings:
            raise AssemblyError(f"placeholder {rid} has no binding")
    for rid, b in schedule.bindings.items():
        where = sorted(seen.get(rid, []))
        if where != sorted([b.control_qpu, b.target_qpu]):
            raise AssemblyError(f"placeholder {rid} found on {where}, expected "
                                f"{b.control_qpu} and {b.target_qpu} (orphan or mismatch)")

    owners, gidx = _global_index(schedule, compiled)
    out = Circuit(len(owners), schedule.num_clbits)
    tags: list[str] = []

    def lift(comp: CompiledSubcircuit, ins: Instruction) -> Instruction:
        return ins.remap({p: gidx[(comp.qpu, p)] for p in ins.qubits})

    ptr = {c.qpu: 0 for c in compiled}

    def drain(comp: CompiledSubcircuit, until: str | None):
        instrs = comp.circuit.instructions
        i = ptr[comp.qpu]
        while i < len(instrs):
            ins = instrs[i]
            if ins.kind is G.REMOTE:
                if ins.label != until:
                    raise AssemblyError(f"{comp.qpu}: expected placeholder {until}, found {ins.label}")
                ptr[comp.qpu] = i
                return ins
            out.append(lift(comp, ins))
            tags.append("local")
            i += 1
        ptr[comp.qpu] = i
        if until is not None:
            raise AssemblyError(f"{comp.qpu}: placeholder {until} missing")
        return None

    consumed: set[int] = set()
    for r in sorted(schedule.remotes, key=lambda r: r.ordinal):
        b = schedule.bindings[r.id]
        cc, tc = by_qpu[b.control_qpu], by_qpu[b.target_qpu]
        c_ins = drain(cc, r.id)
        t_ins = drain(tc, r.id)
        c_data, e1 = (gidx[(cc.qpu, p)] for p in c_ins.qubits)
        t_data, e2 = (gidx[(tc.qpu, p)] for p in t_ins.qubits)
        for ins, tag in zip(expand_telegate(c_data, t_data, e1, e2, *b.bits, consumed),
                            TELEGATE_TAGS):
            out.append(ins)
            tags.append(tag)
        ptr[cc.qpu] += 1
        ptr[tc.qpu] += 1
    for comp in compiled:
        drain(comp, None)

    final_data = {}
    for sub, comp in zip(schedule.subcircuits, compiled):
        for i, q in enumerate(sub.data_qubits):
            final_data[q] = gidx[(comp.qpu, comp.final_map[i])]
    if output_clbits is None:
        output_clbits = list(range(schedule.base_clbits))
    return DistributedLayout(
        out, owners, list(schedule.epr_events), tags, list(output_clbits),
        {rid: b.bits for rid, b in schedule.bindings.items()},
        [(s.qpu, s.backend) for s in schedule.subcircuits],
        [list(s.data_qubits) for s in schedule.subcircuits],
        schedule.mode.value,
        dict(sorted(final_data.items())),
    )


@dataclass
class SimulationResult:
    ideal: dict[str, float]
    sampled: dict[str, float]
    shots: int
    seed: int


@dataclass
class MetricsReport:
    n_data: int = 0
    n_comm: int = 0
    n_total: int = 0
    subcirc_depths: list[int] = field(default_factory=list)
    subcirc_depth_min: int = 0
    subcirc_depth_max: int = 0
    subcirc_depth_avg: float = 0.0
    subcirc_gate_counts: list[int] = field(default_factory=list)
    layout_depth: int = 0
    gate_count: int = 0
    num_remote_gates: int = 0
    top_state: str | None = None
    ideal_prob: float | None = None
    sampled_prob: float | None = None
    hellinger_fidelity: float | None = None
    error_rate: float | None = None
    distribution: dict[str, float] | None = None
    shots: int | None = None
    seed: int | None = None
    simulation: str = "not run"
    name: str = ""
    partition: list[str] = field(default_factory=list)
    assignment: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(**d)


def compute_metrics(layout: DistributedLayout, compiled: Sequence[CompiledSubcircuit],
                    sim: SimulationResult | None = None, top_k: int = 8) -> MetricsReport:
    from .sim import hellinger_fidelity, top_state

    depths = [depth(c.circuit, skip={G.REMOTE}) for c in compiled]
    counts = [gate_count(c.circuit, skip={G.REMOTE}) for c in compiled]
    rep = MetricsReport(
        n_data=layout.n_data,
        n_comm=layout.n_comm,
        n_total=layout.n_data + layout.n_comm,
        subcirc_depths=depths,
        subcirc_depth_min=min(depths, default=0),
        subcirc_depth_max=max(depths, default=0),
        subcirc_depth_avg=round(sum(depths) / len(depths), 2) if depths else 0.0,
        subcirc_gate_counts=counts,
        layout_depth=depth(layout.global_circuit),
        gate_count=gate_count(layout.global_circuit),
        num_remote_gates=len(layout.epr_events),
        assignment=[q for q, _ in layout.qpus],
    )
    if sim is not None:
        state, p = top_state(sim.ideal)
        f = hellinger_fidelity(sim.ideal, sim.sampled)
        rep.top_state, rep.ideal_prob = state, p
        rep.sampled_prob = sim.sampled.get(state, 0.0)
        rep.hellinger_fidelity = f
        rep.error_rate = 1.0 - f
        rep.distribution = dict(list(sim.sampled.items())[:top_k])
        rep.shots, rep.seed = sim.shots, sim.seed
        rep.simulation = "ok"
    return rep
