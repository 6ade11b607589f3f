"""
Stage 1: apply a user partition, turn cross-partition CX gates into remote
placeholders, and project the circuit onto per-partition logical groups.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from .backends import ConfigError
from .circuit import Circuit, GateKind, Instruction, decompose_multiqubit


class PartitionError(ValueError):
    pass


_RANGE = re.compile(r"^\s*q?(\d+)\s*(?:-\s*q?(\d+))?\s*$")


def parse_qubit_range(text: str | int) -> list[int]:
    """``"q0-q2"`` -> [0, 1, 2]; ``"q3"`` -> [3]; plain ints pass through."""
    if isinstance(text, int) and not isinstance(text, bool):
        return [text]
    m = _RANGE.match(str(text))
    if not m:
        raise ConfigError(f"bad qubit range {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else lo
    if hi < lo:
        raise ConfigError(f"empty qubit range {text!r}")
    return list(range(lo, hi + 1))


def format_qubit_range(qubits: Sequence[int]) -> str:
    qs = sorted(qubits)
    if not qs:
        return "-"
    if qs == list(range(qs[0], qs[-1] + 1)) and len(qs) > 1:
        return f"q{qs[0]}-q{qs[-1]}"
    return ",".join(f"q{q}" for q in qs)


@dataclass(frozen=True)
class PartitionPlan:
    """Data-qubit groups, the QPU each group runs on, and each QPU's backend."""

    groups: tuple[tuple[int, ...], ...]
    assignment: tuple[str, ...]
    backends: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(sorted(g)) for g in self.groups))
        object.__setattr__(self, "assignment", tuple(self.assignment))
        object.__setattr__(self, "backends", dict(self.backends))

    @classmethod
    def from_ranges(cls, ranges: Sequence[str | Sequence[str]], assignment: Sequence[str],
                    backends: Mapping[str, str] | None = None) -> "PartitionPlan":
        groups = []
        for entry in ranges:
            items = [entry] if isinstance(entry, (str, int)) else list(entry)
            groups.append(tuple(q for item in items for q in parse_qubit_range(item)))
        return cls(tuple(groups), tuple(assignment), dict(backends or {}))

    def backend_of(self, group: int) -> str:
        qpu = self.assignment[group]
        return self.backends.get(qpu, qpu)

    def group_of(self) -> dict[int, int]:
        return {q: g for g, qs in enumerate(self.groups) for q in qs}

    def validate(self, num_qubits: int) -> None:
        if len(self.assignment) != len(self.groups):
            raise PartitionError(
                f"{len(self.groups)} groups but {len(self.assignment)} assignments")
        if len(set(self.assignment)) != len(self.assignment):
            raise PartitionError("each QPU may host only one group")
        seen: dict[int, int] = {}
        for g, qs in enumerate(self.groups):
            if len(set(qs)) != len(qs):
                raise PartitionError(f"group {g} repeats a qubit")
            for q in qs:
                if q in seen:
                    raise PartitionError(f"qubit {q} is in groups {seen[q]} and {g}")
                seen[q] = g
        if set(seen) != set(range(num_qubits)):
            missing = sorted(set(range(num_qubits)) - set(seen))
            extra = sorted(set(seen) - set(range(num_qubits)))
            raise PartitionError(f"groups must cover q0..q{num_qubits - 1} exactly "
                                 f"(missing {missing}, out of range {extra})")


def load_partition(path: str | Path) -> PartitionPlan:
    """Read ``{partitions: [[...]], assignment: [...], backends: {...}}`` (YAML or JSON)."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse partition file: {e}", str(path)) from None
    return parse_partition(data)


def parse_partition(data) -> PartitionPlan:
    if not isinstance(data, dict):
        raise ConfigError("partition config must be a mapping", "$")
    for key in ("partitions", "assignment"):
        if key not in data:
            raise ConfigError(f"missing key {key!r}", "$")
    parts, assign = data["partitions"], data["assignment"]
    if not isinstance(parts, list) or not parts:
        raise ConfigError("partitions must be a non-empty list", "$.partitions")
    if not isinstance(assign, list) or not all(isinstance(a, str) for a in assign):
        raise ConfigError("assignment must be a list of QPU names", "$.assignment")
    backends = data.get("backends", {}) or {}
    if not isinstance(backends, dict):
        raise ConfigError("backends must map QPU names to backend names", "$.backends")
    return PartitionPlan.from_ranges(parts, assign, backends)


@dataclass(frozen=True)
class RemoteGate:
    id: str
    control: int
    target: int
    control_group: int
    target_group: int
    ordinal: int


def lower_to_remote(c: Circuit, plan: PartitionPlan) -> tuple[Circuit, list[RemoteGate]]:
    """Lower multi-qubit gates to CX, then replace every cross-group CX by a placeholder."""
    plan.validate(c.num_qubits)
    owner = plan.group_of()
    lowered = decompose_multiqubit(c)
    out = lowered.copy_empty()
    remotes: list[RemoteGate] = []
    for ins in lowered.instructions:
        if ins.kind is GateKind.CX and owner[ins.qubits[0]] != owner[ins.qubits[1]]:
            if ins.condition is not None:
                raise PartitionError("conditioned CX across partitions is not supported")
            a, b = ins.qubits
            r = RemoteGate(f"r{len(remotes)}", a, b, owner[a], owner[b], len(remotes))
            remotes.append(r)
            out.append(Instruction(GateKind.REMOTE, (a, b), label=r.id))
        else:
            out.append(ins)
    return out, remotes


def count_comm_qubits(remotes: Sequence[RemoteGate]) -> int:
    """One fresh EPR pair, i.e. two communication qubits, per remote gate."""
    return 2 * len(remotes)


@dataclass
class LogicalGroup:
    index: int
    data_qubits: list[int]
    local_circuit: Circuit
    remote_refs: list[str]
    positions: list[int]  # global instruction index of each local instruction

    @property
    def local_index(self) -> dict[int, int]:
        return {q: i for i, q in enumerate(self.data_qubits)}


def build_groups(c_lowered: Circuit, plan: PartitionPlan) -> list[LogicalGroup]:
    """Project the lowered circuit onto each group, in global order.

    A remote placeholder becomes a one-qubit marker (same label) on the side
    that owns each of its endpoints. Barriers are split per group.
    """
    owner = plan.group_of()
    groups = [
        LogicalGroup(g, list(qs), Circuit(len(qs), c_lowered.num_clbits), [], [])
        for g, qs in enumerate(plan.groups)
    ]
    local = {q: groups[owner[q]].local_index[q] for q in owner}
    writer_group: dict[int, int] = {}
    for pos, ins in enumerate(c_lowered.instructions):
        if ins.kind is GateKind.REMOTE:
            for q in ins.qubits:
                grp = groups[owner[q]]
                grp.local_circuit.append(Instruction(GateKind.REMOTE, (local[q],), label=ins.label))
                grp.remote_refs.append(ins.label)
                grp.positions.append(pos)
            continue
        touched = sorted({owner[q] for q in ins.qubits})
        if ins.kind is GateKind.BARRIER:
            for g in touched:
                qs = tuple(local[q] for q in ins.qubits if owner[q] == g)
                groups[g].local_circuit.append(Instruction(GateKind.BARRIER, qs))
                groups[g].positions.append(pos)
            continue
        if len(touched) != 1:
            raise PartitionError(f"{ins.kind.value} on {ins.qubits} spans partitions")
        g = touched[0]
        if ins.condition is not None and writer_group.get(ins.condition[0], g) != g:
            raise PartitionError(
                f"condition on c{ins.condition[0]} crosses partitions; not supported")
        for bit in ins.clbits:
            writer_group[bit] = g
        groups[g].local_circuit.append(ins.remap(local))
        groups[g].positions.append(pos)
    return groups
