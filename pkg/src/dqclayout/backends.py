"""QPU backend descriptions and the registry loaded from a config file."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import yaml

from .circuit import GateKind


class ConfigError(ValueError):
    """Malformed configuration; ``path`` locates the offending key."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class CapacityError(ValueError):
    pass


ALWAYS_ALLOWED = frozenset({GateKind.MEASURE, GateKind.RESET, GateKind.BARRIER})
_CONTINUOUS = frozenset({GateKind.RZ, GateKind.RX, GateKind.RY})


@dataclass(frozen=True)
class BackendSpec:
    name: str
    num_qubits: int
    coupling: frozenset[tuple[int, int]]
    basis_gates: frozenset[GateKind]

    def __post_init__(self):
        edges = set()
        for pair in self.coupling:
            a, b = (int(x) for x in pair)
            if a == b:
                raise ConfigError(f"self-loop ({a},{b}) in coupling", self.name)
            for q in (a, b):
                if not 0 <= q < self.num_qubits:
                    raise ConfigError(f"coupling qubit {q} out of range for {self.num_qubits} qubits",
                                      self.name)
            edges.add((min(a, b), max(a, b)))
        object.__setattr__(self, "coupling", frozenset(edges))
        basis = frozenset(GateKind(g) for g in self.basis_gates)
        object.__setattr__(self, "basis_gates", basis)
        if GateKind.CX not in basis or not basis & _CONTINUOUS:
            raise ConfigError("basis_gates must include cx and a continuous rotation", self.name)
        if not is_connected(range(self.num_qubits), self.coupling):
            raise ConfigError("coupling graph is disconnected", self.name)

    @classmethod
    def build(cls, name: str, num_qubits: int, coupling: Iterable, basis_gates: Iterable[str]):
        return cls(name, num_qubits, frozenset(tuple(p) for p in coupling),
                   frozenset(GateKind(g) for g in basis_gates))

    def are_coupled(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.coupling

    def neighbors(self, q: int) -> list[int]:
        return sorted({b for a, b in self.coupling if a == q} | {a for a, b in self.coupling if b == q})

    def allows(self, kind: GateKind) -> bool:
        return kind in self.basis_gates or kind in ALWAYS_ALLOWED


def is_connected(nodes: Iterable[int], edges: Iterable[tuple[int, int]]) -> bool:
    nodes = set(nodes)
    if len(nodes) <= 1:
        return True
    adj: dict[int, set[int]] = {q: set() for q in nodes}
    for a, b in edges:
        if a in nodes and b in nodes:
            adj[a].add(b)
            adj[b].add(a)
    start = min(nodes)
    seen, todo = {start}, deque([start])
    while todo:
        for nb in adj[todo.popleft()]:
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return seen == nodes


_IBM_BASIS = ("rz", "sx", "x", "cx")

BUILTIN_BACKENDS: dict[str, BackendSpec] = {
    spec.name: spec for spec in (
        BackendSpec.build("FakeVigoV2", 5, [(0, 1), (1, 2), (1, 3), (3, 4)], _IBM_BASIS),
        BackendSpec.build("FakeAthensV2", 5, [(0, 1), (1, 2), (2, 3), (3, 4)], _IBM_BASIS),
        BackendSpec.build("FakeLagosV2", 7, [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)],
                          _IBM_BASIS),
    )
}


class BackendRegistry(Mapping[str, BackendSpec]):
    """Read-only name -> BackendSpec map (names are case-sensitive)."""

    def __init__(self, specs: Mapping[str, BackendSpec] | None = None):
        self._specs = dict(BUILTIN_BACKENDS)
        self._specs.update(specs or {})

    def __getitem__(self, name: str) -> BackendSpec:
        try:
            return self._specs[name]
        except KeyError:
            raise ConfigError(f"unknown backend {name!r}") from None

    def __iter__(self):
        return iter(sorted(self._specs))

    def __len__(self) -> int:
        return len(self._specs)


def _parse_entry(entry, where: str) -> BackendSpec:
    if not isinstance(entry, dict):
        raise ConfigError("backend entry must be a mapping", where)
    for key in ("name", "num_qubits", "coupling", "basis_gates"):
        if key not in entry:
            raise ConfigError(f"missing key {key!r}", where)
    unknown = set(entry) - {"name", "num_qubits", "coupling", "basis_gates"}
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r}", where)
    name, n = entry["name"], entry["num_qubits"]
    if not isinstance(name, str) or not name:
        raise ConfigError("name must be a non-empty string", f"{where}.name")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("num_qubits must be a positive integer", f"{where}.num_qubits")
    coupling = entry["coupling"]
    if not isinstance(coupling, list):
        raise ConfigError("coupling must be a list of pairs", f"{where}.coupling")
    for j, pair in enumerate(coupling):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(q, int) and not isinstance(q, bool) for q in pair)):
            raise ConfigError("coupling entry must be a pair of integers", f"{where}.coupling[{j}]")
    basis = entry["basis_gates"]
    if not isinstance(basis, list):
        raise ConfigError("basis_gates must be a list", f"{where}.basis_gates")
    for j, g in enumerate(basis):
        try:
            GateKind(g)
        except ValueError:
            raise ConfigError(f"unknown gate {g!r}", f"{where}.basis_gates[{j}]") from None
    try:
        return BackendSpec.build(name, n, coupling, basis)
    except ConfigError as e:
        raise ConfigError(str(e).split(": ", 1)[-1], where) from None


def parse_registry(data) -> BackendRegistry:
    """Build a registry from already-decoded config data (a list of entries, or None)."""
    if data is None:
        return BackendRegistry()
    if isinstance(data, dict) and "backends" in data:
        data = data["backends"]
    if not isinstance(data, list):
        raise ConfigError("backend config must be a list of entries", "$")
    specs: dict[str, BackendSpec] = {}
    for i, entry in enumerate(data):
        spec = _parse_entry(entry, f"$[{i}]")
        if spec.name in specs:
            raise ConfigError(f"duplicate backend name {spec.name!r}", f"$[{i}].name")
        specs[spec.name] = spec
    return BackendRegistry(specs)


def load_registry(path: str | Path | None = None) -> BackendRegistry:
    """Load user backends (YAML or JSON) on top of the built-in fakes."""
    if path is None:
        return BackendRegistry()
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse backend config: {e}", str(path)) from None
    return parse_registry(data)


def validate_fit(spec: BackendSpec, needed_qubits: int) -> None:
    if needed_qubits > spec.num_qubits:
        raise CapacityError(
            f"{spec.name} needs {needed_qubits} qubits but has {spec.num_qubits}")
