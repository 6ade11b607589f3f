"""
Dense statevector simulation with mid-circuit measurement, reset and
classically conditioned gates.

Qubit 0 is the least-significant bit of the amplitude index. Output bitstrings
are printed most-significant first, i.e. highest key clbit on the left.

Sampling uses shot branching: a group of shots shares one state until a
measurement splits it binomially. Branches whose states coincide (up to global
phase) and agree on every classical bit still relevant are merged, which keeps
TeleGate layouts at a handful of live branches. The random source is
``numpy.random.Generator(PCG64(seed))``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, GateKind, Instruction

Distribution = dict[str, float]

DEFAULT_QUBIT_CAP = 24
BRANCH_CAP = 2 ** 16
PROB_EPS = 1e-14  # outcome probabilities below this are treated as impossible
QUBIT_CAP_ENV = "DQC_QUBIT_CAP"


class SimulationError(RuntimeError):
    pass


class TooLargeError(SimulationError):
    """The circuit exceeds the configured qubit (or branch) cap; nothing was simulated."""


def default_qubit_cap() -> int:
    return int(os.environ.get(QUBIT_CAP_ENV, DEFAULT_QUBIT_CAP))


_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    GateKind.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.diag([1, -1]).astype(complex),
    GateKind.S: np.diag([1, 1j]),
    GateKind.SDG: np.diag([1, -1j]),
    GateKind.T: np.diag([1, np.exp(1j * math.pi / 4)]),
    GateKind.TDG: np.diag([1, np.exp(-1j * math.pi / 4)]),
    GateKind.SX: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    # two-qubit matrices: first listed qubit is the high bit of the 4x4 index
    GateKind.CX: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
_CCX = np.eye(8, dtype=complex)
_CCX[[6, 7]] = _CCX[[7, 6]]
_FIXED[GateKind.CCX] = _CCX


def gate_matrix(kind: GateKind, angle: float | None = None) -> np.ndarray:
    if kind in _FIXED:
        return _FIXED[kind]
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind is GateKind.RZ:
        return np.diag([complex(c, -s), complex(c, s)])
    raise SimulationError(f"{kind.value} has no matrix")


def _apply_matrix(psi: np.ndarray, n: int, u: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply ``u`` to ``psi`` shaped (2,)*n (+ optional trailing batch axes)."""
    k = len(qubits)
    axes = [n - 1 - q for q in qubits]
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, psi, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


@dataclass
class StateVector:
    amplitudes: np.ndarray
    num_qubits: int

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amps = np.zeros(2 ** n, dtype=complex)
        amps[0] = 1.0
        return cls(amps, n)

    @classmethod
    def from_label(cls, bits: str) -> "StateVector":
        """Computational basis state; ``bits`` is most-significant qubit first."""
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps, len(bits))

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probability_one(self, q: int) -> float:
        t = np.abs(self.tensor) ** 2
        axis = self.num_qubits - 1 - q
        return float(np.take(t, 1, axis=axis).sum())

    def marginal(self, qubits: Sequence[int]) -> np.ndarray:
        """Joint probabilities over ``qubits``; entry index has qubits[0] as its high bit."""
        return _marginal(self.tensor, self.num_qubits, qubits)

    def restrict(self, qubits: Sequence[int], tol: float = 1e-10) -> "StateVector":
        """State of ``qubits`` (qubits[i] becomes qubit i) when every other qubit is in |0>."""
        n = self.num_qubits
        rest = [q for q in range(n) if q not in set(qubits)]
        idx = [slice(None)] * n
        for q in rest:
            idx[n - 1 - q] = 0
        sub = self.tensor[tuple(idx)]
        if abs(np.linalg.norm(sub) - 1.0) > tol:
            raise SimulationError("remaining qubits are not in |0>")
        # axes left are the kept qubits in descending qubit order
        kept = sorted(qubits, reverse=True)
        k = len(qubits)
        perm = [kept.index(q) for q in reversed(list(qubits))]
        return StateVector(np.transpose(sub, perm).reshape(-1), k)

    def equiv(self, other: "StateVector", tol: float = 1e-10) -> bool:
        """Equal up to global phase."""
        return abs(abs(np.vdot(self.amplitudes, other.amplitudes)) - 1.0) <= tol


def _marginal(psi: np.ndarray, n: int, qubits: Sequence[int]) -> np.ndarray:
    probs = np.abs(psi) ** 2
    keep = [n - 1 - q for q in qubits]
    drop = tuple(a for a in range(n) if a not in keep)
    m = probs.sum(axis=drop) if drop else probs
    # remaining axes are in ascending axis order; reorder to match ``qubits``
    order = sorted(keep)
    m = np.transpose(m, [order.index(a) for a in keep])
    return m.reshape(-1)


def _project(psi: np.ndarray, n: int, q: int, outcome: int) -> tuple[np.ndarray, float]:
    """Project qubit q onto ``outcome``; returns (unnormalised state, probability)."""
    axis = n - 1 - q
    out = psi.copy()
    idx = [slice(None)] * n
    idx[axis] = 1 - outcome
    out[tuple(idx)] = 0
    p = float(np.vdot(out, out).real)
    return out, p


def _flip(psi: np.ndarray, n: int, q: int) -> np.ndarray:
    return np.flip(psi, axis=n - 1 - q).copy()


def _check_range(ins: Instruction, n: int, nbits: int):
    for q in ins.qubits:
        if not 0 <= q < n:
            raise SimulationError(f"qubit {q} out of range for {n}-qubit state")
    for c in ins.clbits + ((ins.condition[0],) if ins.condition else ()):
        if not 0 <= c < nbits:
            raise SimulationError(f"clbit {c} out of range")


def apply(state: StateVector, ins: Instruction, clbits: list[int],
          rng: np.random.Generator | None = None,
          forced: int | None = None) -> tuple[StateVector, float]:
    """Apply one instruction, writing measurement results into ``clbits``.

    Returns the new state and the Born probability of the realised outcome
    (1.0 for unitary steps and skipped conditioned gates). ``forced`` fixes a
    measurement outcome instead of sampling it.
    """
    n = state.num_qubits
    _check_range(ins, n, len(clbits))
    kind = ins.kind
    if kind is GateKind.BARRIER:
        return state, 1.0
    if kind is GateKind.REMOTE:
        raise SimulationError("cannot simulate a remote placeholder")
    if ins.condition is not None and clbits[ins.condition[0]] != ins.condition[1]:
        return state, 1.0
    psi = state.tensor
    if kind.is_unitary:
        out = _apply_matrix(psi, n, gate_matrix(kind, ins.angle), ins.qubits)
        return StateVector(out.reshape(-1), n), 1.0
    q = ins.qubits[0]
    p1 = state.probability_one(q)
    if forced is None:
        if p1 <= PROB_EPS or p1 >= 1 - PROB_EPS:
            outcome = int(p1 >= 1 - PROB_EPS)
        elif rng is None:
            raise SimulationError("random measurement needs an rng or a forced outcome")
        else:
            outcome = int(rng.random() < p1)
    else:
        outcome = int(forced)
    proj, p = _project(psi, n, q, outcome)
    if p <= 0:
        raise SimulationError(f"forced outcome {outcome} on qubit {q} has probability 0")
    proj = proj / math.sqrt(p)
    if kind is GateKind.MEASURE:
        clbits[ins.clbits[0]] = outcome
    elif outcome == 1:  # reset
        proj = _flip(proj, n, q)
    return StateVector(proj.reshape(-1), n), p


# -- branch engine -----------------------------------------------------------

@dataclass
class _Branch:
    psi: np.ndarray
    bits: list[int]
    weight: float
    shots: int = 0
    record: list[int] = field(default_factory=list)


def output_clbits(c: Circuit) -> list[int]:
    """Clbits written by the last measurement of each measured qubit, ascending."""
    last: dict[int, int] = {}
    for ins in c.instructions:
        if ins.kind is GateKind.MEASURE:
            last[ins.qubits[0]] = ins.clbits[0]
    return sorted(set(last.values()))


def bitstring(bits: Sequence[int], key: Sequence[int]) -> str:
    return "".join(str(bits[k]) for k in reversed(key))


def _terminal_start(c: Circuit) -> int:
    """Index where the trailing block of unconditioned measures / barriers begins."""
    i = len(c.instructions)
    while i > 0:
        ins = c.instructions[i - 1]
        if ins.kind is GateKind.BARRIER or (ins.kind is GateKind.MEASURE and ins.condition is None):
            i -= 1
        else:
            break
    return i


def _live_bits_after(c: Circuit, key: Sequence[int]) -> list[frozenset[int]]:
    """live[i]: bits whose value can still matter once instruction i has executed."""
    live = [frozenset()] * len(c.instructions)
    acc = set(key)
    for i in range(len(c.instructions) - 1, -1, -1):
        live[i] = frozenset(acc)
        ins = c.instructions[i]
        if ins.condition is not None:
            acc.add(ins.condition[0])
    return live


def _merge(branches: list[_Branch], live: frozenset[int], tol: float = 1e-10) -> list[_Branch]:
    merged: list[_Branch] = []
    for b in branches:
        sig = [b.bits[i] for i in sorted(live)]
        for m in merged:
            if [m.bits[i] for i in sorted(live)] != sig:
                continue
            ov = abs(np.vdot(m.psi, b.psi))
            if abs(ov - 1.0) <= tol:
                m.weight += b.weight
                m.shots += b.shots
                break
        else:
            merged.append(b)
    return merged


class _Engine:
    def __init__(self, c: Circuit, key: Sequence[int], rng: np.random.Generator | None,
                 shots: int, qubit_cap: int | None):
        cap = default_qubit_cap() if qubit_cap is None else qubit_cap
        if c.num_qubits > cap:
            raise TooLargeError(f"circuit has {c.num_qubits} qubits, cap is {cap}")
        self.c, self.key, self.rng, self.shots = c, list(key), rng, shots
        self.n = c.num_qubits

    def _split(self, b: _Branch, probs: Sequence[float]) -> list[tuple[int, float, int]]:
        """(outcome, probability, shots) for each realised outcome."""
        probs = np.array([p if p > PROB_EPS else 0.0 for p in probs])
        probs = probs / probs.sum()
        if self.rng is None:
            return [(o, float(p), 0) for o, p in enumerate(probs) if p > 0]
        counts = self.rng.multinomial(b.shots, probs)
        return [(o, float(probs[o]), int(k)) for o, k in enumerate(counts) if k > 0]

    def _collapse(self, b: _Branch, ins: Instruction) -> list[_Branch]:
        q = ins.qubits[0]
        p0 = _project(b.psi, self.n, q, 0)[1]
        p1 = _project(b.psi, self.n, q, 1)[1]
        out = []
        for outcome, p, k in self._split(b, [p0, p1]):
            proj, pp = _project(b.psi, self.n, q, outcome)
            psi = proj / math.sqrt(pp)
            bits = list(b.bits)
            if ins.kind is GateKind.MEASURE:
                bits[ins.clbits[0]] = outcome
            elif outcome == 1:
                psi = _flip(psi, self.n, q)
            out.append(_Branch(psi, bits, b.weight * p, k, b.record + [outcome]))
        return out

    def run(self) -> dict[str, float]:
        c, n = self.c, self.n
        psi = np.zeros((2,) * n, dtype=complex)
        psi[(0,) * n] = 1.0
        branches = [_Branch(psi, [0] * c.num_clbits, 1.0, self.shots)]
        stop = _terminal_start(c)
        live = _live_bits_after(c, self.key)
        for i, ins in enumerate(c.instructions[:stop]):
            _check_range(ins, n, c.num_clbits)
            kind = ins.kind
            if kind is GateKind.BARRIER:
                continue
            if kind is GateKind.REMOTE:
                raise SimulationError("cannot simulate a remote placeholder")
            if kind.is_unitary:
                u = gate_matrix(kind, ins.angle)
                for b in branches:
                    if ins.condition is None or b.bits[ins.condition[0]] == ins.condition[1]:
                        b.psi = _apply_matrix(b.psi, n, u, ins.qubits)
                continue
            branches = [child for b in branches for child in self._collapse(b, ins)]
            branches = _merge(branches, live[i])
            if len(branches) > BRANCH_CAP:
                raise TooLargeError(f"more than {BRANCH_CAP} live measurement branches")
        return self._terminal(branches, c.instructions[stop:])

    def _terminal(self, branches: list[_Branch], tail: list[Instruction]) -> dict[str, float]:
        measures = [ins for ins in tail if ins.kind is GateKind.MEASURE]
        qubits = sorted({ins.qubits[0] for ins in measures})
        result: dict[str, float] = {}
        for b in branches:
            probs = _marginal(b.psi, self.n, qubits) if qubits else np.ones(1)
            for outcome, p, k in self._split(b, probs):
                values = {q: (outcome >> (len(qubits) - 1 - j)) & 1 for j, q in enumerate(qubits)}
                bits = list(b.bits)
                for ins in measures:
                    bits[ins.clbits[0]] = values[ins.qubits[0]]
                s = bitstring(bits, self.key)
                result[s] = result.get(s, 0.0) + (k if self.rng is not None else b.weight * p)
        return result


def _sorted(d: dict[str, float]) -> Distribution:
    return dict(sorted(d.items(), key=lambda kv: (-kv[1], kv[0])))


def sample_counts(c: Circuit, shots: int, seed: int = 0, key_clbits: Sequence[int] | None = None,
                  qubit_cap: int | None = None) -> dict[str, int]:
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    key = output_clbits(c) if key_clbits is None else list(key_clbits)
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = _Engine(c, key, rng, shots, qubit_cap).run()
    return {k: int(v) for k, v in _sorted(counts).items()}


def run_shots(c: Circuit, shots: int, seed: int = 0, key_clbits: Sequence[int] | None = None,
              qubit_cap: int | None = None) -> Distribution:
    """Sampled output distribution over the key clbits (final data measurements by default)."""
    counts = sample_counts(c, shots, seed, key_clbits, qubit_cap)
    return {k: v / shots for k, v in counts.items()}


def ideal_distribution(c: Circuit, key_clbits: Sequence[int] | None = None,
                       qubit_cap: int | None = None) -> Distribution:
    """Exact output distribution, enumerating mid-circuit measurement branches by weight."""
    key = output_clbits(c) if key_clbits is None else list(key_clbits)
    return _sorted(_Engine(c, key, None, 0, qubit_cap).run())


def hellinger_fidelity(p: dict[str, float], q: dict[str, float]) -> float:
    """(sum_i sqrt(p_i q_i))^2, missing keys counting as zero."""
    s = sum(math.sqrt(p[k] * q[k]) for k in p.keys() & q.keys() if p[k] > 0 and q[k] > 0)
    return min(1.0, s * s)


@dataclass
class Branch:
    """One forced-outcome run: collapse outcomes in program order (measures and random resets)."""

    record: tuple[int, ...]
    state: StateVector
    weight: float
    clbits: list[int]
    reachable: bool = True


def enumerate_branches(c: Circuit, max_measures: int = 16,
                       qubit_cap: int | None = None) -> list[Branch]:
    """All 2^m forced-outcome runs of ``c`` with their Born weights.

    Zero-weight branches are kept (weight 0, ``reachable=False``) with the
    state the projection would leave if renormalised from the pre-measurement
    basis state, which is arbitrary but normalised.
    """
    n_meas = sum(ins.kind is GateKind.MEASURE for ins in c.instructions)
    if n_meas > max_measures:
        raise TooLargeError(f"{n_meas} measurements exceed the branch cap of {max_measures}")
    cap = default_qubit_cap() if qubit_cap is None else qubit_cap
    if c.num_qubits > cap:
        raise TooLargeError(f"circuit has {c.num_qubits} qubits, cap is {cap}")
    n = c.num_qubits
    psi0 = np.zeros(2 ** n, dtype=complex)
    psi0[0] = 1.0
    out: list[Branch] = []

    def walk(i: int, psi: np.ndarray, bits: list[int], weight: float, record: tuple, ok: bool):
        while i < len(c.instructions):
            ins = c.instructions[i]
            _check_range(ins, n, c.num_clbits)
            kind = ins.kind
            if kind is GateKind.BARRIER:
                i += 1
                continue
            if kind is GateKind.REMOTE:
                raise SimulationError("cannot simulate a remote placeholder")
            if kind.is_unitary:
                if ins.condition is None or bits[ins.condition[0]] == ins.condition[1]:
                    psi = _apply_matrix(psi.reshape((2,) * n), n, gate_matrix(kind, ins.angle),
                                        ins.qubits).reshape(-1)
                i += 1
                continue
            q = ins.qubits[0]
            t = psi.reshape((2,) * n)
            if kind is GateKind.RESET:
                p1 = _project(t, n, q, 1)[1]
                if p1 <= PROB_EPS:
                    i += 1
                    continue
                if p1 >= 1 - PROB_EPS:
                    psi = _flip(_project(t, n, q, 1)[0], n, q).reshape(-1)
                    psi = psi / np.linalg.norm(psi)
                    i += 1
                    continue
            for outcome in (0, 1):
                proj, p = _project(t, n, q, outcome)
                reach = ok and p > PROB_EPS
                if p > 0:
                    nxt = proj / math.sqrt(p)
                else:  # unreachable: substitute the basis state with the forced value
                    nxt = np.zeros_like(t)
                    idx = [0] * n
                    idx[n - 1 - q] = outcome
                    nxt[tuple(idx)] = 1.0
                b = list(bits)
                if kind is GateKind.MEASURE:
                    b[ins.clbits[0]] = outcome
                elif outcome == 1:
                    nxt = _flip(nxt, n, q)
                walk(i + 1, nxt.reshape(-1), b, weight * p if reach else 0.0,
                     record + (outcome,), reach)
            return
        out.append(Branch(record, StateVector(psi, n), weight, bits, ok))

    walk(0, psi0, [0] * c.num_clbits, 1.0, (), True)
    return out


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense 2^n x 2^n unitary of a measurement-free circuit (column j = image of |j>)."""
    n = c.num_qubits
    dim = 2 ** n
    psi = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for ins in c.instructions:
        if ins.kind is GateKind.BARRIER:
            continue
        if not ins.kind.is_unitary or ins.condition is not None:
            raise SimulationError(f"{ins.kind.value} has no unitary")
        psi = _apply_matrix(psi, n, gate_matrix(ins.kind, ins.angle), ins.qubits)
    return psi.reshape(dim, dim)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    """Elementwise equality after removing the global phase of ``b`` relative to ``a``."""
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    j = int(np.argmax(np.abs(a)))
    if abs(b[j]) < 1e-15:
        return False
    phase = (a[j] / abs(a[j])) / (b[j] / abs(b[j]))
    return bool(np.max(np.abs(a - phase * b)) <= tol)


def total_variation(p: dict[str, float], q: dict[str, float]) -> float:
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in p.keys() | q.keys())


def sort_distribution(d: dict[str, float]) -> Distribution:
    return _sorted(d)


def top_state(d: dict[str, float]) -> tuple[str, float]:
    k, v = next(iter(_sorted(d).items()))
    return k, v
