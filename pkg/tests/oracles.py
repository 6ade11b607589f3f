"""Independent reference computations used by the tests.

Everything here is written directly against numpy with explicit Kronecker
products, so it shares no code with the package's tensordot simulator.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
S = np.diag([1, 1j])
T = np.diag([1, np.exp(1j * np.pi / 4)])
SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])


def rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def rx(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


ONE_QUBIT = {
    "h": lambda a: H, "x": lambda a: X, "y": lambda a: Y, "z": lambda a: Z,
    "s": lambda a: S, "sdg": lambda a: S.conj().T, "t": lambda a: T, "tdg": lambda a: T.conj().T,
    "sx": lambda a: SX, "rx": rx, "ry": ry, "rz": rz,
}


def embed_1q(u, q, n):
    """Little-endian: qubit 0 is the rightmost Kronecker factor."""
    out = np.array([[1]], dtype=complex)
    for k in range(n - 1, -1, -1):
        out = np.kron(out, u if k == q else I2)
    return out


def controlled(u, c, t, n):
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    return embed_1q(p0, c, n) + embed_1q(p1, c, n) @ embed_1q(u, t, n)


def cx(c, t, n):
    return controlled(X, c, t, n)


def swap(a, b, n):
    return cx(a, b, n) @ cx(b, a, n) @ cx(a, b, n)


def ccx(a, b, t, n):
    dim = 2 ** n
    m = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        i = j ^ (1 << t) if (j >> a) & 1 and (j >> b) & 1 else j
        m[i, j] = 1
    return m


def unitary(circuit) -> np.ndarray:
    """Matrix of a measurement-free circuit by explicit Kronecker products."""
    n = circuit.num_qubits
    u = np.eye(2 ** n, dtype=complex)
    for ins in circuit.instructions:
        k = ins.kind.value
        if k == "barrier":
            continue
        if k in ONE_QUBIT:
            g = embed_1q(ONE_QUBIT[k](ins.angle), ins.qubits[0], n)
        elif k == "cx":
            g = cx(*ins.qubits, n)
        elif k == "cz":
            g = controlled(Z, *ins.qubits, n)
        elif k == "swap":
            g = swap(*ins.qubits, n)
        elif k == "ccx":
            g = ccx(*ins.qubits, n)
        else:
            raise ValueError(k)
        u = g @ u
    return u


def same_up_to_phase(a, b, tol):
    a, b = np.asarray(a), np.asarray(b)
    j = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    phase = a[j] / b[j]
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b))) <= tol


def logical_unitary(compiled, num_logical: int, num_physical: int) -> np.ndarray:
    """Action of a compiled circuit on the logical register.

    Column j feeds basis state j through the initial placement (spare physical
    qubits in |0>) and reads the result back through the final placement.
    """
    from dqclayout.sim import StateVector
    from dqclayout.circuit import Circuit

    init = [compiled.initial_map[i] for i in range(num_logical)]
    final = [compiled.final_map[i] for i in range(num_logical)]
    circ = compiled.circuit
    width = max(num_physical, circ.num_qubits)
    big = unitary(Circuit(width, 0, list(circ.instructions)))
    cols = []
    for j in range(2 ** num_logical):
        idx = sum(((j >> i) & 1) << init[i] for i in range(num_logical))
        out = StateVector(big[:, idx].copy(), width).restrict(final)
        cols.append(out.amplitudes)
    return np.stack(cols, axis=1)


def hellinger(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    bc = sum(np.sqrt(p.get(k, 0.0) * q.get(k, 0.0)) for k in keys)
    return float(bc ** 2)
