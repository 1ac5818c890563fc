"""Exact statevector simulation of small parameterized circuits.

Conventions used throughout the package:

* Qubit 0 is the least significant bit of the basis index (little-endian),
  so for n=2 the amplitude vector is ordered |00>, |01>, |10>, |11> with
  the *right* character of a ket naming qubit 0.
* Rotation gates follow the exp(-i*theta*P/2) convention, e.g.
  RY(pi)|0> = |1> up to sign conventions fixed below.
* Pauli strings are index-aligned: ``pauli[q]`` is the operator on qubit q.

Everything is plain numpy on dense amplitude vectors; the qubit count is
capped so memory stays desk-scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapabilityError, ConfigurationError

MAX_QUBITS = 12

GATE_KINDS = ("rx", "ry", "rz", "h", "cx")

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class Gate:
    """One circuit operation.

    kind is one of ``rx, ry, rz, h, cx``; rotations carry an angle, cx
    carries a control. Index bounds are checked against the circuit width
    when the gate is applied.
    """

    kind: str
    target: int
    control: Optional[int] = None
    angle: Optional[float] = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ConfigurationError(f"unknown gate kind '{self.kind}'")
        if self.kind == "cx":
            if self.control is None:
                raise ConfigurationError("cx gate needs a control qubit")
            if self.control == self.target:
                raise ConfigurationError(
                    f"cx control and target must differ (got {self.target})")
        elif self.kind in ("rx", "ry", "rz"):
            if self.angle is None:
                raise ConfigurationError(f"{self.kind} gate needs an angle")


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list on ``n`` qubits; ``cx_depth`` counts cx gates."""

    n: int
    gates: tuple
    cx_depth: int = field(init=False)

    def __post_init__(self):
        if not (1 <= self.n <= MAX_QUBITS):
            raise CapabilityError(
                f"qubit count must be in 1..{MAX_QUBITS}, got {self.n}")
        for g in self.gates:
            if not (0 <= g.target < self.n):
                raise ConfigurationError(
                    f"gate target {g.target} out of range for n={self.n}")
            if g.control is not None and not (0 <= g.control < self.n):
                raise ConfigurationError(
                    f"gate control {g.control} out of range for n={self.n}")
        object.__setattr__(
            self, "cx_depth", sum(1 for g in self.gates if g.kind == "cx"))


@dataclass
class State:
    """Dense complex amplitudes over the computational basis."""

    n: int
    amplitudes: np.ndarray


def init_zero(n: int) -> State:
    """All-amplitude-in-|0...0> state on n qubits."""
    if not (1 <= n <= MAX_QUBITS):
        raise CapabilityError(
            f"qubit count must be in 1..{MAX_QUBITS}, got {n}")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = 1.0
    return State(n=n, amplitudes=amps)


def _rotation_matrix(kind: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "ry":
        return np.array([[c, -s], [s, c]])
    # rz
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def gate_matrix(gate: Gate) -> np.ndarray:
    """2x2 matrix of a single-qubit gate (cx has no 2x2 form)."""
    if gate.kind == "h":
        return _H_MAT
    if gate.kind == "cx":
        raise ConfigurationError("cx is not a single-qubit gate")
    return _rotation_matrix(gate.kind, float(gate.angle))


def _apply_single(amps: np.ndarray, q: int, m: np.ndarray) -> np.ndarray:
    idx = np.arange(amps.size)
    lo = idx[(idx >> q) & 1 == 0]
    hi = lo | (1 << q)
    out = np.empty_like(amps)
    a0, a1 = amps[lo], amps[hi]
    out[lo] = m[0, 0] * a0 + m[0, 1] * a1
    out[hi] = m[1, 0] * a0 + m[1, 1] * a1
    return out


def _apply_cx(amps: np.ndarray, control: int, target: int) -> np.ndarray:
    idx = np.arange(amps.size)
    return np.where((idx >> control) & 1 == 1, amps[idx ^ (1 << target)], amps)


def apply_gate(state: State, gate: Gate) -> State:
    """Return the state after one gate; the input state is not mutated."""
    n = state.n
    if not (0 <= gate.target < n):
        raise ConfigurationError(
            f"gate target {gate.target} out of range for n={n}")
    if gate.kind == "cx":
        if gate.control is None or not (0 <= gate.control < n):
            raise ConfigurationError(
                f"cx control {gate.control} out of range for n={n}")
        return State(n, _apply_cx(state.amplitudes, gate.control, gate.target))
    return State(n, _apply_single(state.amplitudes, gate.target,
                                  gate_matrix(gate)))


def run_circuit(circuit: Circuit, state: Optional[State] = None) -> State:
    """Apply every gate in order, starting from |0...0> by default."""
    st = init_zero(circuit.n) if state is None else state
    if st.n != circuit.n:
        raise ConfigurationError(
            f"state has {st.n} qubits but circuit has {circuit.n}")
    amps = st.amplitudes
    for g in circuit.gates:
        if g.kind == "cx":
            amps = _apply_cx(amps, g.control, g.target)
        else:
            amps = _apply_single(amps, g.target, gate_matrix(g))
    return State(circuit.n, amps)


def _check_pauli(pauli: str, n: int) -> None:
    if len(pauli) != n:
        raise ConfigurationError(
            f"pauli string '{pauli}' has length {len(pauli)}, state has n={n}")
    bad = set(pauli) - set("IXYZ")
    if bad:
        raise ConfigurationError(
            f"pauli string '{pauli}' has invalid characters {sorted(bad)}")


def expectation_pauli(state: State, pauli: str) -> float:
    """Exact <psi|P|psi> for a Pauli string P.

    Args:
        state: the state to evaluate in.
        pauli: index-aligned string over IXYZ, pauli[q] acting on qubit q.

    Returns:
        The (real) expectation value.
    """
    _check_pauli(pauli, state.n)
    flip = 0
    phase_mask = 0
    n_y = 0
    for q, ch in enumerate(pauli):
        if ch in ("X", "Y"):
            flip |= 1 << q
        if ch in ("Y", "Z"):
            phase_mask |= 1 << q
        if ch == "Y":
            n_y += 1
    psi = state.amplitudes
    j = np.arange(psi.size)
    # <j^flip|P|j> = i^nY * (-1)^popcount(j & (Y|Z mask))
    signs = 1.0 - 2.0 * (np.bitwise_count(j & phase_mask) & 1)
    val = np.sum(np.conj(psi[j ^ flip]) * signs * psi) * (1j ** n_y)
    return float(val.real)


def sample_pauli_estimate(state: State, pauli: str, shots: int,
                          rng: np.random.Generator) -> float:
    """Shot-sampled estimate of <P>, measuring in the rotated basis.

    Each non-identity qubit is rotated into the computational basis (H for
    X, S^dagger then H for Y), outcomes are drawn from the Born
    distribution, and the +-1 eigenvalues are averaged over ``shots``.
    """
    _check_pauli(pauli, state.n)
    if shots <= 0:
        raise ConfigurationError(f"shots must be positive, got {shots}")
    amps = state.amplitudes
    meas_mask = 0
    for q, ch in enumerate(pauli):
        if ch == "I":
            continue
        meas_mask |= 1 << q
        if ch == "X":
            amps = _apply_single(amps, q, _H_MAT)
        elif ch == "Y":
            sdg = np.array([[1, 0], [0, -1j]], dtype=complex)
            amps = _apply_single(amps, q, _H_MAT @ sdg)
    if meas_mask == 0:
        return 1.0
    probs = np.abs(amps) ** 2
    probs = probs / probs.sum()
    counts = rng.multinomial(shots, probs)
    outcomes = np.arange(probs.size)
    eigvals = 1.0 - 2.0 * (np.bitwise_count(outcomes & meas_mask) & 1)
    return float(np.dot(counts, eigvals) / shots)


def pauli_to_dense(pauli: str) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli string (oracle-grade, kron built).

    Qubit 0 is the innermost (fastest-varying) kron factor, matching the
    little-endian amplitude ordering.
    """
    if len(pauli) > MAX_QUBITS:
        raise CapabilityError(
            f"dense oracle capped at {MAX_QUBITS} qubits, got {len(pauli)}")
    bad = set(pauli) - set("IXYZ")
    if bad:
        raise ConfigurationError(
            f"pauli string '{pauli}' has invalid characters {sorted(bad)}")
    out = np.array([[1.0 + 0j]])
    for ch in pauli:
        out = np.kron(_PAULI_MATS[ch], out)
    return out
