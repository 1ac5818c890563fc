"""Hardware-efficient trial circuits with linear entanglement.

Two families are provided:

* ``SU2``: alternating RY and RZ rotation layers (2 parameters per qubit
  per layer block).
* ``RA``: RY-only rotation layers.

A circuit with ``reps`` repetitions has ``reps + 1`` rotation layers; a
chain of CX(q, q+1) gates follows each of the first ``reps`` layers, so
the final layer is rotations only and the cx count is ``reps * (n - 1)``.
Parameters are consumed layer by layer, qubit-ascending (RY block before
RZ block inside an SU2 layer).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .statevector import MAX_QUBITS, Circuit, Gate

ANSATZ_KINDS = ("SU2", "RA")


@dataclass(frozen=True)
class AnsatzSpec:
    kind: str
    n: int
    reps: int

    def __post_init__(self):
        if self.kind not in ANSATZ_KINDS:
            raise ConfigurationError(
                f"unknown ansatz kind '{self.kind}', "
                f"available: {', '.join(ANSATZ_KINDS)}")
        if not (1 <= self.n <= MAX_QUBITS):
            raise ConfigurationError(
                f"ansatz qubit count must be in 1..{MAX_QUBITS}, got {self.n}")
        if self.reps < 0:
            raise ConfigurationError(f"reps must be >= 0, got {self.reps}")


def param_count(spec: AnsatzSpec) -> int:
    """Number of rotation angles the ansatz consumes."""
    per_layer = 2 * spec.n if spec.kind == "SU2" else spec.n
    return per_layer * (spec.reps + 1)


def build(spec: AnsatzSpec, params: np.ndarray) -> Circuit:
    """Assemble the circuit for one parameter vector.

    Args:
        spec: ansatz family, width, and repetition count.
        params: flat angle vector of length param_count(spec).

    Returns:
        The parameterized Circuit.
    """
    params = np.asarray(params, dtype=float)
    want = param_count(spec)
    if params.ndim != 1 or params.size != want:
        raise ConfigurationError(
            f"{spec.kind} ansatz with n={spec.n}, reps={spec.reps} needs "
            f"{want} parameters, got {params.size}")
    gates = []
    pos = 0
    for layer in range(spec.reps + 1):
        for q in range(spec.n):
            gates.append(Gate("ry", target=q, angle=float(params[pos])))
            pos += 1
        if spec.kind == "SU2":
            for q in range(spec.n):
                gates.append(Gate("rz", target=q, angle=float(params[pos])))
                pos += 1
        if layer < spec.reps:
            for q in range(spec.n - 1):
                gates.append(Gate("cx", target=q + 1, control=q))
    return Circuit(n=spec.n, gates=tuple(gates))
