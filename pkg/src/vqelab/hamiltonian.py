"""Pauli-sum observables: construction, file I/O, and exact spectra.

File format (one term per line, '#' starts a comment):

    # optional comment
    n=2
    -1.0 ZZ
    -1.0 XI
    -1.0 IX

The ``n=<int>`` line is optional when at least one term pins the width.
Duplicate strings are merged by summing coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import CapabilityError, ConfigurationError, ParseError
from .statevector import (
    MAX_QUBITS,
    State,
    expectation_pauli,
    pauli_to_dense,
    sample_pauli_estimate,
)


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings on a fixed qubit count."""

    n: int
    terms: Tuple[Tuple[float, str], ...]

    def __post_init__(self):
        if not (1 <= self.n <= MAX_QUBITS):
            raise CapabilityError(
                f"qubit count must be in 1..{MAX_QUBITS}, got {self.n}")
        if not self.terms:
            raise ConfigurationError("PauliSum needs at least one term")
        seen = set()
        for coef, pauli in self.terms:
            if len(pauli) != self.n or set(pauli) - set("IXYZ"):
                raise ConfigurationError(
                    f"invalid pauli string '{pauli}' for n={self.n}")
            if pauli in seen:
                raise ConfigurationError(
                    f"duplicate pauli string '{pauli}' (merge before building)")
            seen.add(pauli)
            if not np.isfinite(coef):
                raise ConfigurationError(
                    f"non-finite coefficient {coef} for '{pauli}'")


def pauli_sum(n: int, raw_terms: Sequence[Tuple[float, str]]) -> PauliSum:
    """Build a PauliSum, merging duplicate strings by coefficient addition."""
    merged: dict = {}
    for coef, pauli in raw_terms:
        merged[pauli] = merged.get(pauli, 0.0) + float(coef)
    return PauliSum(n=n, terms=tuple((c, p) for p, c in merged.items()))


def tfim_1d(n: int, J: float, h: float, boundary: str = "open") -> PauliSum:
    """1-D transverse-field Ising model: -J * sum ZZ - h * sum X.

    Open boundary has n-1 ZZ bonds, periodic adds the wrap-around bond.
    """
    if boundary not in ("open", "periodic"):
        raise ConfigurationError(
            f"boundary must be 'open' or 'periodic', got '{boundary}'")
    if n < 2:
        raise ConfigurationError(f"tfim_1d needs n >= 2, got {n}")
    terms = []
    bonds = n - 1 if boundary == "open" else n
    for i in range(bonds):
        chars = ["I"] * n
        chars[i] = "Z"
        chars[(i + 1) % n] = "Z"
        terms.append((-J, "".join(chars)))
    for i in range(n):
        chars = ["I"] * n
        chars[i] = "X"
        terms.append((-h, "".join(chars)))
    return pauli_sum(n, terms)


def to_dense(ham: PauliSum) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the observable (n capped at 12)."""
    mat = np.zeros((2 ** ham.n, 2 ** ham.n), dtype=complex)
    for coef, pauli in ham.terms:
        mat += coef * pauli_to_dense(pauli)
    return mat


def exact_ground_energy(ham: PauliSum) -> float:
    """Smallest eigenvalue of the dense matrix."""
    return float(np.linalg.eigvalsh(to_dense(ham))[0])


def objective(ham: PauliSum, state: State, shots: Optional[int] = None,
              rng: Optional[np.random.Generator] = None) -> float:
    """Energy of ``state`` under ``ham``: analytic, or shot-sampled per term."""
    if ham.n != state.n:
        raise ConfigurationError(
            f"observable has n={ham.n} but state has n={state.n}")
    if shots is None:
        return float(sum(c * expectation_pauli(state, p)
                         for c, p in ham.terms))
    if rng is None:
        raise ConfigurationError("shot-sampled objective needs an rng")
    return float(sum(c * sample_pauli_estimate(state, p, shots, rng)
                     for c, p in ham.terms))


def load_pauli_sum(path: str) -> PauliSum:
    """Parse a Pauli-sum file; errors carry 1-based line numbers."""
    n: Optional[int] = None
    raw_terms = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if text.startswith("n="):
                if raw_terms or n is not None:
                    raise ParseError(
                        f"{path}:{lineno}: n= must appear once, before terms")
                try:
                    n = int(text[2:])
                except ValueError:
                    raise ParseError(
                        f"{path}:{lineno}: bad qubit count '{text}'") from None
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ParseError(
                    f"{path}:{lineno}: expected 'coefficient paulistring', "
                    f"got '{text}'")
            try:
                coef = float(parts[0])
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: bad coefficient '{parts[0]}'") from None
            pauli = parts[1].upper()
            if set(pauli) - set("IXYZ"):
                raise ParseError(
                    f"{path}:{lineno}: invalid pauli string '{parts[1]}'")
            if n is None:
                n = len(pauli)
            elif len(pauli) != n:
                raise ParseError(
                    f"{path}:{lineno}: pauli string '{pauli}' does not match "
                    f"n={n}")
            raw_terms.append((coef, pauli))
    if not raw_terms:
        raise ParseError(f"{path}: no terms found")
    return pauli_sum(n, raw_terms)


def save_pauli_sum(ham: PauliSum, path: str, header: str = "") -> None:
    """Write the file format parsed by load_pauli_sum."""
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"n={ham.n}\n")
        for coef, pauli in ham.terms:
            fh.write(f"{coef!r} {pauli}\n")
