"""Observable construction, parsing, and exact-spectrum oracles."""

import numpy as np
import pytest

from vqelab.errors import ConfigurationError, ParseError
from vqelab.hamiltonian import (
    PauliSum,
    exact_ground_energy,
    load_pauli_sum,
    objective,
    pauli_sum,
    save_pauli_sum,
    tfim_1d,
    to_dense,
)
from vqelab.statevector import Circuit, Gate, init_zero, run_circuit


# ===== TFIM structure =====

def test_tfim_term_counts():
    """Open chain has n-1 ZZ bonds + n X fields; periodic has n bonds."""
    h_open = tfim_1d(5, 1.0, 1.0, "open")
    assert len(h_open.terms) == 4 + 5
    h_per = tfim_1d(5, 1.0, 1.0, "periodic")
    assert len(h_per.terms) == 5 + 5


def test_tfim_classical_limit():
    """h=0 open chain has ground energy -J*(n-1)."""
    for n in range(2, 9):
        assert exact_ground_energy(tfim_1d(n, 1.0, 0.0, "open")) == \
            pytest.approx(-(n - 1), abs=1e-10)


def test_tfim_field_limit():
    """J=0 gives a product of X ground states: energy -n*h."""
    assert exact_ground_energy(tfim_1d(2, 0.0, 1.0)) == \
        pytest.approx(-2.0, abs=1e-10)
    assert exact_ground_energy(tfim_1d(3, 1.0, 0.0)) == \
        pytest.approx(-2.0, abs=1e-10)


def test_tfim_ground_energy_below_classical():
    """At J=h=1 quantum fluctuations push E0 below both limits."""
    e0 = exact_ground_energy(tfim_1d(4, 1.0, 1.0))
    assert e0 < -4.0


# ===== Dense oracle for the objective =====

def bell_state():
    return run_circuit(Circuit(2, (Gate("h", target=0),
                                   Gate("cx", target=1, control=0))))


def test_objective_matches_dense():
    """Per-term expectation sum equals psi^dag H psi on random states."""
    rng = np.random.default_rng(23)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        terms = []
        for _ in range(int(rng.integers(1, 6))):
            pauli = "".join(rng.choice(list("IXYZ")) for _ in range(n))
            terms.append((float(rng.normal()), pauli))
        ham = pauli_sum(n, terms)
        gates = []
        for _ in range(15):
            q = int(rng.integers(n))
            gates.append(Gate("ry", target=q, angle=float(rng.uniform(-3, 3))))
            if n >= 2:
                c, t = rng.choice(n, size=2, replace=False)
                gates.append(Gate("cx", target=int(t), control=int(c)))
        st = run_circuit(Circuit(n, tuple(gates)))
        dense = to_dense(ham)
        want = float(np.real(np.conj(st.amplitudes) @ dense @ st.amplitudes))
        assert objective(ham, st) == pytest.approx(want, abs=1e-10)


def test_objective_simple_value():
    """H = 2*ZI on |00> gives +2."""
    ham = pauli_sum(2, [(2.0, "ZI")])
    assert objective(ham, init_zero(2)) == pytest.approx(2.0)


def test_objective_sampled_matches_analytic_in_mean():
    """Shot-sampled objective converges to the analytic one."""
    ham = tfim_1d(2, 1.0, 1.0)
    st = bell_state()
    exact = objective(ham, st)
    est = objective(ham, st, shots=200_000, rng=np.random.default_rng(4))
    assert est == pytest.approx(exact, abs=0.02)


def test_ground_energy_is_variational_floor():
    """No state energy falls below the smallest eigenvalue."""
    rng = np.random.default_rng(31)
    ham = tfim_1d(3, 1.0, 0.7)
    e0 = exact_ground_energy(ham)
    for _ in range(25):
        gates = tuple(Gate("ry", target=int(rng.integers(3)),
                           angle=float(rng.uniform(-3, 3))) for _ in range(6))
        st = run_circuit(Circuit(3, gates))
        assert objective(ham, st) >= e0 - 1e-9


# ===== Merging and validation =====

def test_duplicate_terms_merge():
    ham = pauli_sum(2, [(1.0, "ZZ"), (0.5, "ZZ"), (-0.25, "XI")])
    coefs = dict((p, c) for c, p in ham.terms)
    assert coefs["ZZ"] == pytest.approx(1.5)
    assert len(ham.terms) == 2


def test_empty_terms_rejected():
    with pytest.raises(ConfigurationError):
        PauliSum(n=2, terms=())


def test_bad_string_rejected():
    with pytest.raises(ConfigurationError):
        pauli_sum(2, [(1.0, "ZQ")])
    with pytest.raises(ConfigurationError):
        pauli_sum(2, [(1.0, "ZZZ")])


# ===== File round-trip =====

def test_file_round_trip(tmp_path):
    ham = tfim_1d(3, 1.0, 0.5, "periodic")
    path = str(tmp_path / "tfim.txt")
    save_pauli_sum(ham, path, header="three-site ring")
    back = load_pauli_sum(path)
    assert back.n == 3
    assert dict((p, c) for c, p in back.terms) == \
        dict((p, c) for c, p in ham.terms)


def test_file_matches_builder(tmp_path):
    """A hand-written 2-qubit file equals tfim_1d(2, 1, 1, open)."""
    path = tmp_path / "h.txt"
    path.write_text("# comment\nn=2\n-1.0 ZZ\n-1.0 XI\n-1.0 IX\n")
    got = load_pauli_sum(str(path))
    want = tfim_1d(2, 1.0, 1.0, "open")
    assert dict((p, c) for c, p in got.terms) == \
        dict((p, c) for c, p in want.terms)


def test_file_merges_duplicates(tmp_path):
    path = tmp_path / "h.txt"
    path.write_text("0.5 ZZ\n0.25 ZZ\n")
    got = load_pauli_sum(str(path))
    assert got.terms == ((0.75, "ZZ"),)


def test_parse_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("n=2\n-1.0 ZZ\noops\n")
    with pytest.raises(ParseError, match=":3:"):
        load_pauli_sum(str(path))
    path.write_text("n=2\nxyz ZZ\n")
    with pytest.raises(ParseError, match=":2:"):
        load_pauli_sum(str(path))
    path.write_text("n=2\n-1.0 ZZZ\n")
    with pytest.raises(ParseError, match="does not match"):
        load_pauli_sum(str(path))


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("# nothing here\n")
    with pytest.raises(ParseError, match="no terms"):
        load_pauli_sum(str(path))
