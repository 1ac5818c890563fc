"""Ansatz structure: parameter counts, cx depth, and known states."""

import numpy as np
import pytest

from vqelab.ansatz import AnsatzSpec, build, param_count
from vqelab.errors import ConfigurationError
from vqelab.statevector import run_circuit


# ===== Parameter counting =====

def test_su2_param_count():
    """SU2 uses 2*n*(reps+1) angles."""
    assert param_count(AnsatzSpec("SU2", n=6, reps=2)) == 36
    assert param_count(AnsatzSpec("SU2", n=6, reps=4)) == 60


def test_ra_param_count():
    """RA uses n*(reps+1) angles."""
    assert param_count(AnsatzSpec("RA", n=6, reps=4)) == 30
    assert param_count(AnsatzSpec("RA", n=6, reps=8)) == 54


def test_param_count_matches_build():
    rng = np.random.default_rng(2)
    for kind in ("SU2", "RA"):
        for n in (2, 3, 5):
            for reps in (0, 1, 3):
                spec = AnsatzSpec(kind, n=n, reps=reps)
                c = build(spec, rng.uniform(-1, 1, param_count(spec)))
                n_rot = sum(1 for g in c.gates if g.kind in ("ry", "rz"))
                assert n_rot == param_count(spec)


# ===== Entanglement layout =====

def test_cx_depth():
    """reps repetitions of a linear chain give reps*(n-1) cx gates."""
    for n in (2, 4, 6):
        for reps in (0, 1, 3):
            spec = AnsatzSpec("RA", n=n, reps=reps)
            c = build(spec, np.zeros(param_count(spec)))
            assert c.cx_depth == reps * (n - 1)


def test_cx_chain_is_linear():
    """Every cx is control q -> target q+1."""
    spec = AnsatzSpec("SU2", n=4, reps=2)
    c = build(spec, np.zeros(param_count(spec)))
    pairs = [(g.control, g.target) for g in c.gates if g.kind == "cx"]
    assert pairs == [(0, 1), (1, 2), (2, 3)] * 2


def test_final_layer_is_rotation_only():
    """No cx appears after the last rotation layer."""
    spec = AnsatzSpec("RA", n=3, reps=2)
    c = build(spec, np.zeros(param_count(spec)))
    last_cx = max(i for i, g in enumerate(c.gates) if g.kind == "cx")
    n_rot_after = sum(1 for g in c.gates[last_cx + 1:] if g.kind == "ry")
    assert n_rot_after == 3


# ===== Known states =====

def test_zero_params_ra_fixes_all_zero_state():
    """RY(0) layers and cx chains leave |0...0> untouched."""
    spec = AnsatzSpec("RA", n=4, reps=3)
    st = run_circuit(build(spec, np.zeros(param_count(spec))))
    assert abs(st.amplitudes[0]) == pytest.approx(1.0, abs=1e-12)


def test_single_qubit_ry_value():
    """A one-qubit zero-rep RA circuit is a bare RY rotation."""
    spec = AnsatzSpec("RA", n=1, reps=0)
    st = run_circuit(build(spec, np.array([np.pi])))
    assert abs(st.amplitudes[1]) == pytest.approx(1.0, abs=1e-12)


def test_parameter_order_layer_major():
    """First n angles belong to layer 0 (flipping qubit 1 via params[1])."""
    spec = AnsatzSpec("RA", n=2, reps=1)
    params = np.zeros(param_count(spec))
    params[1] = np.pi
    st = run_circuit(build(spec, params))
    # qubit 1 flipped in layer 0, cx(0->1) leaves it, layer 1 is identity
    assert abs(st.amplitudes[2]) == pytest.approx(1.0, abs=1e-12)


# ===== Validation =====

def test_wrong_param_length_rejected():
    spec = AnsatzSpec("RA", n=3, reps=1)
    with pytest.raises(ConfigurationError, match="needs 6 parameters"):
        build(spec, np.zeros(5))


def test_unknown_kind_rejected():
    with pytest.raises(ConfigurationError, match="available"):
        AnsatzSpec("UCCSD", n=2, reps=1)
