"""Decision logic: transient estimation, prediction, the accept band,
and tau calibration."""

import math

import numpy as np
import pytest

from vqelab.controller import (
    ACCEPT,
    REJECT,
    ControllerConfig,
    TauCalibrator,
    calibrate_tau,
    decide,
    estimate_transient,
    only_transients_decide,
    predict,
)
from vqelab.errors import ConfigurationError


# ===== Transient estimation and prediction =====

def test_estimate_transient_defining_equation():
    assert estimate_transient(-0.70, -1.00) == pytest.approx(0.30)
    assert estimate_transient(-0.5, -0.5) == 0.0


def test_predict_formula():
    E_p, G_m, G_p = predict(-0.80, 0.30, -1.00)
    assert E_p == pytest.approx(-1.10)
    assert G_m == pytest.approx(0.20)
    assert G_p == pytest.approx(-0.10)


def test_zero_transient_makes_gradients_equal():
    _, G_m, G_p = predict(-0.6, 0.0, -0.9)
    assert G_m == G_p


# ===== Decision table =====

def test_decision_table():
    """Both-positive, both-negative, and flipped-gradient scenarios, plus
    the in-band small-swing case."""
    tau = 0.05
    cases = [
        (+0.20, +0.35, ACCEPT),   # worsening seen, worsening predicted
        (+0.10, +0.30, ACCEPT),
        (+0.20, -0.10, REJECT),   # transient flips an improvement
        (-0.20, -0.35, ACCEPT),   # improvement seen and predicted
        (-0.05, -0.22, ACCEPT),
        (-0.20, +0.10, REJECT),   # transient fakes an improvement
        (+0.02, -0.01, ACCEPT),   # disagreement, but the swing is in-band
    ]
    for G_m, G_p, want in cases:
        assert decide(G_m, G_p, tau) == want, (G_m, G_p)


def test_zero_gradient_counts_as_matching():
    assert decide(0.0, -0.4, 0.0) == ACCEPT
    assert decide(0.3, 0.0, 0.0) == ACCEPT


def test_sign_match_independent_of_tau():
    rng = np.random.default_rng(1)
    for _ in range(100):
        g = rng.normal(size=2)
        g_m, g_p = abs(g[0]), abs(g[1])
        sign = rng.choice([-1.0, 1.0])
        assert decide(sign * g_m, sign * g_p, 0.0) == ACCEPT


def test_scale_invariance():
    rng = np.random.default_rng(2)
    for _ in range(200):
        g_m, g_p = rng.normal(size=2)
        tau = abs(rng.normal())
        a = float(rng.uniform(0.1, 10.0))
        assert decide(a * g_m, a * g_p, a * tau) == decide(g_m, g_p, tau)


def test_large_opposing_swing_rejected_even_with_tiny_true_gradient():
    """A big transient that flips direction is rejected no matter how
    small the predicted move is."""
    assert decide(0.5, -1e-4, 0.05) == REJECT


# ===== Only-transients decision =====

def test_only_transients_band():
    assert only_transients_decide(0.3, 0.5) == ACCEPT
    assert only_transients_decide(-0.6, 0.5) == REJECT
    assert only_transients_decide(-0.5, 0.5) == ACCEPT


# ===== Tau calibration =====

def test_calibrate_all_zero_history():
    assert calibrate_tau([0.0] * 50, 0.10) == 0.0


def test_calibrate_quantile_position():
    history = [0.1] * 99 + [10.0]
    tau = calibrate_tau(history, 0.01)
    assert 0.1 < tau < 10.0


def test_calibrate_empty_history_returns_warmup():
    assert calibrate_tau([], 0.10) == math.inf
    assert calibrate_tau([], 0.10, warmup_tau=99.0) == 99.0


def test_calibrated_tau_monotone_in_target():
    rng = np.random.default_rng(3)
    history = np.abs(rng.normal(0, 1, size=800))
    t1 = calibrate_tau(history, 0.01)
    t10 = calibrate_tau(history, 0.10)
    t25 = calibrate_tau(history, 0.25)
    assert t1 >= t10 >= t25


def test_calibrator_warmup_and_window():
    cfg = ControllerConfig(warmup_iterations=3, window=5)
    cal = TauCalibrator(cfg)
    assert cal.current_tau() == math.inf
    for v in (0.1, 0.2, 0.3):
        cal.observe(v)
        cal.note_iteration()
    assert not cal.in_warmup()
    assert cal.current_tau() < math.inf
    for v in (10.0, 10.0, 10.0, 10.0, 10.0):
        cal.observe(v)
    # window keeps only the last 5 observations
    assert cal.history == [10.0] * 5
    assert cal.current_tau() == pytest.approx(10.0)


def test_fixed_tau_mode_ignores_history():
    cfg = ControllerConfig(tau=0.42, calibration="fixed_tau",
                           warmup_iterations=0)
    cal = TauCalibrator(cfg)
    cal.observe(100.0)
    assert cal.current_tau() == 0.42


# ===== Validation =====

def test_config_validation():
    with pytest.raises(ConfigurationError):
        ControllerConfig(tau=-1.0)
    with pytest.raises(ConfigurationError):
        ControllerConfig(target_skip_fraction=1.5)
    with pytest.raises(ConfigurationError):
        ControllerConfig(retry_budget=-1)
    with pytest.raises(ConfigurationError):
        ControllerConfig(calibration="magic")


def test_decide_rejects_negative_tau():
    with pytest.raises(ConfigurationError):
        decide(0.1, 0.2, -0.5)
