"""SPSA gradient exactness, gain schedules, and variant behavior."""

import numpy as np
import pytest

from vqelab.errors import ConfigurationError
from vqelab.spsa import (
    SecondOrderState,
    SpsaConfig,
    TunerStep,
    gain_a,
    gain_c,
    gradient_from_pair,
    rademacher,
    regularized_preconditioner,
    run_tuner,
    spsa_gradient,
    spsa_update,
)


# ===== Gains =====

def test_gain_values():
    """a_k = a/(A+k+1)^alpha and c_k = c/(k+1)^gamma, k from 0."""
    cfg = SpsaConfig(a=0.1, c=0.2, A=0.0, alpha=1.0, gamma=0.5)
    assert gain_a(cfg, 0) == pytest.approx(0.1)
    assert gain_a(cfg, 1) == pytest.approx(0.05)
    assert gain_c(cfg, 0) == pytest.approx(0.2)
    assert gain_c(cfg, 3) == pytest.approx(0.1)


def test_gains_decay():
    cfg = SpsaConfig()
    a_seq = [gain_a(cfg, k) for k in range(50)]
    c_seq = [gain_c(cfg, k) for k in range(50)]
    assert all(x > y for x, y in zip(a_seq, a_seq[1:]))
    assert all(x > y for x, y in zip(c_seq, c_seq[1:]))


# ===== Gradient exactness =====

def test_linear_gradient_exact():
    """On f(theta) = b.theta the estimate is (b.delta)*delta, exactly."""
    rng = np.random.default_rng(0)
    b = np.array([2.0, -1.0, 0.5])
    cfg = SpsaConfig()
    theta = rng.normal(size=3)

    seen = {}

    def f(x):
        return float(b @ x)

    probe_rng = np.random.default_rng(7)
    g = spsa_gradient(theta, 0, f, cfg, probe_rng)
    delta = rademacher(np.random.default_rng(7), 3)
    np.testing.assert_allclose(g, (b @ delta) * delta, atol=1e-12)
    assert seen == {}


def test_first_component_linear_case():
    """f(theta) = theta[0], delta = (+1, +1) gives estimate (1, 1)."""
    g = gradient_from_pair(f_plus=0.1, f_minus=-0.1, c_k=0.1,
                           delta=np.array([1.0, 1.0]))
    np.testing.assert_allclose(g, [1.0, 1.0], atol=1e-12)


def test_quadratic_gradient_exact():
    """Symmetric differences are exact on quadratics: g = 2(theta.delta)delta."""
    rng = np.random.default_rng(3)
    theta = rng.normal(size=5)
    cfg = SpsaConfig(c=0.3)

    def f(x):
        return float(x @ x)

    g = spsa_gradient(theta, 0, f, cfg, np.random.default_rng(11))
    delta = rademacher(np.random.default_rng(11), 5)
    np.testing.assert_allclose(g, 2.0 * (theta @ delta) * delta, atol=1e-10)


def test_update_direction():
    """theta' = theta - a_k * g."""
    cfg = SpsaConfig(a=0.1, A=0.0, alpha=1.0)
    theta = np.array([1.0, 2.0])
    g = np.array([1.0, -1.0])
    np.testing.assert_allclose(spsa_update(theta, 0, g, cfg), [0.9, 2.1],
                               atol=1e-12)


# ===== Rademacher draws =====

def test_rademacher_values_and_determinism():
    d = rademacher(np.random.default_rng(5), 1000)
    assert set(np.unique(d)) == {-1.0, 1.0}
    d2 = rademacher(np.random.default_rng(5), 1000)
    np.testing.assert_array_equal(d, d2)
    assert abs(d.mean()) < 0.1


# ===== Convergence =====

def test_plain_converges_on_quadratic_bowl():
    rng = np.random.default_rng(1)
    theta0 = rng.uniform(-2, 2, size=6)
    cfg = SpsaConfig(a=0.2, c=0.1, A=10.0)
    steps = run_tuner(cfg, lambda x: float(x @ x), theta0, 400,
                      np.random.default_rng(2))
    assert len(steps) == 400
    assert float(steps[-1].theta @ steps[-1].theta) < 1e-2


def test_second_order_converges_on_anisotropic_quadratic():
    h = np.diag([10.0, 1.0, 0.1])
    rng = np.random.default_rng(8)
    theta0 = rng.uniform(-1, 1, size=3)
    cfg = SpsaConfig(a=0.5, c=0.1, A=10.0, variant="second_order")
    steps = run_tuner(cfg, lambda x: float(x @ h @ x), theta0, 500,
                      np.random.default_rng(9))
    assert float(steps[-1].theta @ h @ steps[-1].theta) < 0.05


# ===== Blocking =====

def test_blocking_freezes_on_monotone_worsening():
    """If every new evaluation is worse, theta never changes after step 1."""
    calls = [0]

    def worsening(_x):
        calls[0] += 1
        return float(calls[0])

    cfg = SpsaConfig(variant="blocking")
    theta0 = np.array([0.5, -0.5])
    steps = run_tuner(cfg, worsening, theta0, 20, np.random.default_rng(4))
    assert not np.array_equal(steps[0].theta, theta0)
    for s in steps[1:]:
        np.testing.assert_array_equal(s.theta, steps[0].theta)
        assert not s.committed


def test_blocking_commits_improvements():
    """On a well-behaved bowl blocking still makes progress."""
    cfg = SpsaConfig(variant="blocking", a=0.2, c=0.1, A=10.0)
    theta0 = np.array([1.0, 1.0, -1.0])
    steps = run_tuner(cfg, lambda x: float(x @ x), theta0, 300,
                      np.random.default_rng(6))
    assert float(steps[-1].theta @ steps[-1].theta) < 0.05
    assert any(s.committed for s in steps[1:])


# ===== Resampling =====

def test_resampling_factor_one_is_plain():
    """factor=1 replays plain draw for draw under the same seed."""
    theta0 = np.array([0.3, -0.7, 1.1])

    def f(x):
        return float(x @ x + 0.5 * x[0])

    plain = run_tuner(SpsaConfig(variant="plain"), f, theta0, 50,
                      np.random.default_rng(13))
    res1 = run_tuner(SpsaConfig(variant="resampling", resample_factor=1), f,
                     theta0, 50, np.random.default_rng(13))
    for a, b in zip(plain, res1):
        np.testing.assert_array_equal(a.theta, b.theta)


def test_resampling_reduces_gradient_noise():
    """Averaged estimates have smaller variance on a noisy evaluator."""
    p = 8
    theta = np.zeros(p)
    grad_var = {}
    for factor, variant in ((1, "plain"), (4, "resampling")):
        cfg = SpsaConfig(variant=variant, resample_factor=factor)
        noise_rng = np.random.default_rng(100)

        def f(x):
            return float(x @ x) + noise_rng.normal(0, 0.5)

        draws = np.random.default_rng(42)
        samples = [spsa_gradient(theta, 0, f, cfg, draws) for _ in range(200)]
        grad_var[factor] = float(np.var(np.stack(samples)))
    assert grad_var[4] < grad_var[1]


# ===== Second-order internals =====

def test_preconditioner_spd_floor():
    """Regularized preconditioner eigenvalues sit at or above sqrt(eps)."""
    rng = np.random.default_rng(21)
    eps = 1e-3
    for _ in range(20):
        h = rng.normal(size=(6, 6))
        p = regularized_preconditioner(h, eps)
        np.testing.assert_allclose(p, p.T, atol=1e-12)
        w = np.linalg.eigvalsh(p)
        assert w.min() >= np.sqrt(eps) - 1e-12


def test_second_order_state_averaging():
    state = SecondOrderState()
    one = np.eye(2)
    state.absorb(one, 0.9)
    np.testing.assert_array_equal(state.h_bar, one)
    state.absorb(3 * one, 0.9)
    np.testing.assert_allclose(state.h_bar, 0.9 * one + 0.1 * 3 * one)


# ===== Bookkeeping and validation =====

def test_one_step_per_iteration():
    steps = run_tuner(SpsaConfig(), lambda x: float(x @ x), np.ones(2), 25,
                      np.random.default_rng(1))
    assert [s.k for s in steps] == list(range(25))
    assert all(isinstance(s, TunerStep) for s in steps)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SpsaConfig(variant="momentum")
    with pytest.raises(ConfigurationError):
        SpsaConfig(a=0.0)
    with pytest.raises(ConfigurationError):
        SpsaConfig(resample_factor=0)
    with pytest.raises(ConfigurationError):
        run_tuner(SpsaConfig(), lambda x: 0.0, np.ones(2), 0,
                  np.random.default_rng(0))
