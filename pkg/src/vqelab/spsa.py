"""Simultaneous-perturbation stochastic approximation and variants.

The tuner minimizes a scalar evaluator over a flat parameter vector using
two evaluations per gradient estimate at Rademacher-perturbed points:

    g_i = [f(theta + c_k * delta) - f(theta - c_k * delta)] / (2 c_k delta_i)

with decaying gains a_k = a / (A + k + 1)^alpha and
c_k = c / (k + 1)^gamma, k counted from 0.

Variants:

* ``plain``: the update above, always committed.
* ``blocking``: an update is committed only if the evaluated objective at
  the candidate is at most the previously committed objective plus a
  tolerance; the first iteration always commits.
* ``resampling``: averages ``resample_factor`` independent gradient
  estimates per iteration (factor 1 reduces to plain, draw for draw).
* ``second_order``: preconditions the gradient with a regularized,
  exponentially averaged Hessian estimate (two extra evaluations).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .errors import ConfigurationError

VARIANTS = ("plain", "blocking", "resampling", "second_order")


@dataclass(frozen=True)
class SpsaConfig:
    a: float = 0.2
    c: float = 0.1
    A: float = 0.0
    alpha: float = 0.602
    gamma: float = 0.101
    variant: str = "plain"
    resample_factor: int = 2
    blocking_tolerance: float = 0.0
    hessian_averaging: float = 0.9
    regularization: float = 1e-3

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(
                f"unknown SPSA variant '{self.variant}', "
                f"available: {', '.join(VARIANTS)}")
        if self.a <= 0 or self.c <= 0:
            raise ConfigurationError("gains a and c must be positive")
        if self.A < 0:
            raise ConfigurationError(f"A must be >= 0, got {self.A}")
        if self.resample_factor < 1:
            raise ConfigurationError(
                f"resample_factor must be >= 1, got {self.resample_factor}")
        if not (0.0 <= self.hessian_averaging < 1.0):
            raise ConfigurationError(
                f"hessian_averaging must be in [0, 1), "
                f"got {self.hessian_averaging}")
        if self.regularization <= 0:
            raise ConfigurationError("regularization must be positive")


@dataclass
class TunerStep:
    """State after one iteration: committed parameters and bookkeeping."""

    k: int
    theta: np.ndarray
    objective_value: float
    gradient_estimate: np.ndarray
    committed: bool


def gain_a(cfg: SpsaConfig, k: int) -> float:
    return cfg.a / (cfg.A + k + 1) ** cfg.alpha


def gain_c(cfg: SpsaConfig, k: int) -> float:
    return cfg.c / (k + 1) ** cfg.gamma


def rademacher(rng: np.random.Generator, p: int) -> np.ndarray:
    """+-1 perturbation directions, fair and independent per coordinate."""
    return rng.integers(0, 2, size=p) * 2.0 - 1.0


def gradient_from_pair(f_plus: float, f_minus: float, c_k: float,
                       delta: np.ndarray) -> np.ndarray:
    """Finite-difference gradient estimate along one perturbation."""
    return (f_plus - f_minus) / (2.0 * c_k * delta)


def spsa_gradient(theta: np.ndarray, k: int,
                  evaluator: Callable[[np.ndarray], float], cfg: SpsaConfig,
                  rng: np.random.Generator) -> np.ndarray:
    """Estimate the gradient at theta (averaging draws when resampling)."""
    c_k = gain_c(cfg, k)
    n_draws = cfg.resample_factor if cfg.variant == "resampling" else 1
    total = np.zeros_like(theta)
    for _ in range(n_draws):
        delta = rademacher(rng, theta.size)
        f_plus = evaluator(theta + c_k * delta)
        f_minus = evaluator(theta - c_k * delta)
        total += gradient_from_pair(f_plus, f_minus, c_k, delta)
    return total / n_draws


def spsa_update(theta: np.ndarray, k: int, g: np.ndarray, cfg: SpsaConfig,
                preconditioner: Optional[np.ndarray] = None) -> np.ndarray:
    """One descent step theta - a_k * g, optionally preconditioned."""
    a_k = gain_a(cfg, k)
    if preconditioner is None:
        return theta - a_k * g
    return theta - a_k * np.linalg.solve(preconditioner, g)


def hessian_from_quad(f_plus: float, f_minus: float, f_pp: float, f_mp: float,
                      c_k: float, delta: np.ndarray,
                      delta2: np.ndarray) -> np.ndarray:
    """Rank-two symmetric Hessian estimate from the four evaluations
    f(theta +- c delta) and f(theta +- c delta + c delta2)."""
    dg = (f_pp - f_plus) - (f_mp - f_minus)
    outer = np.outer(delta, delta2)
    return dg / (2.0 * c_k ** 2) * 0.5 * (outer + outer.T)


def hessian_sample(theta: np.ndarray, k: int,
                   evaluator: Callable[[np.ndarray], float], cfg: SpsaConfig,
                   delta: np.ndarray, f_plus: float, f_minus: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Hessian estimate at theta using two extra evaluations."""
    c_k = gain_c(cfg, k)
    delta2 = rademacher(rng, theta.size)
    f_pp = evaluator(theta + c_k * delta + c_k * delta2)
    f_mp = evaluator(theta - c_k * delta + c_k * delta2)
    return hessian_from_quad(f_plus, f_minus, f_pp, f_mp, c_k, delta, delta2)


def regularized_preconditioner(h_bar: np.ndarray,
                               regularization: float) -> np.ndarray:
    """(H^T H + eps I)^(1/2): symmetric with eigenvalues >= sqrt(eps)."""
    m = h_bar.T @ h_bar + regularization * np.eye(h_bar.shape[0])
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, regularization, None))) @ v.T


@dataclass
class SecondOrderState:
    """Exponentially averaged Hessian estimate across iterations."""

    h_bar: Optional[np.ndarray] = None

    def absorb(self, sample: np.ndarray, averaging: float) -> None:
        if self.h_bar is None:
            self.h_bar = sample
        else:
            self.h_bar = averaging * self.h_bar + (1 - averaging) * sample


def run_tuner(cfg: SpsaConfig, evaluator: Callable[[np.ndarray], float],
              theta0: np.ndarray, iterations: int,
              rng: np.random.Generator) -> List[TunerStep]:
    """Drive the tuner against a plain callable; one TunerStep per iteration.

    The evaluator must be deterministic given its own captured RNG. The
    candidate objective is always evaluated (it is what blocking decides
    on and what the step reports).
    """
    if iterations <= 0:
        raise ConfigurationError(
            f"iterations must be positive, got {iterations}")
    theta = np.asarray(theta0, dtype=float).copy()
    steps: List[TunerStep] = []
    committed_obj: Optional[float] = None
    so_state = SecondOrderState()
    for k in range(iterations):
        c_k = gain_c(cfg, k)
        n_draws = cfg.resample_factor if cfg.variant == "resampling" else 1
        total = np.zeros_like(theta)
        last = None
        for _ in range(n_draws):
            delta = rademacher(rng, theta.size)
            f_plus = evaluator(theta + c_k * delta)
            f_minus = evaluator(theta - c_k * delta)
            total += gradient_from_pair(f_plus, f_minus, c_k, delta)
            last = (delta, f_plus, f_minus)
        g = total / n_draws
        precond = None
        if cfg.variant == "second_order":
            delta, f_plus, f_minus = last
            sample = hessian_sample(theta, k, evaluator, cfg, delta, f_plus,
                                    f_minus, rng)
            so_state.absorb(sample, cfg.hessian_averaging)
            precond = regularized_preconditioner(so_state.h_bar,
                                                cfg.regularization)
        candidate = spsa_update(theta, k, g, cfg, precond)
        cand_obj = evaluator(candidate)
        commit = True
        if cfg.variant == "blocking" and committed_obj is not None:
            commit = cand_obj <= committed_obj + cfg.blocking_tolerance
        if commit:
            theta = candidate
            committed_obj = cand_obj
        steps.append(TunerStep(k=k, theta=theta.copy(),
                               objective_value=committed_obj,
                               gradient_estimate=g, committed=commit))
    return steps
