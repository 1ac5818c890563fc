"""Transient-aware accept/reject control for noisy energy tuning.

Each tuning iteration's job re-runs the previously accepted iteration's
circuit alongside the new circuits. The energy shift of that rerun against
its original measurement estimates the transient error now in effect:

    T_m = E_mR_prev - E_m(previous accepted)

Subtracting T_m from the fresh measurement predicts the transient-free
energy E_p, and the measured/predicted gradients G_m and G_p (both taken
against the previous accepted energy) drive the decision: an iteration is
accepted when the two gradients agree in direction, or when the swing
between them (|G_m - G_p| = |T_m|) stays inside the calibrated band tau,
so harmless wobble is never skipped. A rejected iteration is retried in a
fresh job (fresh transient) up to a budget, then force-accepted.

The band tau is either fixed or calibrated online as the
(1 - target_skip_fraction)-quantile of the observed |T_m| history over a
sliding window, with a warmup phase that accepts everything while the
history fills.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConfigurationError

CALIBRATIONS = ("fixed_tau", "quantile_adaptive")

ACCEPT = "accept"
REJECT = "reject"
FORCED_ACCEPT = "forced_accept"


@dataclass(frozen=True)
class ControllerConfig:
    tau: float = 0.0
    target_skip_fraction: float = 0.10
    retry_budget: int = 5
    warmup_iterations: int = 20
    calibration: str = "quantile_adaptive"
    window: int = 500

    def __post_init__(self):
        if self.tau < 0:
            raise ConfigurationError(f"tau must be >= 0, got {self.tau}")
        if not (0.0 <= self.target_skip_fraction <= 1.0):
            raise ConfigurationError(
                f"target_skip_fraction must be in [0, 1], "
                f"got {self.target_skip_fraction}")
        if self.retry_budget < 0:
            raise ConfigurationError(
                f"retry_budget must be >= 0, got {self.retry_budget}")
        if self.warmup_iterations < 0:
            raise ConfigurationError(
                f"warmup_iterations must be >= 0, got {self.warmup_iterations}")
        if self.calibration not in CALIBRATIONS:
            raise ConfigurationError(
                f"calibration must be one of {', '.join(CALIBRATIONS)}, "
                f"got '{self.calibration}'")
        if self.window < 1:
            raise ConfigurationError(
                f"window must be >= 1, got {self.window}")


@dataclass
class IterationRecord:
    """One decision's worth of measurements; fields a scheme does not
    produce stay None."""

    i: int
    job_index: int
    E_m: float
    E_mR_prev: Optional[float] = None
    T_m: Optional[float] = None
    E_p: Optional[float] = None
    G_m: Optional[float] = None
    G_p: Optional[float] = None
    decision: Optional[str] = None
    retries: Optional[int] = None
    E_ideal: Optional[float] = None
    committed_energy: Optional[float] = None


def estimate_transient(E_mR_prev: float, E_m_prev: float) -> float:
    """Transient now in effect = rerun energy minus its original value."""
    return E_mR_prev - E_m_prev


def predict(E_m_cur: float, T_m: float,
            E_m_prev: float) -> Tuple[float, float, float]:
    """Transient-free prediction and both gradients.

    Returns:
        (E_p, G_m, G_p) with E_p = E_m_cur - T_m and gradients taken
        against the previous accepted energy.
    """
    E_p = E_m_cur - T_m
    G_m = E_m_cur - E_m_prev
    G_p = E_p - E_m_prev
    return E_p, G_m, G_p


def decide(G_m: float, G_p: float, tau: float) -> str:
    """Accept when gradient directions agree or the swing is in-band.

    The swing |G_m - G_p| is exactly the estimated transient, so the band
    accepts small transients regardless of direction and the calibrated
    quantile of |T_m| bounds the reject rate directly.
    """
    if tau < 0:
        raise ConfigurationError(f"tau must be >= 0, got {tau}")
    if np.sign(G_m) * np.sign(G_p) >= 0:
        return ACCEPT
    if abs(G_m - G_p) <= tau:
        return ACCEPT
    return REJECT


def only_transients_decide(T_m: float, tau: float) -> str:
    """Direction-blind alternative: reject any |T_m| above the band."""
    if tau < 0:
        raise ConfigurationError(f"tau must be >= 0, got {tau}")
    return REJECT if abs(T_m) > tau else ACCEPT


def calibrate_tau(history, target_skip_fraction: float,
                  warmup_tau: float = math.inf) -> float:
    """Empirical (1 - target)-quantile of |T_m| history; warmup when empty."""
    values = np.abs(np.asarray(history, dtype=float))
    if values.size == 0:
        return warmup_tau
    return float(np.quantile(values, 1.0 - target_skip_fraction))


@dataclass
class TauCalibrator:
    """Per-run band state: |T_m| sliding window plus warmup accounting."""

    cfg: ControllerConfig
    history: List[float] = field(default_factory=list)
    decisions_seen: int = 0

    def observe(self, T_m: float) -> None:
        # rejected jobs contribute too; the window must reflect the trace
        self.history.append(abs(T_m))
        if len(self.history) > self.cfg.window:
            del self.history[:len(self.history) - self.cfg.window]

    def note_iteration(self) -> None:
        self.decisions_seen += 1

    def in_warmup(self) -> bool:
        return self.decisions_seen < self.cfg.warmup_iterations

    def current_tau(self) -> float:
        if self.cfg.calibration == "fixed_tau":
            return self.cfg.tau
        if self.in_warmup():
            return math.inf
        return calibrate_tau(self.history, self.cfg.target_skip_fraction)
