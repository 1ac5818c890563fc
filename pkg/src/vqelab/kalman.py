"""Scalar Kalman filtering for smoothing noisy energy series.

The model is x_k = T * x_{k-1} + w (process variance Q) observed through
z_k = x_k + v (measurement variance MV). Per step:

    predict:  x_hat = T * x,  P_hat = T^2 * P + Q
    gain:     K = P_hat / (P_hat + MV)
    update:   x' = x_hat + K * (z - x_hat),  P' = (1 - K) * P_hat

Used as a post-hoc overlay on a committed-energy series; it never feeds
back into the tuner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class KalmanConfig:
    """Filter constants; unset fields self-start from the data.

    Q defaults to 1e-4 * MV; x0 defaults to the first measurement; P0
    defaults to MV + Q.
    """

    T: float = 1.0
    MV: float = 0.1
    Q: Optional[float] = None
    x0: Optional[float] = None
    P0: Optional[float] = None

    def __post_init__(self):
        if self.MV < 0:
            raise ConfigurationError(f"MV must be >= 0, got {self.MV}")
        if self.Q is not None and self.Q < 0:
            raise ConfigurationError(f"Q must be >= 0, got {self.Q}")
        if self.P0 is not None and self.P0 < 0:
            raise ConfigurationError(f"P0 must be >= 0, got {self.P0}")

    def q_value(self) -> float:
        return 1e-4 * self.MV if self.Q is None else self.Q


@dataclass
class KalmanState:
    x: float
    P: float


def kalman_step(state: KalmanState, z: float,
                cfg: KalmanConfig) -> KalmanState:
    """Predict with T and Q, then correct toward the measurement z."""
    q = cfg.q_value()
    x_hat = cfg.T * state.x
    p_hat = cfg.T ** 2 * state.P + q
    denom = p_hat + cfg.MV
    if denom == 0.0:
        raise ConfigurationError(
            "degenerate filter: P_hat + MV is zero (set MV or Q above 0)")
    gain = p_hat / denom
    x_new = x_hat + gain * (z - x_hat)
    p_new = (1.0 - gain) * p_hat
    return KalmanState(x=x_new, P=p_new)


def filter_series(series: Sequence[float], cfg: KalmanConfig) -> np.ndarray:
    """Filter a measurement series; element k uses measurements 0..k."""
    z = np.asarray(series, dtype=float)
    if z.size == 0:
        raise ConfigurationError("cannot filter an empty series")
    x0 = float(z[0]) if cfg.x0 is None else cfg.x0
    p0 = cfg.MV + cfg.q_value() if cfg.P0 is None else cfg.P0
    state = KalmanState(x=x0, P=p0)
    out = np.empty_like(z)
    for k, zk in enumerate(z):
        state = kalman_step(state, float(zk), cfg)
        out[k] = state.x
    return out
