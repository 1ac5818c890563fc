"""Simulated noisy backend with a per-job transient error channel.

A *job* is a batch of (circuit, observable) requests executed together.
Every request in the same job sees the same transient offset, read from a
trace indexed by the job counter; the counter advances by one for every
executed job, retries included. Each estimate decomposes as

    value = damping * ideal + shot_delta + transient_delta

with damping = lambda_cx ** cx_depth (static two-qubit error),
shot_delta the sampling residual (zero in analytic mode), and
transient_delta = transient_scale * reference_magnitude * trace[job].

Trace files hold one offset per line; '#' starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, ParseError, TraceExhaustedError
from .hamiltonian import PauliSum, objective
from .statevector import Circuit, run_circuit


@dataclass(frozen=True)
class TransientTrace:
    """Dimensionless per-job offsets plus a note on where they came from."""

    offsets: np.ndarray
    source: str = "synthetic"

    def __len__(self):
        return len(self.offsets)


@dataclass(frozen=True)
class SyntheticTraceParams:
    """Gaussian background with rare additive spikes.

    ``spike_sign`` is 'positive' or 'negative' (all spikes push the same
    way) or 'symmetric' (each spike flips a fair coin).
    """

    length: int
    base_sigma: float = 0.02
    spike_prob: float = 0.05
    spike_mag: float = 1.0
    spike_sign: str = "positive"

    def __post_init__(self):
        if self.length <= 0:
            raise ConfigurationError(
                f"trace length must be positive, got {self.length}")
        if self.base_sigma < 0:
            raise ConfigurationError(
                f"base_sigma must be >= 0, got {self.base_sigma}")
        if not (0.0 <= self.spike_prob <= 1.0):
            raise ConfigurationError(
                f"spike_prob must be in [0, 1], got {self.spike_prob}")
        if self.spike_sign not in ("positive", "negative", "symmetric"):
            raise ConfigurationError(
                f"spike_sign must be 'positive', 'negative' or 'symmetric', "
                f"got '{self.spike_sign}'")


def gen_synthetic_trace(params: SyntheticTraceParams,
                        rng: np.random.Generator) -> TransientTrace:
    """Draw a trace: N(0, base_sigma) background + spike_prob spikes."""
    offsets = rng.normal(0.0, params.base_sigma, params.length) \
        if params.base_sigma > 0 else np.zeros(params.length)
    hit = rng.random(params.length) < params.spike_prob
    if params.spike_sign == "symmetric":
        signs = rng.choice([-1.0, 1.0], size=params.length)
    elif params.spike_sign == "negative":
        signs = -np.ones(params.length)
    else:
        signs = np.ones(params.length)
    offsets = offsets + hit * signs * params.spike_mag
    return TransientTrace(offsets=offsets, source="synthetic")


def load_trace(path: str) -> TransientTrace:
    """Read one offset per line; errors carry 1-based line numbers."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: bad offset '{text}'") from None
    if not values:
        raise ParseError(f"{path}: no offsets found")
    return TransientTrace(offsets=np.array(values), source=path)


def save_trace(trace: TransientTrace, path: str, header: str = "") -> None:
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for v in trace.offsets:
            fh.write(f"{float(v)!r}\n")


@dataclass(frozen=True)
class NoiseConfig:
    """Static damping, optional shot sampling, and the transient channel."""

    trace: TransientTrace
    lambda_cx: float = 0.99
    shots: Optional[int] = None
    transient_scale: float = 0.0
    reference_magnitude: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.lambda_cx <= 1.0):
            raise ConfigurationError(
                f"lambda_cx must be in (0, 1], got {self.lambda_cx}")
        if self.shots is not None and self.shots <= 0:
            raise ConfigurationError(
                f"shots must be positive when set, got {self.shots}")
        if self.transient_scale < 0:
            raise ConfigurationError(
                f"transient_scale must be >= 0, got {self.transient_scale}")
        if self.reference_magnitude <= 0:
            raise ConfigurationError(
                f"reference_magnitude must be positive, "
                f"got {self.reference_magnitude}")


@dataclass(frozen=True)
class EnergyEstimate:
    """One measured energy plus its exact decomposition."""

    value: float
    job_index: int
    ideal: float
    damping: float
    shot_delta: float
    transient_delta: float


def execute_job(requests: Sequence[Tuple[Circuit, PauliSum]], job_index: int,
                cfg: NoiseConfig,
                rng: Optional[np.random.Generator] = None
                ) -> List[EnergyEstimate]:
    """Run a batch of requests under one shared transient offset.

    Args:
        requests: (circuit, observable) pairs, all on the same qubit count.
        job_index: position in the transient trace.
        cfg: noise model.
        rng: consumed only in shot mode.

    Returns:
        One EnergyEstimate per request, in order.
    """
    if not requests:
        raise ConfigurationError("execute_job needs at least one request")
    widths = {c.n for c, _ in requests} | {h.n for _, h in requests}
    if len(widths) != 1:
        raise ConfigurationError(
            f"all requests in a job must share one qubit count, got {widths}")
    if job_index >= len(cfg.trace):
        raise TraceExhaustedError(
            f"job {job_index} exceeds the transient trace "
            f"({len(cfg.trace)} entries); generate a longer trace")
    if cfg.shots is not None and rng is None:
        raise ConfigurationError("shot mode needs an rng")
    t = float(cfg.trace.offsets[job_index])
    transient_delta = cfg.transient_scale * cfg.reference_magnitude * t
    out = []
    for circuit, ham in requests:
        state = run_circuit(circuit)
        ideal = objective(ham, state)
        damping = cfg.lambda_cx ** circuit.cx_depth
        if cfg.shots is None:
            shot_delta = 0.0
            value = damping * ideal + transient_delta
        else:
            sampled = objective(ham, state, shots=cfg.shots, rng=rng)
            shot_delta = damping * (sampled - ideal)
            value = damping * sampled + transient_delta
        out.append(EnergyEstimate(value=value, job_index=job_index,
                                  ideal=ideal, damping=damping,
                                  shot_delta=shot_delta,
                                  transient_delta=transient_delta))
    return out


@dataclass
class OpenJob:
    """A job being filled request by request; the transient is already fixed.

    Lets a caller evaluate some requests, compute on the results, and
    evaluate more, all under the same job index, which is how one tuning
    iteration batches its circuits.
    """

    backend: "VirtualBackend"
    job_index: int

    def evaluate(self, circuit: Circuit, ham: PauliSum) -> EnergyEstimate:
        return execute_job([(circuit, ham)], self.job_index,
                           self.backend.cfg, self.backend.rng)[0]


@dataclass
class VirtualBackend:
    """Owns the job clock and the shot RNG for one run."""

    cfg: NoiseConfig
    rng: Optional[np.random.Generator] = None
    jobs_executed: int = 0
    _open: bool = field(default=False, repr=False)

    def open_job(self) -> OpenJob:
        if self._open:
            raise ConfigurationError("previous job is still open")
        job = OpenJob(backend=self, job_index=self.jobs_executed)
        if job.job_index >= len(self.cfg.trace):
            raise TraceExhaustedError(
                f"job {job.job_index} exceeds the transient trace "
                f"({len(self.cfg.trace)} entries); generate a longer trace")
        self._open = True
        return job

    def close_job(self, job: OpenJob) -> None:
        if not self._open or job.job_index != self.jobs_executed:
            raise ConfigurationError("close_job got a stale job handle")
        self._open = False
        self.jobs_executed += 1

    def run_job(self, requests: Sequence[Tuple[Circuit, PauliSum]]
                ) -> List[EnergyEstimate]:
        job = self.open_job()
        try:
            return [job.evaluate(c, h) for c, h in requests]
        finally:
            self.close_job(job)
