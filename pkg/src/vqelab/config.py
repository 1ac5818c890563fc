"""Experiment configuration: INI file parsing and validation.

A config file has sections [problem], [ansatz], [noise], [optimizer],
[controller], [kalman], [run].  Every section and every key is optional;
missing values fall back to documented defaults, so the empty file is a
valid (if small) experiment.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from typing import Optional

from .ansatz import ANSATZ_KINDS
from .controller import CALIBRATIONS, ControllerConfig
from .errors import ConfigurationError
from .kalman import KalmanConfig
from .spsa import SpsaConfig

SCHEMES = ("baseline", "qismet", "only_transients", "blocking",
           "resampling", "second_order", "kalman")

PROBLEM_KINDS = ("tfim", "file")
BOUNDARIES = ("open", "periodic")
SPIKE_SIGNS = ("positive", "negative", "symmetric")

# Schemes whose tuner is plain SPSA with a measurement-side guard or filter.
# The optimizer variant key only applies to the variant-bearing schemes.
_VARIANT_SCHEMES = {"blocking": "blocking", "resampling": "resampling",
                    "second_order": "second_order"}


@dataclass(frozen=True)
class ProblemSpec:
    """What Hamiltonian to tune against."""

    kind: str = "tfim"
    n: int = 4
    J: float = 1.0
    h: float = 1.0
    boundary: str = "open"
    path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in PROBLEM_KINDS:
            raise ConfigurationError(
                f"unknown problem kind {self.kind!r}; expected one of {PROBLEM_KINDS}")
        if self.kind == "tfim":
            if not 2 <= self.n <= 12:
                raise ConfigurationError(f"tfim size n={self.n} outside [2, 12]")
            if self.boundary not in BOUNDARIES:
                raise ConfigurationError(
                    f"unknown boundary {self.boundary!r}; expected one of {BOUNDARIES}")
        if self.kind == "file" and not self.path:
            raise ConfigurationError("problem kind 'file' requires a path")


@dataclass(frozen=True)
class AnsatzSection:
    """Circuit family and depth; qubit count comes from the problem."""

    kind: str = "RA"
    reps: int = 2

    def __post_init__(self) -> None:
        if self.kind not in ANSATZ_KINDS:
            raise ConfigurationError(
                f"unknown ansatz kind {self.kind!r}; expected one of {ANSATZ_KINDS}")
        if self.reps < 0:
            raise ConfigurationError(f"ansatz reps must be >= 0, got {self.reps}")


@dataclass(frozen=True)
class TraceSpec:
    """Where the per-job transient sequence comes from.

    source is either 'synthetic' or a file path.  The synthetic knobs are
    ignored for file traces.  length=None means 'long enough for the run',
    resolved against the iteration count and retry budget at run time.
    """

    source: str = "synthetic"
    base_sigma: float = 0.02
    spike_prob: float = 0.05
    spike_mag: float = 1.0
    spike_sign: str = "positive"
    length: Optional[int] = None

    def __post_init__(self) -> None:
        if self.source == "synthetic":
            if self.base_sigma < 0:
                raise ConfigurationError("base_sigma must be >= 0")
            if not 0.0 <= self.spike_prob <= 1.0:
                raise ConfigurationError("spike_prob must lie in [0, 1]")
            if self.spike_mag < 0:
                raise ConfigurationError("spike_mag must be >= 0")
            if self.spike_sign not in SPIKE_SIGNS:
                raise ConfigurationError(
                    f"unknown spike_sign {self.spike_sign!r}; expected one of {SPIKE_SIGNS}")
        if self.length is not None and self.length <= 0:
            raise ConfigurationError("trace length must be positive")


@dataclass(frozen=True)
class NoiseSpec:
    """Device error model knobs.

    reference_magnitude=None means 'use |exact ground energy|' of the
    problem, resolved at run time.
    """

    lambda_cx: float = 0.99
    shots: Optional[int] = None
    transient_scale: float = 0.0
    reference_magnitude: Optional[float] = None
    trace: TraceSpec = TraceSpec()

    def __post_init__(self) -> None:
        if not 0.0 < self.lambda_cx <= 1.0:
            raise ConfigurationError(
                f"lambda_cx must lie in (0, 1], got {self.lambda_cx}")
        if self.shots is not None and self.shots <= 0:
            raise ConfigurationError("shots must be positive when set")
        if self.transient_scale < 0:
            raise ConfigurationError("transient_scale must be >= 0")
        if self.reference_magnitude is not None and self.reference_magnitude <= 0:
            raise ConfigurationError("reference_magnitude must be positive when set")


@dataclass(frozen=True)
class OptimizerSpec:
    """SPSA gain schedule and variant knobs.

    Mirrors SpsaConfig except that A=None is allowed and resolves to
    iterations / 10 when the run length is known.
    """

    a: float = 0.2
    c: float = 0.1
    A: Optional[float] = None
    alpha: float = 0.602
    gamma: float = 0.101
    resample_factor: int = 2
    blocking_tolerance: float = 0.0
    hessian_averaging: float = 0.9
    regularization: float = 1e-3

    def to_spsa(self, variant: str, iterations: int) -> SpsaConfig:
        A = self.A if self.A is not None else iterations / 10.0
        return SpsaConfig(a=self.a, c=self.c, A=A, alpha=self.alpha,
                          gamma=self.gamma, variant=variant,
                          resample_factor=self.resample_factor,
                          blocking_tolerance=self.blocking_tolerance,
                          hessian_averaging=self.hessian_averaging,
                          regularization=self.regularization)

    def __post_init__(self) -> None:
        # Cheap structural check; SpsaConfig revalidates on build.
        self.to_spsa("plain", 100)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a single run needs, grouped by config-file section."""

    problem: ProblemSpec = ProblemSpec()
    ansatz: AnsatzSection = AnsatzSection()
    noise: NoiseSpec = NoiseSpec()
    optimizer: OptimizerSpec = OptimizerSpec()
    controller: ControllerConfig = ControllerConfig()
    kalman: KalmanConfig = KalmanConfig()
    scheme: str = "baseline"
    seed: int = 0
    iterations: int = 200
    out: str = "run.csv"
    tail_window: int = 50

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigurationError(
                f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.iterations <= 0:
            raise ConfigurationError("iterations must be positive")
        if self.tail_window <= 0:
            raise ConfigurationError("tail_window must be positive")

    def spsa_variant(self) -> str:
        return _VARIANT_SCHEMES.get(self.scheme, "plain")


def _get(parser: configparser.ConfigParser, section: str, key: str,
         conv, default):
    """Fetch section/key with conversion; empty string means 'use default'."""
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    if raw == "":
        return default
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigurationError(
            f"bad value for [{section}] {key}: {raw!r} ({exc})") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse INI text into an ExperimentConfig.

    Raises ConfigurationError for malformed syntax, unknown sections or
    keys, and out-of-range values.
    """
    parser = configparser.ConfigParser()
    # Keys are case-sensitive here: [optimizer] has both a and A.
    parser.optionxform = str  # type: ignore[assignment]
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from None

    known = {
        "problem": {"kind", "n", "J", "h", "boundary", "path"},
        "ansatz": {"kind", "reps"},
        "noise": {"lambda_cx", "shots", "transient_scale",
                  "reference_magnitude", "trace", "base_sigma", "spike_prob",
                  "spike_mag", "spike_sign", "length"},
        "optimizer": {"a", "c", "A", "alpha", "gamma", "resample_factor",
                      "blocking_tolerance", "hessian_averaging",
                      "regularization"},
        "controller": {"tau", "target_skip_fraction", "retry_budget",
                       "warmup_iterations", "calibration", "window"},
        "kalman": {"T", "MV", "Q", "x0", "P0"},
        "run": {"scheme", "seed", "iterations", "out", "tail_window"},
    }
    for section in parser.sections():
        if section not in known:
            raise ConfigurationError(
                f"unknown config section [{section}]; expected one of "
                f"{sorted(known)}")
        for key in parser.options(section):
            if key not in known[section]:
                raise ConfigurationError(
                    f"unknown key {key!r} in section [{section}]")

    g = lambda sec, key, conv, default: _get(parser, sec, key, conv, default)

    problem = ProblemSpec(
        kind=g("problem", "kind", str, "tfim"),
        n=g("problem", "n", int, 4),
        J=g("problem", "J", float, 1.0),
        h=g("problem", "h", float, 1.0),
        boundary=g("problem", "boundary", str, "open"),
        path=g("problem", "path", str, None),
    )
    ansatz = AnsatzSection(
        kind=g("ansatz", "kind", str, "RA"),
        reps=g("ansatz", "reps", int, 2),
    )
    trace = TraceSpec(
        source=g("noise", "trace", str, "synthetic"),
        base_sigma=g("noise", "base_sigma", float, 0.02),
        spike_prob=g("noise", "spike_prob", float, 0.05),
        spike_mag=g("noise", "spike_mag", float, 1.0),
        spike_sign=g("noise", "spike_sign", str, "positive"),
        length=g("noise", "length", int, None),
    )
    noise = NoiseSpec(
        lambda_cx=g("noise", "lambda_cx", float, 0.99),
        shots=g("noise", "shots", int, None),
        transient_scale=g("noise", "transient_scale", float, 0.0),
        reference_magnitude=g("noise", "reference_magnitude", float, None),
        trace=trace,
    )
    optimizer = OptimizerSpec(
        a=g("optimizer", "a", float, 0.2),
        c=g("optimizer", "c", float, 0.1),
        A=g("optimizer", "A", float, None),
        alpha=g("optimizer", "alpha", float, 0.602),
        gamma=g("optimizer", "gamma", float, 0.101),
        resample_factor=g("optimizer", "resample_factor", int, 2),
        blocking_tolerance=g("optimizer", "blocking_tolerance", float, 0.0),
        hessian_averaging=g("optimizer", "hessian_averaging", float, 0.9),
        regularization=g("optimizer", "regularization", float, 1e-3),
    )
    controller = ControllerConfig(
        tau=g("controller", "tau", float, 0.0),
        target_skip_fraction=g("controller", "target_skip_fraction", float, 0.10),
        retry_budget=g("controller", "retry_budget", int, 5),
        warmup_iterations=g("controller", "warmup_iterations", int, 20),
        calibration=g("controller", "calibration", str, "quantile_adaptive"),
        window=g("controller", "window", int, 500),
    )
    kalman = KalmanConfig(
        T=g("kalman", "T", float, 1.0),
        MV=g("kalman", "MV", float, 0.1),
        Q=g("kalman", "Q", float, None),
        x0=g("kalman", "x0", float, None),
        P0=g("kalman", "P0", float, None),
    )
    return ExperimentConfig(
        problem=problem, ansatz=ansatz, noise=noise, optimizer=optimizer,
        controller=controller, kalman=kalman,
        scheme=g("run", "scheme", str, "baseline"),
        seed=g("run", "seed", int, 0),
        iterations=g("run", "iterations", int, 200),
        out=g("run", "out", str, "run.csv"),
        tail_window=g("run", "tail_window", int, 50),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_overrides(cfg: ExperimentConfig, *, scheme: Optional[str] = None,
                   seed: Optional[int] = None,
                   out: Optional[str] = None) -> ExperimentConfig:
    """Apply command-line style overrides; None leaves a field alone."""
    updates = {}
    if scheme is not None:
        updates["scheme"] = scheme
    if seed is not None:
        updates["seed"] = seed
    if out is not None:
        updates["out"] = out
    if not updates:
        return cfg
    return dataclasses.replace(cfg, **updates)
