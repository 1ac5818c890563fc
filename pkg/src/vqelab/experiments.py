"""Run engine: tuning schemes, summaries, CSV output, comparisons, sweeps.

A run pairs one SPSA tuner with one virtual device and steps them for a
fixed number of iterations.  Every scheme batches the circuits of one
iteration into a single device job so they share a transient:

  baseline family   job = [f(theta+), f(theta-), (extras), f(candidate)]
  guarded schemes   job = [rerun(prev accepted), f(theta+), f(theta-),
                           f(candidate)]

The guarded schemes are 'qismet' (re-execute the same candidate in a
fresh job on reject, up to the retry budget, then force-accept) and
'only_transients' (discard the whole iteration on reject; the tuner
stays frozen and the iteration still counts against the budget).
'kalman' is the plain baseline with a scalar filter laid over the
committed energy series after the fact.

Per-seed determinism: one SeedSequence fans out into named streams
(trace, init, spsa, shots), and the perturbation direction is drawn once
per iteration, never on retries, so schemes that share a seed see the
same trace, the same start point, and the same perturbation sequence.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import controller as ctl
from .ansatz import AnsatzSpec, build, param_count
from .config import ExperimentConfig, SCHEMES
from .controller import IterationRecord, TauCalibrator
from .device import (NoiseConfig, SyntheticTraceParams, TransientTrace,
                     VirtualBackend, gen_synthetic_trace, load_trace)
from .errors import ConfigurationError
from .hamiltonian import (PauliSum, exact_ground_energy, load_pauli_sum,
                          tfim_1d)
from .kalman import filter_series
from .spsa import (SecondOrderState, SpsaConfig, gain_c, gradient_from_pair,
                   hessian_from_quad, rademacher, regularized_preconditioner,
                   spsa_update)

CSV_HEADER = ("iteration,job_index,scheme,E_m,E_mR_prev,T_m,E_p,G_m,G_p,"
              "decision,retries,E_ideal,committed_energy")

SUMMARY_HEADER = ("scheme,seed,final_energy,best_energy,exact_ground_energy,"
                  "improvement_ratio,skip_count,forced_accept_count,"
                  "total_jobs,error")

SWEEP_KINDS = ("noise_magnitude", "threshold", "bond_length")

# role column in sweep output: a grid point's tuning run vs. the same-seed
# zero-noise reference emitted by the bond_length sweep
ROLE_RUN = "run"
ROLE_REFERENCE = "reference"


@dataclass(frozen=True)
class RunSummary:
    scheme: str
    final_energy: float
    best_energy: float
    exact_ground_energy: float
    improvement_ratio: Optional[float]
    skip_count: int
    forced_accept_count: int
    total_jobs: int


@dataclass
class RunResult:
    """Everything one run produced.

    committed[k] is the energy standing after iteration k (for 'kalman'
    the filtered value); thetas[k] the parameters standing after
    iteration k.  records carries one row per decision, so guarded
    schemes may have more rows than iterations.
    """

    scheme: str
    seed: int
    config: ExperimentConfig
    records: List[IterationRecord]
    committed: np.ndarray
    thetas: List[np.ndarray]
    summary: RunSummary
    exact_ground: float
    filtered: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# run setup

def rng_streams(seed: int) -> Dict[str, np.random.Generator]:
    """Independent named streams from one seed; spawn order is part of
    the on-disk reproducibility contract, never reorder."""
    children = np.random.SeedSequence(seed).spawn(4)
    names = ("trace", "init", "spsa", "shots")
    return {name: np.random.default_rng(child)
            for name, child in zip(names, children)}


def build_problem(cfg: ExperimentConfig) -> PauliSum:
    p = cfg.problem
    if p.kind == "tfim":
        return tfim_1d(p.n, p.J, p.h, p.boundary)
    return load_pauli_sum(p.path)


def trace_length_needed(cfg: ExperimentConfig) -> int:
    # worst case is the retry scheme: every iteration exhausts its budget
    return (cfg.controller.retry_budget + 1) * cfg.iterations + 8


def resolve_trace(cfg: ExperimentConfig,
                  rng: np.random.Generator) -> TransientTrace:
    t = cfg.noise.trace
    if t.source == "synthetic":
        length = t.length if t.length is not None else trace_length_needed(cfg)
        params = SyntheticTraceParams(length=length, base_sigma=t.base_sigma,
                                      spike_prob=t.spike_prob,
                                      spike_mag=t.spike_mag,
                                      spike_sign=t.spike_sign)
        return gen_synthetic_trace(params, rng)
    return load_trace(t.source)


@dataclass
class _Prepared:
    """Shared per-run state the scheme loops work against."""

    cfg: ExperimentConfig
    ham: PauliSum
    exact_ground: float
    spec: AnsatzSpec
    theta0: np.ndarray
    backend: VirtualBackend
    spsa: SpsaConfig
    spsa_rng: np.random.Generator


def _prepare(cfg: ExperimentConfig) -> _Prepared:
    ham = build_problem(cfg)
    e0 = exact_ground_energy(ham)
    streams = rng_streams(cfg.seed)
    trace = resolve_trace(cfg, streams["trace"])
    ref = cfg.noise.reference_magnitude
    if ref is None:
        ref = abs(e0) if e0 != 0.0 else 1.0
    noise = NoiseConfig(trace=trace, lambda_cx=cfg.noise.lambda_cx,
                        shots=cfg.noise.shots,
                        transient_scale=cfg.noise.transient_scale,
                        reference_magnitude=ref)
    backend = VirtualBackend(cfg=noise, rng=streams["shots"])
    spec = AnsatzSpec(kind=cfg.ansatz.kind, n=ham.n, reps=cfg.ansatz.reps)
    theta0 = streams["init"].uniform(-math.pi, math.pi, param_count(spec))
    spsa = cfg.optimizer.to_spsa(cfg.spsa_variant(), cfg.iterations)
    return _Prepared(cfg=cfg, ham=ham, exact_ground=e0, spec=spec,
                     theta0=theta0, backend=backend, spsa=spsa,
                     spsa_rng=streams["spsa"])


# ---------------------------------------------------------------------------
# scheme loops

def _run_family(prep: _Prepared) -> Tuple[List[IterationRecord], np.ndarray,
                                          List[np.ndarray], int]:
    """Baseline and its tuner-side variants; returns (records, committed
    energies, committed thetas, skip count)."""
    cfg, spsa = prep.cfg, prep.spsa
    theta = prep.theta0
    records: List[IterationRecord] = []
    committed = np.empty(cfg.iterations)
    thetas: List[np.ndarray] = []
    committed_E: Optional[float] = None   # blocking anchor and CSV column
    skip_count = 0
    so_state = SecondOrderState()
    for k in range(cfg.iterations):
        c_k = gain_c(spsa, k)
        job = prep.backend.open_job()
        n_draws = spsa.resample_factor if spsa.variant == "resampling" else 1
        total = np.zeros_like(theta)
        delta = f_plus = f_minus = None
        for _ in range(n_draws):
            delta = rademacher(prep.spsa_rng, theta.size)
            f_plus = job.evaluate(build(prep.spec, theta + c_k * delta),
                                  prep.ham).value
            f_minus = job.evaluate(build(prep.spec, theta - c_k * delta),
                                   prep.ham).value
            total += gradient_from_pair(f_plus, f_minus, c_k, delta)
        g = total / n_draws
        precond = None
        if spsa.variant == "second_order":
            delta2 = rademacher(prep.spsa_rng, theta.size)
            f_pp = job.evaluate(
                build(prep.spec, theta + c_k * delta + c_k * delta2),
                prep.ham).value
            f_mp = job.evaluate(
                build(prep.spec, theta - c_k * delta + c_k * delta2),
                prep.ham).value
            so_state.absorb(hessian_from_quad(f_plus, f_minus, f_pp, f_mp,
                                              c_k, delta, delta2),
                            spsa.hessian_averaging)
            precond = regularized_preconditioner(so_state.h_bar,
                                                 spsa.regularization)
        candidate = spsa_update(theta, k, g, spsa, precond)
        cand_est = job.evaluate(build(prep.spec, candidate), prep.ham)
        prep.backend.close_job(job)
        E_m = cand_est.value

        decision: Optional[str] = None
        G_m: Optional[float] = None
        if spsa.variant == "blocking":
            if committed_E is None:
                decision = ctl.ACCEPT
            else:
                G_m = E_m - committed_E
                decision = (ctl.ACCEPT
                            if E_m <= committed_E + spsa.blocking_tolerance
                            else ctl.REJECT)
        if decision != ctl.REJECT:
            theta = candidate
            committed_E = E_m
        else:
            skip_count += 1
        committed[k] = committed_E
        thetas.append(theta)
        records.append(IterationRecord(
            i=k, job_index=cand_est.job_index, E_m=E_m, G_m=G_m,
            decision=decision, E_ideal=cand_est.ideal,
            committed_energy=committed_E))
    return records, committed, thetas, skip_count


def _run_guarded(prep: _Prepared, retry: bool
                 ) -> Tuple[List[IterationRecord], np.ndarray,
                            List[np.ndarray], int, int]:
    """Transient-aware loop.

    retry=True re-executes the same candidate in a fresh job after a
    reject (up to the budget, then force-accepts); retry=False discards
    the iteration outright.  Returns (records, committed energies,
    committed thetas, skip count, forced accept count).
    """
    cfg, spsa = prep.cfg, prep.spsa
    ctrl = cfg.controller
    theta = prep.theta0
    records: List[IterationRecord] = []
    committed = np.empty(cfg.iterations)
    thetas: List[np.ndarray] = []
    calibrator = TauCalibrator(cfg=ctrl)
    anchor_E: Optional[float] = None       # E_m of the last accepted iteration
    anchor_circuit = None                  # its candidate circuit, for reruns
    skip_count = 0
    forced = 0
    for k in range(cfg.iterations):
        c_k = gain_c(spsa, k)
        delta = rademacher(prep.spsa_rng, theta.size)
        candidate = None
        cand_circuit = None
        retries = 0
        while True:
            job = prep.backend.open_job()
            rerun_val = (job.evaluate(anchor_circuit, prep.ham).value
                         if anchor_circuit is not None else None)
            f_plus = job.evaluate(build(prep.spec, theta + c_k * delta),
                                  prep.ham).value
            f_minus = job.evaluate(build(prep.spec, theta - c_k * delta),
                                   prep.ham).value
            if candidate is None:
                # the candidate is fixed by the first attempt's gradient;
                # retries re-measure it, they do not re-derive it
                g = gradient_from_pair(f_plus, f_minus, c_k, delta)
                candidate = spsa_update(theta, k, g, spsa)
                cand_circuit = build(prep.spec, candidate)
            cand_est = job.evaluate(cand_circuit, prep.ham)
            prep.backend.close_job(job)
            E_m = cand_est.value

            if rerun_val is None:
                T_m = E_p = G_m = G_p = None
                decision = ctl.ACCEPT
            else:
                T_m = ctl.estimate_transient(rerun_val, anchor_E)
                calibrator.observe(T_m)
                tau = calibrator.current_tau()
                if retry:
                    E_p, G_m, G_p = ctl.predict(E_m, T_m, anchor_E)
                    decision = ctl.decide(G_m, G_p, tau)
                    if decision == ctl.REJECT and retries >= ctrl.retry_budget:
                        decision = ctl.FORCED_ACCEPT
                else:
                    E_p = G_m = G_p = None
                    decision = ctl.only_transients_decide(T_m, tau)

            accepted = decision != ctl.REJECT
            if accepted:
                theta = candidate
                anchor_E = E_m
                anchor_circuit = cand_circuit
            else:
                skip_count += 1
            if decision == ctl.FORCED_ACCEPT:
                forced += 1
            records.append(IterationRecord(
                i=k, job_index=cand_est.job_index, E_m=E_m,
                E_mR_prev=rerun_val, T_m=T_m, E_p=E_p, G_m=G_m, G_p=G_p,
                decision=decision, retries=retries if retry else None,
                E_ideal=cand_est.ideal,
                committed_energy=anchor_E))
            if accepted:
                break
            if retry:
                retries += 1
                continue
            break  # discard mode: the iteration is spent
        committed[k] = anchor_E
        thetas.append(theta)
        calibrator.note_iteration()
    return records, committed, thetas, skip_count, forced


# ---------------------------------------------------------------------------
# entry points

def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run one scheme for one seed; fully deterministic in (cfg, seed)."""
    if cfg.scheme not in SCHEMES:
        raise ConfigurationError(
            f"unknown scheme {cfg.scheme!r}; expected one of {SCHEMES}")
    prep = _prepare(cfg)
    forced = 0
    filtered = None
    if cfg.scheme == "qismet":
        records, committed, thetas, skips, forced = _run_guarded(prep, True)
    elif cfg.scheme == "only_transients":
        records, committed, thetas, skips, forced = _run_guarded(prep, False)
    else:
        records, committed, thetas, skips = _run_family(prep)
        if cfg.scheme == "kalman":
            filtered = filter_series(committed, cfg.kalman)
            for rec, x in zip(records, filtered):
                rec.committed_energy = float(x)
    series = filtered if filtered is not None else committed
    tail = min(cfg.tail_window, cfg.iterations)
    summary = RunSummary(
        scheme=cfg.scheme,
        final_energy=float(np.mean(series[-tail:])),
        best_energy=float(np.min(series)),
        exact_ground_energy=prep.exact_ground,
        improvement_ratio=None,
        skip_count=skips,
        forced_accept_count=forced,
        total_jobs=prep.backend.jobs_executed)
    return RunResult(scheme=cfg.scheme, seed=cfg.seed, config=cfg,
                     records=records,
                     committed=np.asarray(series, dtype=float),
                     thetas=thetas, summary=summary,
                     exact_ground=prep.exact_ground, filtered=filtered)


# ---------------------------------------------------------------------------
# CSV output

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def format_record(rec: IterationRecord, scheme: str) -> str:
    fields = (rec.i, rec.job_index, scheme, rec.E_m, rec.E_mR_prev, rec.T_m,
              rec.E_p, rec.G_m, rec.G_p, rec.decision, rec.retries,
              rec.E_ideal, rec.committed_energy)
    return ",".join(_fmt(f) for f in fields)


def run_csv_lines(result: RunResult) -> List[str]:
    return [CSV_HEADER] + [format_record(r, result.scheme)
                           for r in result.records]


def write_run_csv(result: RunResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(run_csv_lines(result)) + "\n")


def summary_csv_line(summary: RunSummary, seed, error: str = "") -> str:
    fields = (summary.scheme, seed, summary.final_energy,
              summary.best_energy, summary.exact_ground_energy,
              summary.improvement_ratio, summary.skip_count,
              summary.forced_accept_count, summary.total_jobs, error)
    return ",".join(_fmt(f) for f in fields)


# ---------------------------------------------------------------------------
# comparisons

@dataclass
class CompareReport:
    """Per-(scheme, seed) results plus per-scheme medians.

    ratios[scheme][i] pairs with seeds[i]; medians are keyed by scheme.
    """

    schemes: List[str]
    seeds: List[int]
    results: Dict[Tuple[str, int], RunResult]
    ratios: Dict[str, List[float]]
    median_final: Dict[str, float]
    median_ratio: Dict[str, float]


def improvement_ratio(reference_final: float, scheme_final: float,
                      exact_ground: float) -> float:
    """How much closer to the exact ground energy than the reference.

    > 1 means the scheme lands closer than the reference; a scheme
    compared against itself gives exactly 1.  A non-positive gap (the
    scheme met or beat the exact ground energy, possible only through
    noise) maps to +inf.
    """
    gap = scheme_final - exact_ground
    if gap <= 0:
        return math.inf
    return (reference_final - exact_ground) / gap


def compare(cfg: ExperimentConfig, schemes: Sequence[str],
            seeds: Sequence[int]) -> CompareReport:
    """Run each scheme on each seed and rate everything against baseline.

    Ratios are paired per seed, so the result is independent of the
    order seeds are given in.
    """
    schemes = list(dict.fromkeys(schemes))   # dedupe, keep order
    if "baseline" not in schemes:
        raise ConfigurationError(
            "compare needs the baseline scheme as reference; "
            f"got {schemes}")
    if not seeds:
        raise ConfigurationError("compare needs at least one seed")
    results: Dict[Tuple[str, int], RunResult] = {}
    for scheme in schemes:
        for seed in seeds:
            run_cfg = dataclasses.replace(cfg, scheme=scheme, seed=seed)
            results[(scheme, seed)] = run_experiment(run_cfg)
    ratios: Dict[str, List[float]] = {}
    for scheme in schemes:
        per_seed = []
        for seed in seeds:
            ref = results[("baseline", seed)].summary
            own = results[(scheme, seed)].summary
            r = improvement_ratio(ref.final_energy, own.final_energy,
                                  own.exact_ground_energy)
            results[(scheme, seed)].summary = dataclasses.replace(
                own, improvement_ratio=r)
            per_seed.append(r)
        ratios[scheme] = per_seed
    median_final = {s: float(np.median([results[(s, seed)].summary.final_energy
                                        for seed in seeds]))
                    for s in schemes}
    median_ratio = {s: float(np.median(ratios[s])) for s in schemes}
    return CompareReport(schemes=schemes, seeds=list(seeds), results=results,
                         ratios=ratios, median_final=median_final,
                         median_ratio=median_ratio)


def write_compare_csv(report: CompareReport, path: str) -> None:
    lines = [SUMMARY_HEADER]
    for scheme in report.schemes:
        for seed in report.seeds:
            lines.append(summary_csv_line(
                report.results[(scheme, seed)].summary, seed))
        fields = (scheme, "median", report.median_final[scheme], None, None,
                  report.median_ratio[scheme], None, None, None, "")
        lines.append(",".join(_fmt(f) for f in fields))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# sweeps

@dataclass
class SweepPoint:
    grid_value: float
    seed: int
    role: str
    result: RunResult


@dataclass
class SweepReport:
    kind: str
    points: List[SweepPoint] = field(default_factory=list)
    errors: List[Tuple[float, int, str]] = field(default_factory=list)


def bundled_hydrogen_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "data", "hydrogen")


def hydrogen_file(length: float, data_dir: Optional[str] = None) -> str:
    """Bond length -> bundled coefficient file (h2_<length>.txt, 2 dp)."""
    base = data_dir if data_dir is not None else bundled_hydrogen_dir()
    return os.path.join(base, f"h2_{length:.2f}.txt")


def _point_config(cfg: ExperimentConfig, kind: str, value: float,
                  data_dir: Optional[str]) -> ExperimentConfig:
    if kind == "noise_magnitude":
        noise = dataclasses.replace(cfg.noise, transient_scale=value)
        return dataclasses.replace(cfg, noise=noise)
    if kind == "threshold":
        ctrl = dataclasses.replace(cfg.controller,
                                   target_skip_fraction=value)
        return dataclasses.replace(cfg, controller=ctrl)
    # bond_length
    path = hydrogen_file(value, data_dir)
    if not os.path.exists(path):
        raise ConfigurationError(f"no coefficient file for bond length "
                                 f"{value}: {path} does not exist")
    problem = dataclasses.replace(cfg.problem, kind="file", path=path)
    return dataclasses.replace(cfg, problem=problem)


def _noise_free(cfg: ExperimentConfig) -> ExperimentConfig:
    noise = dataclasses.replace(cfg.noise, transient_scale=0.0, shots=None,
                                lambda_cx=1.0)
    return dataclasses.replace(cfg, noise=noise, scheme="baseline")


def sweep(cfg: ExperimentConfig, kind: str, grid: Sequence[float],
          seeds: Sequence[int],
          data_dir: Optional[str] = None) -> SweepReport:
    """Run the configured scheme across a parameter grid.

    Every grid point sees the same seeds so points differ only in the
    swept parameter.  A failing run is recorded and the sweep moves on.
    The bond_length sweep also runs a same-seed noise-free baseline per
    point so curves can be read against a clean reference.
    """
    if kind not in SWEEP_KINDS:
        raise ConfigurationError(
            f"unknown sweep kind {kind!r}; expected one of {SWEEP_KINDS}")
    if not grid:
        raise ConfigurationError("sweep needs a non-empty grid")
    if not seeds:
        raise ConfigurationError("sweep needs at least one seed")
    if kind == "threshold" and cfg.controller.calibration != "quantile_adaptive":
        raise ConfigurationError(
            "threshold sweep varies target_skip_fraction, which only "
            "matters under quantile_adaptive calibration")
    report = SweepReport(kind=kind)
    for value in grid:
        for seed in seeds:
            try:
                point_cfg = _point_config(cfg, kind, value, data_dir)
                run_cfg = dataclasses.replace(point_cfg, seed=seed)
                result = run_experiment(run_cfg)
                report.points.append(SweepPoint(grid_value=value, seed=seed,
                                                role=ROLE_RUN, result=result))
                if kind == "bond_length":
                    ref = run_experiment(_noise_free(run_cfg))
                    report.points.append(SweepPoint(
                        grid_value=value, seed=seed, role=ROLE_REFERENCE,
                        result=ref))
            except Exception as exc:  # record and continue
                report.errors.append((value, seed, str(exc)))
    return report


def write_sweep_csv(report: SweepReport, path: str) -> None:
    """Long-format per-iteration log; the trailing columns of each row
    are byte-identical to the same run's standalone CSV rows."""
    lines = ["grid_value,seed,role," + CSV_HEADER]
    for pt in report.points:
        prefix = f"{_fmt(pt.grid_value)},{pt.seed},{pt.role},"
        for rec in pt.result.records:
            lines.append(prefix + format_record(rec, pt.result.scheme))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_summary_csv(report: SweepReport, path: str) -> None:
    # seed lives in the summary columns, so the prefix adds only what the
    # summary lacks: the grid point and the run/reference role.
    lines = ["grid_value,role," + SUMMARY_HEADER]
    for pt in report.points:
        prefix = f"{_fmt(pt.grid_value)},{pt.role},"
        lines.append(prefix + summary_csv_line(pt.result.summary,
                                               pt.result.seed))
    for value, seed, message in report.errors:
        clean = message.replace(",", ";").replace("\n", " ")
        fields = ("", seed, "", "", "", "", "", "", "", clean)
        lines.append(f"{_fmt(value)},{ROLE_RUN},"
                     + ",".join(str(f) for f in fields))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
