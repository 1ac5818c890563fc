"""Command line interface.

Subcommands:

  run           one scheme, one seed; per-iteration CSV plus trajectory
                figure
  compare       several schemes across shared seeds, rated against the
                baseline scheme
  sweep         noise_magnitude / threshold / bond_length grids
  gen-trace     write a synthetic transient trace to a file
  exact-energy  dense diagonalization of a configured problem

Every data product is a delimited text file; figures are rendered next
to them (same path, .png) unless --no-plot is given.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from .config import (ExperimentConfig, load_config, with_overrides)
from .device import SyntheticTraceParams, gen_synthetic_trace, save_trace
from .errors import ConfigurationError
from .experiments import (SWEEP_KINDS, build_problem, compare,
                          run_experiment, sweep, write_compare_csv,
                          write_run_csv, write_sweep_csv,
                          write_sweep_summary_csv)
from .hamiltonian import exact_ground_energy, tfim_1d

SPIKE_SIGN_CHOICES = ("positive", "negative", "symmetric")


def _stem(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root


def _parse_seeds(raw: str) -> List[int]:
    """'0,1,5' or '0:10' (half-open range)."""
    raw = raw.strip()
    if ":" in raw:
        lo, hi = raw.split(":", 1)
        return list(range(int(lo), int(hi)))
    return [int(tok) for tok in raw.split(",") if tok.strip() != ""]


def _parse_grid(raw: str) -> List[float]:
    return [float(tok) for tok in raw.split(",") if tok.strip() != ""]


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    return with_overrides(cfg, scheme=getattr(args, "scheme", None),
                          seed=getattr(args, "seed", None),
                          out=getattr(args, "out", None))


def _cmd_run(args) -> int:
    cfg = _load(args)
    result = run_experiment(cfg)
    write_run_csv(result, cfg.out)
    print(f"scheme={result.scheme} seed={result.seed}")
    s = result.summary
    print(f"final_energy={s.final_energy!r}")
    print(f"best_energy={s.best_energy!r}")
    print(f"exact_ground_energy={s.exact_ground_energy!r}")
    print(f"skip_count={s.skip_count} forced_accept_count="
          f"{s.forced_accept_count} total_jobs={s.total_jobs}")
    print(f"wrote {cfg.out}")
    if not args.no_plot:
        from .plotting import plot_run
        fig_path = _stem(cfg.out) + ".png"
        plot_run(result, fig_path)
        print(f"wrote {fig_path}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _load(args)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    seeds = _parse_seeds(args.seeds) if args.seeds else [cfg.seed]
    report = compare(cfg, schemes, seeds)
    out = args.out or "compare.csv"
    write_compare_csv(report, out)
    for scheme in report.schemes:
        print(f"{scheme}: median_final={report.median_final[scheme]!r} "
              f"median_ratio={report.median_ratio[scheme]!r}")
    print(f"wrote {out}")
    if not args.no_plot:
        from .plotting import plot_compare
        fig_path = _stem(out) + ".png"
        plot_compare(report, fig_path)
        print(f"wrote {fig_path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    grid = _parse_grid(args.grid)
    seeds = _parse_seeds(args.seeds) if args.seeds else [cfg.seed]
    report = sweep(cfg, args.kind, grid, seeds, data_dir=args.data_dir)
    out = args.out or "sweep.csv"
    write_sweep_csv(report, out)
    summary_path = _stem(out) + "_summary.csv"
    write_sweep_summary_csv(report, summary_path)
    print(f"wrote {out}")
    print(f"wrote {summary_path}")
    for value, seed, message in report.errors:
        print(f"sweep point {value} seed {seed} failed: {message}",
              file=sys.stderr)
    if not report.points:
        print("error: every sweep point failed", file=sys.stderr)
        return 1
    if not args.no_plot:
        from .plotting import plot_sweep
        fig_path = _stem(out) + ".png"
        plot_sweep(report, fig_path)
        print(f"wrote {fig_path}")
    return 0


def _cmd_gen_trace(args) -> int:
    params = SyntheticTraceParams(length=args.length,
                                  base_sigma=args.base_sigma,
                                  spike_prob=args.spike_prob,
                                  spike_mag=args.spike_mag,
                                  spike_sign=args.spike_sign)
    trace = gen_synthetic_trace(params, np.random.default_rng(args.seed))
    save_trace(trace, args.out,
               header=(f"synthetic trace: length={args.length} "
                       f"base_sigma={args.base_sigma} "
                       f"spike_prob={args.spike_prob} "
                       f"spike_mag={args.spike_mag} "
                       f"spike_sign={args.spike_sign} seed={args.seed}"))
    print(f"wrote {args.out}")
    return 0


def _cmd_exact_energy(args) -> int:
    picked = [x for x in (args.config, args.file, args.tfim) if x is not None]
    if len(picked) != 1:
        raise ConfigurationError(
            "exact-energy needs exactly one of --config, --file, --tfim")
    if args.config is not None:
        ham = build_problem(load_config(args.config))
    elif args.file is not None:
        from .hamiltonian import load_pauli_sum
        ham = load_pauli_sum(args.file)
    else:
        ham = tfim_1d(args.tfim, args.J, args.h, args.boundary)
    print(repr(exact_ground_energy(ham)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqelab",
        description="variational tuning lab against a simulated noisy "
                    "device")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scheme=True):
        p.add_argument("--config", required=True, help="INI config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override [run] seed")
        p.add_argument("--out", default=None, help="override output path")
        if scheme:
            p.add_argument("--scheme", default=None,
                           help="override [run] scheme")
        p.add_argument("--no-plot", action="store_true",
                       help="skip figure rendering")

    p_run = sub.add_parser("run", help="run one scheme for one seed")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare",
                           help="run several schemes on shared seeds")
    add_common(p_cmp, scheme=False)
    p_cmp.add_argument("--schemes", default="baseline,qismet",
                       help="comma-separated scheme list (must include "
                            "baseline)")
    p_cmp.add_argument("--seeds", default=None,
                       help="comma list '0,1,2' or range '0:10'; default "
                            "is the config seed")
    p_cmp.set_defaults(func=_cmd_compare)

    p_sw = sub.add_parser("sweep", help="run a parameter grid")
    add_common(p_sw)
    p_sw.add_argument("--kind", required=True, choices=SWEEP_KINDS)
    p_sw.add_argument("--grid", required=True,
                      help="comma-separated grid values")
    p_sw.add_argument("--seeds", default=None,
                      help="comma list or range; default is the config seed")
    p_sw.add_argument("--data-dir", default=None,
                      help="bond_length coefficient file directory "
                           "(default: bundled)")
    p_sw.set_defaults(func=_cmd_sweep)

    p_gt = sub.add_parser("gen-trace", help="write a synthetic trace file")
    p_gt.add_argument("--out", required=True)
    p_gt.add_argument("--length", type=int, required=True)
    p_gt.add_argument("--base-sigma", type=float, default=0.02)
    p_gt.add_argument("--spike-prob", type=float, default=0.05)
    p_gt.add_argument("--spike-mag", type=float, default=1.0)
    p_gt.add_argument("--spike-sign", default="positive",
                      choices=SPIKE_SIGN_CHOICES)
    p_gt.add_argument("--seed", type=int, default=0)
    p_gt.set_defaults(func=_cmd_gen_trace)

    p_ee = sub.add_parser("exact-energy",
                          help="dense ground energy of a problem")
    p_ee.add_argument("--config", default=None)
    p_ee.add_argument("--file", default=None, help="Pauli-sum file")
    p_ee.add_argument("--tfim", type=int, default=None,
                      help="chain length for a transverse-field Ising "
                           "problem")
    p_ee.add_argument("--J", type=float, default=1.0)
    p_ee.add_argument("--h", type=float, default=1.0)
    p_ee.add_argument("--boundary", default="open",
                      choices=("open", "periodic"))
    p_ee.set_defaults(func=_cmd_exact_energy)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
