"""Desk-scale lab for variational energy tuning on a simulated noisy
device, with transient-aware job control.

The pieces: a small statevector simulator (statevector), Pauli-sum
observables (hamiltonian), hardware-efficient circuits (ansatz), a
virtual backend with static and transient error channels (device), SPSA
tuners (spsa), the transient-aware accept/reject controller
(controller), a scalar filter overlay (kalman), and the run engine with
comparisons and sweeps (experiments).  The ``vqelab`` command drives it
all from INI configs.
"""

from .ansatz import AnsatzSpec, build, param_count
from .config import (AnsatzSection, ExperimentConfig, NoiseSpec,
                     OptimizerSpec, ProblemSpec, SCHEMES, TraceSpec,
                     load_config, parse_config, with_overrides)
from .controller import (ControllerConfig, IterationRecord, TauCalibrator,
                         calibrate_tau, decide, estimate_transient,
                         only_transients_decide, predict)
from .device import (EnergyEstimate, NoiseConfig, SyntheticTraceParams,
                     TransientTrace, VirtualBackend, execute_job,
                     gen_synthetic_trace, load_trace, save_trace)
from .errors import (CapabilityError, ConfigurationError, ParseError,
                     TraceExhaustedError)
from .experiments import (CompareReport, RunResult, RunSummary, SweepReport,
                          compare, improvement_ratio, run_experiment, sweep,
                          write_compare_csv, write_run_csv, write_sweep_csv)
from .hamiltonian import (PauliSum, exact_ground_energy, load_pauli_sum,
                          objective, pauli_sum, save_pauli_sum, tfim_1d,
                          to_dense)
from .kalman import KalmanConfig, KalmanState, filter_series, kalman_step
from .spsa import SpsaConfig, rademacher, run_tuner, spsa_gradient, spsa_update
from .statevector import (Circuit, Gate, State, expectation_pauli,
                          pauli_to_dense, run_circuit)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
