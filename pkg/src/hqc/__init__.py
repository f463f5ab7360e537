"""Co-adapted couplings of symmetric random walks on the hypercube.

The package simulates coupled pairs of continuous-time walks under
admissible controls, evaluates the exact coupling-time law of the
pair-matching control, certifies that no admissible control beats it,
and compares its tail against the total-variation lower bound.
"""

from .core import (CouplingState, DimensionMismatchError, Vertex,
                   apply_event, flip, hamming, make_state)
from .strategy import (ParametricStrategy, QSpec, StrategyError,
                       StrategyParams, aldous_q, independent_q,
                       lambda_rates, load_strategy_file, optimal_q,
                       params_from_rule, parametric_q, validate_qspec)
from .engine import (ConfigError, CouplingRun, FrozenStateError,
                     ReplicaConfig, SimReport, canonical_pair,
                     marginal_flip_counts, run_coupling, run_parity_chain,
                     run_replicas, sample_coupling_taus,
                     sample_parity_chain, step)
from .analytic import (HypoexpLaw, LambdaVector, LnConstraintError,
                       MaxResult, D_alpha, V_alpha, bellman_residual,
                       check_laplace_identities, generator_apply,
                       hypoexp_law, hypoexp_rates, maximize_over_Ln,
                       optimal_lambda, parity_gap, phi_alpha, theta, vhat,
                       vhat_dt, vhat_level_time)
from .tv import (TvCurve, coupling_gap, expected_tau_hat, half_mixing_time,
                 nonmaximality_ratio, tv, tv_curve)
from .rng import RngStream
from .backend import backend_name, get_kernels

__version__ = "0.1.0"
