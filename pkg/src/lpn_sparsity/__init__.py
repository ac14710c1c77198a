"""Learning sparse linear functions over prime fields from a sparsity approximator.

Simulated noisy oracles, pluggable approximators and the reductions that turn
an approximator of d(f) into a proper learner for sparse and then arbitrary
linear functions.
"""

from .approx import (ApproximatorHandle, approximator_from_config, boost_median,
                     brute_force_approximator, cheat_band_approximator, clamp_to_delta)
from .budget import LearnerBudget
from .errors import *  # noqa: F401,F403
from .field import Field, fe_inv, make_field, sample_nonzero, sample_uniform
from .full_learner import (boost_mode, eta_sweep, learn_d_sparse_via_shift, learn_parity_full,
                           learn_sparse_pipeline, pad_to_big_n)
from .linmodel import (GammaSpec, LabeledExample, LinearFn, big_gamma, delta_cap, eval_linear,
                       gamma_eval, gamma_inv, magnify_noise, pad_example, permute_scale_transform,
                       randomize_coordinate, sample_sparse_linear, shift_label)
from .oracle import ExampleOracle, oracle_next, planted_oracle, uniform_label_oracle
from .psi import PsiTable, build_psi_table, estimate_psi_of_target, find_gap_k
from .selection import hypothesis_select
from .sparse_reduction import (RelevanceReport, classify_variables_psi,
                               identify_relevant_distinguisher, learn_sparse_k,
                               recover_coefficients_gauss, recover_coefficients_psi)

__version__ = "0.1.0"
