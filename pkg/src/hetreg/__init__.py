"""Adaptive weighted least-squares estimation for heteroscedastic
nonparametric regression, plus the verification laboratories around it:
Monte Carlo risk and efficiency benchmarks, oracle-inequality slack
tracking, exact appendix inequality checks, and a van Trees-type
lower-bound construction with a calibrated gaussian prior."""

__version__ = "0.1.0"

from ._backend import active_backend
from .grid import DesignGrid, basis_matrix, empiric_inner, empiric_norm_sq, \
    gram_deviation, trig_basis
from .quadrature import NumericError, gauss_legendre, integrate, integrate_01
from .scale import (GAUSSIAN, NOISE_CATALOGUE, SCALED_UNIFORM, TWO_POINT,
                    NoiseLaw, Observations, ScaleSpec, eval_scale,
                    frechet_derivative, scale_values, simulate, varsigma)
from .signals import (TrigSignal, ZERO_SIGNAL, benchmark_signal, catalogue,
                      catalogue_table, members, sobolev_weight)
from .estimator import (Estimate, ProcedureConfig, SpectralData, StepFunction,
                        WeightGrid, WeightVector, adaptive_fit,
                        build_weight_grid, cutoff_frequency, oracle_weight,
                        penalized_cost, reconstruct, select_weights,
                        shrink_coefficient, spectral_transform,
                        step_extension, tail_index, weight_vector)
from .risklab import (EfficiencyRecord, Experiment, LemmaRecord,
                      OracleCheckRecord, RiskReport, deterministic_oracle_ratio,
                      efficiency_sweep, exact_fixed_risk, lemma_checks,
                      mc_risk, mc_risk_sup, oracle_inequality_check,
                      pinsker_constant, rate_exponent, rep_rng, risk_table)
from .lowerbound import (LowerBoundReport, Mollifier, PriorDesign,
                         aggregate_lower_bound, allocation_threshold,
                         basis_plateau_moment, bayes_risk_mc, bump,
                         calibrate_prior, gauss_hermite_draws, interval_basis,
                         lower_bound_report, optimal_allocation, psi_capacity,
                         van_trees_bound)
from .periodize import CutoffSpec, cutoff_eval, periodize, periodized_scale
from .io import load_signal, save_observations
