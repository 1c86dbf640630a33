"""Adaptive wavelet trend estimation for series with long-memory Gaussian noise."""
from .baselines import (KernelPlan, KernelTrendRegressor, MinimaxWaveletRegressor, beta_of_d, kernel_estimate,
                        optimal_bandwidth, soft_threshold_estimate)
from .constants import (EstimatorPlan, LrdBasisConstants, Regime, TrendSmoothness, basis_constants, c_star,
                        delta_n, optimal_J, optimal_q, plan_estimator, regime, singular_product_integral,
                        theoretical_mise, thresholds)
from .estimator import (AdaptiveWaveletRegressor, CoefficientSet, Sample, TrendEstimate, adaptive_estimate,
                        asymptotic_detail, coefficient_variance, empirical_coefficients, empirical_mise,
                        reconstruct, tail_energy)
from .exceptions import (ConfigurationError, DivergentIntegralError, DomainError, InvalidWaveletError,
                         LrdTrendError, NumericalError, RegimeTieError)
from .harness import ExperimentConfig, MiseCell, MiseReport, doppler_cstar_override, emit_figure_data, run_experiment
from .noise import NoiseModel, NoisePath, autocov, c_gamma, simulate, simulate_many
from .trends import TrendFunction, get_trend
from .wavelets import DyadicTable, WaveletSpec, cascade_evaluate, eval_scaled, get_spec, get_table, moment

__version__ = "0.1.0"

__all__ = [
    "KernelPlan",
    "KernelTrendRegressor",
    "MinimaxWaveletRegressor",
    "beta_of_d",
    "kernel_estimate",
    "optimal_bandwidth",
    "soft_threshold_estimate",
    "EstimatorPlan",
    "LrdBasisConstants",
    "Regime",
    "TrendSmoothness",
    "basis_constants",
    "c_star",
    "delta_n",
    "optimal_J",
    "optimal_q",
    "plan_estimator",
    "regime",
    "singular_product_integral",
    "theoretical_mise",
    "thresholds",
    "AdaptiveWaveletRegressor",
    "CoefficientSet",
    "Sample",
    "TrendEstimate",
    "adaptive_estimate",
    "asymptotic_detail",
    "coefficient_variance",
    "empirical_coefficients",
    "empirical_mise",
    "reconstruct",
    "tail_energy",
    "ConfigurationError",
    "DivergentIntegralError",
    "DomainError",
    "InvalidWaveletError",
    "LrdTrendError",
    "NumericalError",
    "RegimeTieError",
    "ExperimentConfig",
    "MiseCell",
    "MiseReport",
    "doppler_cstar_override",
    "emit_figure_data",
    "run_experiment",
    "NoiseModel",
    "NoisePath",
    "autocov",
    "c_gamma",
    "simulate",
    "simulate_many",
    "TrendFunction",
    "get_trend",
    "DyadicTable",
    "WaveletSpec",
    "cascade_evaluate",
    "eval_scaled",
    "get_spec",
    "get_table",
    "moment",
]
