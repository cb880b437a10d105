"""Bayesian promotion time cure model for current status data."""

from ._ptcure import (  # noqa: F401
    Chain,
    Dataset,
    NumericalError,
    Prior,
    SamplerConfig,
    ValidationError,
    cure_fraction,
    diagnose,
    elicit_mu,
    ess,
    gelman_rubin,
    gompertz_inverse_survival,
    gompertz_survival,
    log_likelihood,
    log_posterior,
    model_check,
    run_chains,
    run_command,
    simulate,
    step_cdf_at_knots,
    summarize,
)

__version__ = "0.1.0"
