"""umwkit: the unit-modified-Weibull distribution and its quantile regression.

Library layout:

- distribution: CDF/PDF/quantile/sampling/hazard/order statistics
- inference:    maximum likelihood for the distribution, Wald inference
- links:        logit/probit/cloglog/loglog/cauchit link functions
- regression:   quantile regression with analytic score and information
- diagnostics:  quantile residuals, EDF statistics, simulated envelopes
- montecarlo:   bias/MSE/coverage simulation studies
- cli:          `umwkit` command-line front-end
"""

from .distribution import (
    ReparamParams,
    ShapeCoefficients,
    UmwParams,
    alpha_from_quantile,
    cdf,
    hazard,
    log_pdf,
    order_stat_pdf,
    pdf,
    quantile,
    reparam_cdf,
    reparam_log_pdf,
    sample,
    shape_coefficients,
)
from .errors import (
    ConvergenceFailure,
    DegenerateProbability,
    DomainError,
    RankDeficientDesign,
    SingularInformation,
    UmwError,
)
from .inference import (
    Criteria,
    Dataset,
    FitOptions,
    FitResult,
    WaldResult,
    alpha_profile_mle,
    confidence_intervals,
    fit_umw,
    info_criteria,
    loglik_umw,
    observed_info_umw,
    score_umw,
    wald_test,
)
from .links import LINK_NAMES, LinkFunction, get_link, link_eval
from .regression import (
    RegressionFit,
    RegressionSpec,
    RegressionTheta,
    fit_rq,
    loglik_rq,
    make_spec,
    observed_info_rq,
    ols_init,
    predict_quantile,
    score_rq,
    simulate_response,
)
from .diagnostics import (
    EnvelopeBands,
    GofReport,
    ResidualReport,
    gof_stats,
    quantile_residuals,
    r2_generalized,
    simulated_envelope,
)
from .montecarlo import (
    MonteCarloReport,
    StudyScenario,
    aggregate_metrics,
    load_scenario,
    preset_scenarios,
    report_to_csv,
    run_dist_study,
    run_reg_study,
    run_study,
)

__version__ = "0.1.0"
