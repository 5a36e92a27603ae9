"""Design-based (causal) bootstrap inference for average treatment effects."""

from causalboot.ecdf import StepCdf, iso_product_moment
from causalboot.population import (
    ObservedSample,
    PotentialPopulation,
    impute_isotone,
    population_marginals,
    replicate_to_population,
)
from causalboot.estimators import (
    VarianceBreakdown,
    agl_variance,
    ate_estimate,
    fisher_implicit_variance,
    neyman_variance,
    randomization_cov_exact,
    randomization_cov_kernel,
    sigma_bound,
    true_randomization_variance,
)
from causalboot.resampling import SeedSpec
from causalboot.bootstrap import (
    ConfidenceInterval,
    MethodSpec,
    TDrawSet,
    causal_bootstrap,
    confidence_interval,
    standard_bootstrap,
    variance_from_draws,
)
from causalboot.fisher import fisher_ci, fisher_test
from causalboot.simulation import CoverageReport, DesignSpec, draw_population, run_coverage

__version__ = "0.1.0"
