"""Arbitrage and free-lunch detection in discretised Gaussian moving-average markets."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DivergentIntegral,
    DomainError,
    EnumerationTooLarge,
    FreeLunchError,
    GDomainError,
    HypothesisViolated,
    LengthMismatch,
    NonDifferenceKernel,
    NumericalError,
    QuadratureFailure,
    SingularDerivative,
    SingularityError,
)
from .innovation import (
    PRNG_ID,
    InnovationLaw,
    law_degenerate,
    law_from_atoms,
    law_rademacher,
    law_two_point,
    make_rng,
    moments,
    sample,
)
from .kernel import (
    BrownianConstant,
    FbmMovingAverage,
    FbmSottinen,
    Kernel,
    MixedBm,
    OrnsteinUhlenbeck,
    Rogers,
    Tabulated,
    kappa_eval,
    kernel_dt,
    kernel_eval,
    square_integral,
    total_variation,
)
from .lattice import (
    EXPONENTIAL,
    IDENTITY,
    GridSpec,
    MarketSpec,
    PriceMap,
    decompose,
    grid_times,
    price_path,
    simulate_noise_path,
    simulate_path,
    single_period_return,
)
from .lunch import (
    ArbitrageCertificate,
    Verdict,
    beta,
    check_theorem_L,
    esssup_xy,
    essinf_z,
    expected_return_on_event,
    flvr_scan,
    gamma,
    integral_criterion,
    lambda_bar,
    min_arbitrage_steps_fbm,
    search_arbitrage,
    symmetric_criterion,
    transaction_cost_bound,
)
from .oracle import brute_force_oracle, full_model_outcomes
from .convergence import convergence_table, covariance_discrete, covariance_limit, mc_moment_check
