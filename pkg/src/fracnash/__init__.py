"""Nash inequalities for fractional powers of non-negative self-adjoint operators.

Two independent routes to the fractional semigroup e^{-t A^alpha}
(spectral calculus and alpha-stable subordination), rate functions built
from decay profiles, Nash/log-Sobolev certificates over test-function
ensembles, and the critical-exponent phenomenology on the truncated
infinite torus and the Ornstein-Uhlenbeck model.
"""

__version__ = "0.1.0"

from .spectral import (
    MeasureSpace,
    ScalarFunction,
    SpectralOperator,
    apply_function,
    eigendecompose,
    fractional_semigroup,
    heat_semigroup,
    norm_1_to_inf,
    quadratic_form,
)
from .generators import GeneratorSpec, build, dirichlet_energy
from .subordinator import (
    QuadratureError,
    StableSubordinator,
    laplace_check,
    poisson_semigroup,
    stable_density,
    stable_log_density,
    subordinate_semigroup,
)
from .rates import (
    DecayProfile,
    NonIntegrableRateError,
    RateFunction,
    UltracontractivityBound,
    check_condition_D,
    dominates,
    measured_profile,
    power_profile,
    profile_equivalence,
    rate_from_profile,
    rate_function_from_profile,
    rate_log,
    rate_power,
    rate_stretched,
    smooth_regular_variation,
    stretched_profile,
    theta_from_profile,
    ultracontractivity_from_nash,
)
from .certify import (
    NashCertificate,
    bernstein_explore,
    halfpower_integral_check,
    halfpower_transfer_check,
    jensen_transfer_check,
    nash_ratio,
    rho_shift,
)
from .ensembles import standard_ensemble
from .entropy import (
    EntropyReport,
    entropy,
    logsob_check,
    logsob_sweep,
    truncate,
    truncation_energy_check,
    truncation_l1_l2_check,
)
from .torus import (
    SubordinatedDensity,
    TorusSpectrum,
    TruncationError,
    counting,
    decay_exponent_fit,
    log_density_at_e,
    small_time_exponent_fit,
    subordinated_log_density,
    theta,
    threshold_time,
)
from .ou import (
    HermiteModel,
    HermiteTensorModel,
    hypercontractivity_probe,
    mixed_norm,
    ou_log_nash_check,
    ou_lsi_check,
)
