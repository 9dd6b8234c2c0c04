"""Entropy, Lyapunov exponents and horseshoes of symplectic maps."""

from .cocycle import (
    EigenFrame,
    TransitionFamily,
    domination_test,
    has_complex_rank,
    is_diagonalizable_real_simple,
    mixing_word,
    transition_distance,
    transposition_transition,
    verify_mixing,
)
from .core import (
    Classification,
    LyapunovVector,
    Spectrum,
    Word,
    chi_min_plus,
    classify_periodic,
    finite_time_lyapunov,
    is_symplectic,
    lyapunov_vector_periodic,
    spectrum,
    standard_form,
    sum_positive_exponents,
    symplectic_residual,
)
from .entropy import (
    EntropyEstimate,
    SeparatedSetEntropy,
    TransitionMatrixModel,
    estimate_entropy,
    horseshoe_lower_bound,
    ruelle_consistency,
    separated_count,
    shift_entropy,
)
from .errors import (
    BudgetError,
    CertificateRefused,
    ConfigError,
    ConstructionError,
    DimensionError,
    DomainError,
    NumericError,
    SymplecticEntropyError,
)
from .models import (
    MapModel,
    build_model,
    cat_map,
    coupled_standard_maps,
    product_cat_map,
    snake_composed,
    standard_map,
    torus_automorphism,
)
from .periodic import PeriodicOrbit, PeriodicOrbitScanner, estimate_S, find_periodic_orbits
from .snake import (
    HorseshoeCertificate,
    SnakeShear,
    afirma_bounds,
    build_horseshoe,
    build_tangency_model,
    certify_against_estimator,
    choose_t,
    restricted_entropy,
)

__version__ = "0.1.0"
