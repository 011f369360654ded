"""Entanglement (linear) entropy growth and Kolmogorov-Sinai entropy in kicked coupled tops."""

from ._backend import BACKEND
from .spin import (
    PureState,
    SpinOperators,
    build_spin_operators,
    chart_to_rotation_angles,
    coherent_state_at,
    product_coherent_state,
    product_coherent_state_at,
    spin_coherent_state,
)
from .quantum import (
    EntropySeries,
    FloquetOperator,
    averaged_quantum_entropy,
    build_floquet,
    evolve,
    linear_entropy,
    reduced_density,
)
from .classical import (
    CanonicalPoint,
    ClassicalState,
    bloch_vector,
    kick_map,
    poincare_section,
    random_centers,
    to_canonical,
    from_canonical,
)
from .tangent import (
    CovarianceBlocks,
    LyapunovSpectrum,
    TangentFrame,
    accumulate_stability,
    covariance_blocks,
    gaussian_entropy,
    jacobian_one_step,
    ks_growth_prediction,
    lyapunov_spectrum,
)
from .ensemble import (
    GaussianEnsembleSpec,
    MarginalHistogram,
    averaged_classical_entropy,
    classical_linear_entropy,
    evolve_ensemble,
    marginal_histogram,
    sample_ensemble,
)

__version__ = "0.1.0"
