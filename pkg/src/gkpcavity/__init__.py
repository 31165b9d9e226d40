"""Grid-state generation with a lossy cavity QED system: simulation,
breeding, effective-squeezing metrics and parameter optimization."""

from gkpcavity.fock import (
    DensityMatrix,
    FockVector,
    annihilation,
    coherent_state,
    creation,
    default_dim,
    displacement_operator,
    expectation,
    fidelity_to_pure,
    number_operator,
    quadrature_distribution,
    squeezed_vacuum,
    wigner,
)
from gkpcavity.metrics import (
    PeakWeights,
    SqueezingReport,
    analytic_Dp,
    binomial_weights,
    effective_squeezing,
    effective_squeezing_from_expectations,
    equal_weights,
    ideal_gkp_state,
    optimal_two_level,
    two_level_weights,
)
from gkpcavity.channel import (
    AtomConfig,
    CavityParams,
    KrausTruncation,
    ReflectionCoefficients,
    apply_reflection,
    field_kraus_element,
    reflection_coefficients,
)
from gkpcavity.protocol import (
    ProtocolConfig,
    ProtocolResult,
    run_protocol,
    squeeze_from_vacuum,
    two_level_weighting_config,
)
from gkpcavity.breeding import (
    BreedConfig,
    PWavefunction,
    breed,
    breed_expectations,
    fock_to_pkernel,
    make_squeezed_cat,
)
from gkpcavity.optimize import SearchSpace, SweepResult, optimize_point, sweep

__version__ = "0.1.0"

__all__ = [
    "AtomConfig",
    "BreedConfig",
    "CavityParams",
    "DensityMatrix",
    "FockVector",
    "KrausTruncation",
    "PWavefunction",
    "PeakWeights",
    "ProtocolConfig",
    "ProtocolResult",
    "ReflectionCoefficients",
    "SearchSpace",
    "SqueezingReport",
    "SweepResult",
    "analytic_Dp",
    "annihilation",
    "apply_reflection",
    "binomial_weights",
    "breed",
    "breed_expectations",
    "coherent_state",
    "creation",
    "default_dim",
    "displacement_operator",
    "effective_squeezing",
    "effective_squeezing_from_expectations",
    "equal_weights",
    "expectation",
    "fidelity_to_pure",
    "field_kraus_element",
    "fock_to_pkernel",
    "ideal_gkp_state",
    "make_squeezed_cat",
    "number_operator",
    "optimal_two_level",
    "optimize_point",
    "quadrature_distribution",
    "reflection_coefficients",
    "run_protocol",
    "squeeze_from_vacuum",
    "squeezed_vacuum",
    "sweep",
    "two_level_weighting_config",
    "two_level_weights",
    "wigner",
]
