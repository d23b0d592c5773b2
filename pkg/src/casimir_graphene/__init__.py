"""Casimir free energy, pressure and force gradient for graphene systems.

Graphene is described by the Dirac-model polarization tensor at nonzero
temperature; the interaction follows from the Lifshitz formula on the
imaginary frequency axis.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    CONSTANTS,
    CasimirError,
    ConfigError,
    DomainError,
    GrapheneParams,
    NumericalError,
    PhysicalConstants,
    ThermalState,
    UnsupportedConfigurationError,
    matsubara_frequency,
    q_factors,
)
from .lifshitz import (  # noqa: E402
    LifshitzResult,
    ThermalDecomposition,
    force_gradient_sphere_plate,
    free_energy,
    pressure,
    pressure_relative_difference,
    thermal_decomposition,
)
from .materials import PermittivityModel, eps_imag_axis, load_table  # noqa: E402
from .poltensor import (  # noqa: E402
    EvaluationMethod,
    PolTensorValue,
    phi,
    pol_tensor,
    pol_zero_temperature,
    small_parameter,
    thermal_correction,
    thermal_correction_asymptotic,
    y_l,
)
from .reflect import (  # noqa: E402
    IDEAL_METAL,
    VACUUM,
    LayerStack,
    ReflectionPair,
    fresnel_halfspace,
    graphene_asymptotic,
    graphene_free,
    stack_reflection,
)
from .response import ResponseSet, responses_from_tensor  # noqa: E402

__all__ = [
    "__version__",
    "CONSTANTS",
    "CasimirError",
    "ConfigError",
    "DomainError",
    "GrapheneParams",
    "NumericalError",
    "PhysicalConstants",
    "ThermalState",
    "UnsupportedConfigurationError",
    "matsubara_frequency",
    "q_factors",
    "LifshitzResult",
    "ThermalDecomposition",
    "force_gradient_sphere_plate",
    "free_energy",
    "pressure",
    "pressure_relative_difference",
    "thermal_decomposition",
    "PermittivityModel",
    "eps_imag_axis",
    "load_table",
    "EvaluationMethod",
    "PolTensorValue",
    "phi",
    "pol_tensor",
    "pol_zero_temperature",
    "small_parameter",
    "thermal_correction",
    "thermal_correction_asymptotic",
    "y_l",
    "IDEAL_METAL",
    "VACUUM",
    "LayerStack",
    "ReflectionPair",
    "fresnel_halfspace",
    "graphene_asymptotic",
    "graphene_free",
    "stack_reflection",
    "ResponseSet",
    "responses_from_tensor",
]
