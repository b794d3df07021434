"""Spin-bath decoherence: decoherence-factor engine, exact recurrence analysis and
a brute-force full-state oracle."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    EnvironmentParticle,
    EnvironmentRealization,
    ModelError,
    ObservableSpec,
    SystemCoefficients,
    TimeGrid,
    TimeSeries,
    derive_beta_sq,
)
from .engine import (  # noqa: E402
    abs_r2_series,
    decoherence_factor,
    expectation_relevant,
    factor_f,
    factor_r,
)
from .recurrence import (  # noqa: E402
    RationalCoupling,
    RecurrenceReport,
    bound_growth_estimate,
    classify_case,
    exact_recurrence,
    per_particle_recurrence,
    rationalize,
)
from .sampling import CouplingDistribution, EnvironmentSpec, Group, preset, sample_environment  # noqa: E402

__all__ = [
    "__version__",
    "EnvironmentParticle",
    "EnvironmentRealization",
    "ModelError",
    "ObservableSpec",
    "SystemCoefficients",
    "TimeGrid",
    "TimeSeries",
    "derive_beta_sq",
    "abs_r2_series",
    "decoherence_factor",
    "expectation_relevant",
    "factor_f",
    "factor_r",
    "RationalCoupling",
    "RecurrenceReport",
    "bound_growth_estimate",
    "classify_case",
    "exact_recurrence",
    "per_particle_recurrence",
    "rationalize",
    "CouplingDistribution",
    "EnvironmentSpec",
    "Group",
    "preset",
    "sample_environment",
]
