"""Partition functions and thermal functions of relativistic bound-state spectra."""
from .errors import (
    NonConvergentError,
    NumericalFailure,
    ParameterDomainError,
    SingularityError,
    TruncationError,
)
from .partition import (
    EngineKind,
    EngineSpec,
    PartitionResult,
    Shift,
    Variant,
    direct_sum,
    euler_maclaurin_sum,
    kg_closed_partition,
    mellin_residue_partition,
    partition_function,
    tail_integral,
)
from .spectra import (
    DiracInverseLinear,
    DiracStrongField,
    KgLinear,
    reduced_energy,
    validate_model,
)
from .thermo import ThermoPoint, dirac_closed_thermo, engine_thermo, kg_closed_thermo

__version__ = "0.1.0"
