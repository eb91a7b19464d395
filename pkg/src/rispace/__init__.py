"""Numerical toolkit for rearrangement invariant function spaces on [0, 1].

Piecewise functions, decreasing rearrangements, Lorentz / Marcinkiewicz /
Orlicz / Nakano norms with convergence certificates, inclusion predicates and
explicit escape constructions.
"""

from .errors import (
    CatalogMiss,
    ConcavityViolation,
    DegenerateError,
    DescriptorError,
    DomainError,
    ExtractionFailure,
    OverlapError,
    PreconditionFailure,
    RispaceError,
)
from .funcrep import (
    MonotoneFunction,
    PiecewiseFunction,
    Segment,
    decreasing_rearrangement,
    disjoint_sum,
    distribution_function,
    evaluate,
    indicator,
    logpower_function,
    power_function,
    translate_dilate,
)
from .generators import (
    ExpConvex,
    ExponentFunction,
    PowLogConcave,
    PowLogConvex,
    ScaledConvex,
    TabulatedConcave,
    delta2_check,
    orlicz_indices,
)
from .norms import (
    WeightedSeq,
    lorentz_norm,
    luxemburg_norm,
    marcinkiewicz_norm,
    nakano_modular,
    nakano_norm,
    orlicz_modular,
    seq_modular,
    seq_nakano_norm,
)
from .quadrature import NormResult, Status

__version__ = "0.1.0"
