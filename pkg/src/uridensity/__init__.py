"""Random URI-sets, Benford statistics and the densities they induce."""

from .densities import (
    DensityEstimate,
    DensityKind,
    FlehingerTable,
    flehinger_table,
    log_partial,
    natural_partial,
    uri_density_mc,
    uri_log_gap,
)
from .errors import (
    DependentBasesError,
    ElementSizeError,
    MemoryBudgetError,
    ParameterError,
    UriDensityError,
)
from .mantissa import ExactMantissa, benford_cdf, exact_mantissa, mantissa_below, real_mantissa
from .predicates import (
    SetPredicate,
    all_integers,
    finite_set,
    leading_digit,
    mantissa_below_t,
    mantissa_in,
    multiples_of,
    parse_predicate,
    residue_class,
)
from .rng import RngStream
from .sampler import FiniteUriSet, UriStream, bernoulli_sample, compose_order2, next_gap, stream_next

__version__ = "0.1.0"

__all__ = [
    "DensityEstimate",
    "DensityKind",
    "DependentBasesError",
    "ElementSizeError",
    "ExactMantissa",
    "FiniteUriSet",
    "FlehingerTable",
    "MemoryBudgetError",
    "ParameterError",
    "RngStream",
    "SetPredicate",
    "UriDensityError",
    "UriStream",
    "all_integers",
    "benford_cdf",
    "bernoulli_sample",
    "compose_order2",
    "exact_mantissa",
    "finite_set",
    "flehinger_table",
    "leading_digit",
    "log_partial",
    "mantissa_below",
    "mantissa_below_t",
    "mantissa_in",
    "multiples_of",
    "natural_partial",
    "next_gap",
    "parse_predicate",
    "real_mantissa",
    "residue_class",
    "stream_next",
    "uri_density_mc",
    "uri_log_gap",
]
