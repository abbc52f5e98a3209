"""Numerical laboratory for composite hypothesis testing on finite alphabets.

Divergences, types, hypothesis families and exact Stein-rate computations
at small block lengths, plus a scenario runner producing CSV/JSON reports.
"""

__version__ = "0.1.0"

from .config import log_base, set_log_base, unit_name, use_log_base
from .errors import CapacityError, ConfigError, DomainError, SteinLabError
from .alphabet import (Alphabet, Distribution, JointDistribution, StochasticChannel,
                       depolarizing, marginalize, permute, tensor_power, tensor_product)
from .typeclasses import (StringSet, Type, enumerate_types, hamming_ball, number_of_types,
                          type_class_size, type_of_string)
from .divergences import (DivergenceReport, Polytope, d_hyp, d_max, d_max_smooth, f_aux, kl,
                          min_kl_between_polytopes, min_kl_to_polytope)
from .families import FamilySpec, GeneratedSet, axiom_probe, realize
from .stein import beta_eps, converse_regularized, stein_sequence

__all__ = [
    "__version__", "log_base", "set_log_base", "unit_name", "use_log_base",
    "CapacityError", "ConfigError", "DomainError", "SteinLabError",
    "Alphabet", "Distribution", "JointDistribution", "StochasticChannel", "depolarizing",
    "marginalize", "permute", "tensor_power", "tensor_product",
    "StringSet", "Type", "enumerate_types", "hamming_ball", "number_of_types",
    "type_class_size", "type_of_string",
    "DivergenceReport", "Polytope", "d_hyp", "d_max", "d_max_smooth", "f_aux", "kl",
    "min_kl_between_polytopes", "min_kl_to_polytope",
    "FamilySpec", "GeneratedSet", "axiom_probe", "realize",
    "beta_eps", "converse_regularized", "stein_sequence",
]
