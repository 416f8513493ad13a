"""Desk-scale laboratory for quantum versus classical exact and PAC learning."""
from qlearn.concepts import (
    CapExceeded,
    Concept,
    ConceptClass,
    Distribution,
    all_functions,
    conjunctions,
    from_tables,
    gamma_hat,
    parity_class,
    point_functions_plus_zero,
    vc_dimension,
)

__all__ = [
    "CapExceeded",
    "Concept",
    "ConceptClass",
    "Distribution",
    "all_functions",
    "conjunctions",
    "from_tables",
    "gamma_hat",
    "parity_class",
    "point_functions_plus_zero",
    "vc_dimension",
]

__version__ = "0.1.0"
