from .p1 import P1List
from .space import (
    ManinSymbolSpace,
    SymbolTable,
    RelationReport,
    build_space,
    modsym,
    symbol_table,
    verify_relations,
    atkin_lehner_signs,
    partial_sum_profile,
)

__all__ = [
    "P1List",
    "ManinSymbolSpace",
    "SymbolTable",
    "RelationReport",
    "build_space",
    "modsym",
    "symbol_table",
    "verify_relations",
    "atkin_lehner_signs",
    "partial_sum_profile",
]
