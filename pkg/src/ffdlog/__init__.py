"""Discrete logarithms in small-characteristic fields at desk scale:
polynomial selection, relation generation, two factorbase solvers, and a
trap-salvaging descent, cross-checked against brute-force oracles."""

from .fq2 import Fq2, TowerParams, build_standalone, build_tower, get_field
from .selection import FieldSetup, is_good, search_good, smooth_split, unit_group_order
from .relations import enumerate_cosets, generate_all, try_relation, verify_row
from .intlinalg import (InvariantDecomposition, crt, gcd_split_reduce,
                        pohlig_hellman, snf, solve_full_rank_mod)
from .fbsolve import algII_solve, check_snf_condition, factorbase_logs, subgroup_dlog
from .descent import dlog, full_descent, make_context
from .bruteforce import brute_logs, group_structure, obstruction_probe, verify_pipeline

__all__ = [
    "Fq2", "TowerParams", "build_standalone", "build_tower", "get_field",
    "FieldSetup", "is_good", "search_good", "smooth_split", "unit_group_order",
    "enumerate_cosets", "generate_all", "try_relation", "verify_row",
    "InvariantDecomposition", "crt", "gcd_split_reduce", "pohlig_hellman",
    "snf", "solve_full_rank_mod",
    "algII_solve", "check_snf_condition", "factorbase_logs", "subgroup_dlog",
    "dlog", "full_descent", "make_context",
    "brute_logs", "group_structure", "obstruction_probe", "verify_pipeline",
]
