"""Certified computations for the Thue-Morse trace map.

Ball arithmetic throughout; every check returns a tri-state verdict.
"""

__version__ = "0.1.0"

from .ball import Verdict, ball, precision
from .cantor import (base_point, build_tree, dim_lower_bound, initial_germ,
                     key_spacing_check, ratio_report)
from .dynamics import TraceSource, trace_eval, trace_poly_expand
from .germs import certify_germ, check_regularity, constants_table, convergence_report
from .roots import max_zero, min_zero, sigma_sample, zero_gap_check

__all__ = [
    "Verdict", "ball", "precision",
    "base_point", "build_tree", "dim_lower_bound", "initial_germ",
    "key_spacing_check", "ratio_report",
    "TraceSource", "trace_eval", "trace_poly_expand",
    "certify_germ", "check_regularity", "constants_table", "convergence_report",
    "max_zero", "min_zero", "sigma_sample", "zero_gap_check",
]
