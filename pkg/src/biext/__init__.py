"""Periods of real biextensions built from truncated path torsors on punctured curves."""
from .chen import IteratedIntegralExpr, Path, homotopy_defect, is_relatively_closed, iterated_integral
from .greens import GreenFunction, green_oracle, solve_green
from .hodge import PeriodValue, RealBiextension, RealHodgeStructure, biextension_period, split_biextension, twist
from .periods import GradedFiber, graded_fiber, nondegeneracy_rank, psi, psi_p, zero_locus_scan
from .pushforward import MonodromyHodgeMap, pushforward_period, splitting_locus_scan
from .series import TruncatedSeries, extract_dependence, restriction_vanishing
from .surfaces import Surface, k_space_basis, third_kind_basis

__version__ = "0.1.0"

__all__ = [
    "GradedFiber", "GreenFunction", "IteratedIntegralExpr", "MonodromyHodgeMap", "Path", "PeriodValue",
    "RealBiextension", "RealHodgeStructure", "Surface", "TruncatedSeries", "biextension_period",
    "extract_dependence", "graded_fiber", "green_oracle", "homotopy_defect", "is_relatively_closed",
    "iterated_integral", "k_space_basis", "nondegeneracy_rank", "psi", "psi_p", "pushforward_period",
    "restriction_vanishing", "solve_green", "split_biextension", "splitting_locus_scan",
    "third_kind_basis", "twist", "zero_locus_scan",
]
