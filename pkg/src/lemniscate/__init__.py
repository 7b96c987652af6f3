"""Fingerprints of polynomial and rational lemniscates.

A proper lemniscate {|P| = 1} is a smooth Jordan curve whose fingerprint
k = φ₊⁻¹∘φ₋ is an n-th root of a Blaschke product.  This package traces
lemniscates, computes both Riemann maps numerically, extracts the Blaschke
data and the fingerprint, and runs the construction backwards.
"""

from .algebra import BlaschkeProduct, ComplexPolynomial, RationalMap, critical_points, critical_values, roots
from .circle import (
    CircleDiffeo,
    CoverLift,
    DiskAutomorphism,
    align_mod_automorphism,
    lift,
    nth_root,
    solve_conjugacy,
)
from .conformal import RiemannMap, exterior_map, exterior_root_branch, interior_map, map_invert
from .curves import JordanCurve, LevelSetReport, hausdorff_distance, is_proper, trace_level_set
from .engine import FingerprintReport, fingerprint_polynomial, fingerprint_rational, verify_uniqueness
from .errors import *  # noqa: F401,F403
from .inverse import ClassCount, HomotopyState, count_classes, polynomial_from_blaschke, rational_from_pair

__version__ = "0.1.0"
