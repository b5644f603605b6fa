"""Finite fragments of the quantum harmonic oscillator structure QHO_N and
the definability calculus of its general core formulas."""

from .core import (
    GeneralCoreFormula,
    core_formula,
    delta_action,
    evaluate,
    invariant_closure,
    is_invariant,
    merge,
    negation_normal_form,
    project,
    substitute_params,
)
from .field import Scalar, Tower, format_scalar, parse_scalar
from .formula import parse_formula, print_formula
from .isomorphism import extend_isomorphism, verify_isomorphism
from .poly import Poly, PolySystem, parse_poly
from .predicate import Constructible, parse_predicate
from .structure import BundleVector, Fragment, build_fragment, check_axioms, spectrum
from .topology import chain_stabilizes, dimension, universe

__version__ = "0.1.0"
