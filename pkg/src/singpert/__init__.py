"""Distributional solutions of nilpotent singular linear systems and numerical
checks of their singular-perturbation limits."""

from .distributions import GeneralizedFunction, pair
from .errors import InputError, NumericError, SingpertError
from .harness import StudyConfig, localization_check, run_study, uniqueness_study
from .pencil import Pencil, solve_descriptor, weierstrass_reduce
from .perturbed import PerturbationFamily, PerturbedSolution, layer_integral_estimate, solve_perturbed
from .quadrature import QuadratureSpec
from .signal_lang import hermite_extend, parse_signal
from .singular import SolveRequest, solve_singular
from .test_functions import TestFunction, standard_bank

__all__ = [
    "GeneralizedFunction",
    "InputError",
    "NumericError",
    "Pencil",
    "PerturbationFamily",
    "PerturbedSolution",
    "QuadratureSpec",
    "SingpertError",
    "SolveRequest",
    "StudyConfig",
    "TestFunction",
    "hermite_extend",
    "layer_integral_estimate",
    "localization_check",
    "pair",
    "parse_signal",
    "run_study",
    "solve_descriptor",
    "solve_perturbed",
    "solve_singular",
    "standard_bank",
    "uniqueness_study",
    "weierstrass_reduce",
]
