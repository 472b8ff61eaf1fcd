"""Invariant subspaces and closed-form delay solutions of coupled
time-fractional diffusion-reaction systems."""

from fracdr.closedform import (
    Example1Params,
    Example3Params,
    KernelSeries,
    Pattern,
    SolutionField,
    eval_kernel,
    solve_example1,
    solve_example3,
)
from fracdr.data import HistorySpec, InitialData
from fracdr.errors import AccuracyError, DomainError, NotInvariantError, SchemaError
from fracdr.fracops import FracKind, FracOrder, SampledTrajectory, fractional_derivative
from fracdr.mlf import MlfParams, ml, mittag_leffler_3p
from fracdr.oracle import FddeProblem, compare, pde_residual, solve_classical, solve_fdde
from fracdr.subspace import DROperatorSpec, ReducedSystem, SpacePair, check_invariance, reduce

__all__ = [
    "AccuracyError", "DROperatorSpec", "DomainError", "Example1Params", "Example3Params",
    "FddeProblem", "FracKind", "FracOrder", "HistorySpec", "InitialData", "KernelSeries",
    "MlfParams", "NotInvariantError", "Pattern", "ReducedSystem", "SampledTrajectory",
    "SchemaError", "SolutionField", "SpacePair", "check_invariance", "compare", "eval_kernel",
    "fractional_derivative", "mittag_leffler_3p", "ml", "pde_residual", "reduce",
    "solve_classical", "solve_example1", "solve_example3", "solve_fdde",
]
