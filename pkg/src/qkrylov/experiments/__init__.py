"""Reproduction harness for the Heisenberg noise sweep."""

from .config import EpsilonRule, SweepConfig
from .output import emit_outputs
from .sweep import ConvergedStats, SweepRow, converged_errors, fit_monomial, prepare_model, run_sweep, summarize
