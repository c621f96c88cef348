"""Sweeps, figure data and the command-line interface."""

from .figures import FIGURES, emit_figure_data
from .sweep import SweepPlan, SweepRecord, run_sweep

__all__ = ["FIGURES", "SweepPlan", "SweepRecord", "emit_figure_data", "run_sweep"]
