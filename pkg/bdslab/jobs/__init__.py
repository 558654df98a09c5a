"""
Batch jobs: sweeps, the reference RER table and report rendering.
"""

from bdslab.jobs.sweep import monotonicity_report, participation_curve, run_sweep
from bdslab.jobs.reference import CASES, reproduce_reference_table

__all__ = [
    "CASES",
    "monotonicity_report",
    "participation_curve",
    "reproduce_reference_table",
    "run_sweep",
]
