"""
Utility functions module.
"""

from bdslab.utils.logging import setup_logging

__all__ = ["setup_logging"]
