"""
bdslab
Desk-scale laboratory for the economics of block double-submission (BDS)
against block withholding (BWH) mining pools: closed-form revenue, pricing
and game analysis plus a Monte Carlo mining-pool simulator.
"""

__version__ = "1.0.0"
