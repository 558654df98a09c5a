"""
Command-line front end.
"""

from bdslab.cli.parser import build_parser, parse_args

__all__ = ["build_parser", "parse_args"]
