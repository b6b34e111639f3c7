"""Approximate LUT-based arithmetic operators.

Generate operator netlists, characterize LUT-removal configurations, fit
surrogate models, solve MaP problems and run Pareto searches.
"""

from ._axomap import *  # noqa: F401,F403
from ._axomap import __doc__  # noqa: F401

__version__ = "0.1.0"
