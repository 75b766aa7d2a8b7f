"""Needlet two-sample statistics for Poisson processes on the torus."""

from ._core import *  # noqa: F401,F403
from ._core import Condition, Error, SumPath

__all__ = [name for name in dir() if not name.startswith("_")]
