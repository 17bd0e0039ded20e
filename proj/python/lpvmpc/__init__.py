"""LPV-MPC trajectory tracking: dynamic bicycle model, condensed MPC, dense
QP solver, closed-loop simulator, and tracking metrics."""

from lpvmpc._core import *  # noqa: F401,F403
from lpvmpc._core import __doc__ as _core_doc  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
