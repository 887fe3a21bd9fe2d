"""Numerical laboratory for regularized stochastic p-Laplace / TV-flow SPDEs
with gradient transport noise on the flat torus."""

from ._svitorus import *  # noqa: F401,F403
from ._svitorus import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
