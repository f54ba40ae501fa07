"""Python bindings for the sortwave solvers."""

from ._sortwave import *  # noqa: F401,F403
from ._sortwave import SortwaveError, __doc__  # noqa: F401
