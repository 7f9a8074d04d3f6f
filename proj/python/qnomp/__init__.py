"""Python bindings for the qnomp channel estimation library."""

from ._qnomp import *  # noqa: F401,F403
from ._qnomp import __doc__  # noqa: F401
