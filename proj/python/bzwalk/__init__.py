"""Discrete-time quantum walks of a spinor condensate in quasimomentum space."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
