"""Stable-throughput regions for energy-harvesting cooperative cognitive radio."""

from ._ehcr import *  # noqa: F401,F403
from ._ehcr import __version__  # noqa: F401
