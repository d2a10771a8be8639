"""Simulator for decentralized hexapod gait control over a time-synchronized network."""

from ._gaitsync import *  # noqa: F401,F403
from ._gaitsync import __doc__  # noqa: F401
