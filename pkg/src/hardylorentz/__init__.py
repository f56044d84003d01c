"""Lorentz and Hardy-Lorentz spaces on step signals: quasinorms, maximal
functions, atomic decompositions, real interpolation and Calderon-Zygmund
operators, with corpus-scale numerical checks."""

from .lorentz import *  # noqa: F401,F403
from .sequences import *  # noqa: F401,F403
from .maximal import *  # noqa: F401,F403
from .atomic import *  # noqa: F401,F403
from .interpolation import *  # noqa: F401,F403
from .cz import *  # noqa: F401,F403
from .corpus import *  # noqa: F401,F403
from .config import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403
from .reports import Report

__version__ = "0.1.0"
