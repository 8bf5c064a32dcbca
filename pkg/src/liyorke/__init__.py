"""Combinatorial and numerical machinery for Li-Yorke pair analysis of
unimodal interval maps: cutting-time algebra, enumeration-scale odometers,
Hofbauer-tower lifting with circle factors, induced-walk drift estimation,
and Monte-Carlo classification of pairs as distal, asymptotic, or Li-Yorke.
"""

from . import algebra, dynamics, enumscale, kneading, pairlab, tower  # noqa: F401
from .errors import (  # noqa: F401
    AdmissibilityError,
    DegenerateOrbitError,
    DepthError,
    InputError,
    LiYorkeError,
    OdometerOverflowError,
    PrecisionError,
    TuningError,
)

__version__ = "0.1.0"
