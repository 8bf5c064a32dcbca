"""Exception types shared across the toolkit.

The CLI maps InputError (and plain ValueError) to exit status 2 and
PrecisionError to exit status 3.
"""


class LiYorkeError(Exception):
    """Base class for all toolkit errors."""


class InputError(LiYorkeError, ValueError):
    """Invalid argument, inadmissible data, or an out-of-range request."""


class PrecisionError(LiYorkeError, RuntimeError):
    """The requested computation cannot be certified at the working precision.

    Raised on ambiguous boundary hits, failed doubled-precision consistency
    checks, and root enclosures wider than the requested tolerance.  Never
    silently absorbed.
    """


class AdmissibilityError(InputError):
    """A 0/1 sequence violates the enumeration-scale admissibility rule."""


class OdometerOverflowError(InputError):
    """Adding one would carry past the computed depth of the scale."""


class DepthError(InputError):
    """An index lies outside the computed range of a kneading structure."""


class DegenerateOrbitError(InputError):
    """The critical orbit reached a fixed point; no further cutting times exist."""


class TuningError(LiYorkeError):
    """Parameter tuning failed (target not realized, or bracket exhausted)."""
