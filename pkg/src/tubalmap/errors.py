"""Exception types shared across the package."""


class TubalmapError(ValueError):
    """Base class for all tubalmap errors."""


class ShapeMismatch(TubalmapError):
    """Operands have incompatible tensor or mask dimensions."""


class DimensionMismatch(TubalmapError):
    """A query or vector has the wrong length for the map it targets."""


class NonRealResult(TubalmapError):
    """An inverse spectral transform left a non-negligible imaginary part."""


class RankTooLarge(TubalmapError):
    """Requested tubal rank exceeds min(n1, n2)."""


class KTooLarge(TubalmapError):
    """Requested neighbor count exceeds the number of reference points."""


class EmptyComplement(TubalmapError):
    """The sampling mask covers the whole grid, leaving nothing to evaluate."""


class ZeroDenominator(TubalmapError):
    """The reference tensor is zero on the evaluation set."""


class EmptyInput(TubalmapError):
    """An operation that needs at least one element got none."""


class BadFile(TubalmapError):
    """A tensor or mask file has a malformed header or truncated payload."""
