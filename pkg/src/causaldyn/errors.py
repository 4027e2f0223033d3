"""Exception types shared across the package."""


class CausalDynError(Exception):
    """Base class for all package-specific errors."""


class RetryExhausted(CausalDynError):
    """A resampling loop hit its retry budget without producing a valid result."""


class InvalidLag(CausalDynError, ValueError):
    """A lag parameter was outside its valid range."""


class Diverged(CausalDynError, ArithmeticError):
    """An integrated trajectory left the finite / bounded regime."""


class DegenerateSeries(CausalDynError, ValueError):
    """A time series had zero variance where standardization was requested."""


class DegenerateTruth(CausalDynError, ValueError):
    """Ground truth is all-positive or all-negative over the scored pair universe."""


class AllDegenerate(DegenerateTruth):
    """Every trajectory of a prediction batch hit DegenerateTruth."""


class ConstantSeries(CausalDynError, ValueError):
    """An input column to a baseline scorer has zero variance."""


class SingularDesign(CausalDynError, ValueError):
    """Least-squares normal equations are singular (unregularized fit)."""


class FormatError(CausalDynError, ValueError):
    """Base class for on-disk format violations."""


class BadMagic(FormatError):
    """Tensor file does not start with the expected magic bytes."""


class VersionMismatch(FormatError):
    """Tensor file declares an unsupported format version."""


class ShapeMismatch(FormatError):
    """Declared tensor shape is inconsistent with the record metadata."""


class CorruptPayload(FormatError):
    """Tensor payload length does not match the declared shape."""


class RefusesOverwrite(CausalDynError, FileExistsError):
    """Target dataset directory already exists and force was not given."""
