"""Exception types shared across the package.

Everything a caller can fix by supplying different input derives from
``DataError`` so the command line can map it to exit status 1.
"""


class DataError(ValueError):
    """Input data violates a documented precondition."""


class ShapeMismatch(DataError):
    pass


class NoScoredPixels(DataError):
    pass


class SlipUndefined(DataError):
    """Wheel circumferential speed too small to define a slip ratio."""


class WheelBuried(DataError):
    """Sinkage at or beyond the wheel radius."""


class TrainingDiverged(DataError):
    pass


class DegenerateComponent(DataError):
    """A zero-variance mixture component carries positive weight in a density."""


class CodecError(DataError):
    pass


class PayloadLengthMismatch(CodecError):
    pass


class UnknownDtype(CodecError):
    pass


class TruncatedFile(CodecError):
    pass


class MissingColumn(CodecError):
    pass


class UnitMismatch(DataError):
    pass
