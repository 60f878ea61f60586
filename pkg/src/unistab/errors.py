"""Exception hierarchy. Every error carries a short ``kind`` tag used by the CLI."""


class UnistabError(Exception):
    kind = "Error"


class InputError(UnistabError, ValueError):
    kind = "InputError"


class DimensionMismatch(InputError):
    kind = "DimensionMismatch"


class SchemaError(InputError):
    kind = "SchemaError"


class NonSquareMatrix(InputError):
    kind = "NonSquareMatrix"


class NonUnitaryGenerator(InputError):
    kind = "NonUnitaryGenerator"


class ZeroVector(InputError):
    kind = "ZeroVector"


class OrderExceeded(UnistabError):
    kind = "OrderExceeded"


class InconsistentForm(UnistabError):
    kind = "InconsistentForm"


class NotSpanning(UnistabError):
    kind = "NotSpanning"


class NotIsometric(UnistabError):
    kind = "NotIsometric"


class TooManyPoints(UnistabError):
    kind = "TooManyPoints"


class AmbiguousIdentification(UnistabError):
    """Two values fell inside the margin band: too far apart to merge, too close to trust."""

    kind = "AmbiguousIdentification"
