"""Exception hierarchy.

Every error carries a short machine-readable ``category`` so the CLI can report
it without string matching.
"""


class LandauError(Exception):
    category = "Error"


class DivisionByZero(LandauError, ZeroDivisionError):
    category = "DivisionByZero"


class NegativeRadicand(LandauError, ValueError):
    category = "NegativeRadicand"


class InvalidSymbol(LandauError, ValueError):
    category = "InvalidSymbol"


class CoefficientOutOfBounds(LandauError, ValueError):
    category = "CoefficientOutOfBounds"


class RadiusOutOfRange(LandauError, ValueError):
    category = "RadiusOutOfRange"


class PointOutsideDisc(LandauError, ValueError):
    category = "PointOutsideDisc"


class ToleranceTooTight(LandauError):
    category = "ToleranceTooTight"


class ResourceCap(LandauError):
    category = "ResourceCap"


class EmptyMask(LandauError, ValueError):
    category = "EmptyMask"


class BudgetExhausted(LandauError):
    category = "BudgetExhausted"


class DegenerateWindow(LandauError, ValueError):
    category = "DegenerateWindow"


class BoundsAuditFailed(LandauError):
    category = "BoundsAuditFailed"


class FormatError(LandauError, ValueError):
    category = "FormatError"
