"""Named errors raised across the package.

Every error subclasses ValueError so callers that only care about
"bad input" can keep catching ValueError.
"""


class ChampernowneError(ValueError):
    pass


# ---------- digit systems ----------
class SumNotOne(ChampernowneError):
    pass


class TooFewDigits(ChampernowneError):
    pass


class NonPositiveMeasure(ChampernowneError):
    pass


class DigitOutOfRange(ChampernowneError):
    pass


class NegativeCount(ChampernowneError):
    pass


class ConfigError(ChampernowneError):
    pass


# ---------- thresholds / budgets ----------
class EpsilonOutOfRange(ChampernowneError):
    pass


class BudgetExceeded(ChampernowneError):
    pass


# ---------- hyperplane / Laplace ----------
class OffSegment(ChampernowneError):
    pass


class BoxOutsideDomain(ChampernowneError):
    pass


class DegenerateDirection(ChampernowneError):
    pass
