"""Exception types raised across the package."""


class QsotError(Exception):
    """Base class for all domain errors."""


class NotHermitian(QsotError, ValueError):
    pass


class NotPSD(QsotError, ValueError):
    pass


class NoConvergence(QsotError, RuntimeError):
    pass


class DimMismatch(QsotError, ValueError):
    pass


class ParamOutOfRange(QsotError, ValueError):
    pass


class NotUnitary(QsotError, ValueError):
    pass


class BadIndex(QsotError, IndexError):
    pass


class NotLightTouch(QsotError, ValueError):
    pass


class RankDeficientPrediction(QsotError, ValueError):
    """The predicted state E(rho) is too close to singular for the Bayes formula."""


class NotInvertible(QsotError, ValueError):
    """The process has no completely positive Bayesian inverse."""
