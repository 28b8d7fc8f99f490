"""Exception types raised across the toolkit."""


class TsmcmcError(Exception):
    """Base class for all toolkit errors."""


class DegenerateDimension(TsmcmcError):
    """A dimension has zero variance where positive variance is required."""


class SeriesTooShort(TsmcmcError):
    """The series has too few rows for the requested operation."""


class NonFiniteState(TsmcmcError):
    """Numerical integration produced a NaN or infinite state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class CsvError(TsmcmcError):
    """Base class for CSV ingestion failures carrying cell coordinates."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ParseError(CsvError):
    """A cell could not be parsed as a real number."""


class MissingColumn(TsmcmcError):
    """A declared column is absent from the file header."""


class NonFiniteValue(CsvError):
    """A cell parsed as NaN or infinity."""


class ZeroRange(TsmcmcError):
    """Every dimension of the difference sample is constant; no density can be fit."""


class DimensionMismatch(TsmcmcError):
    """Vector or matrix width disagrees with the fitted dimensionality."""


class InsufficientData(TsmcmcError):
    """Not enough samples to identify the requested model."""


class SingularDesign(TsmcmcError):
    """Regression design stayed degenerate even after ridge regularization."""


class ContextTooShort(TsmcmcError):
    """Conditioning context has fewer rows than the model order requires."""


class SpawnError(TsmcmcError):
    """The external generator process could not be started."""


class HandshakeMismatch(TsmcmcError):
    """External generator advertised different dims or context length."""


class Timeout(TsmcmcError):
    """The external generator did not answer within the configured deadline."""


class ProtocolError(TsmcmcError):
    """The external generator sent a malformed or unexpected message."""


class ChildExit(TsmcmcError):
    """The external generator process terminated unexpectedly."""


class ZeroVariance(TsmcmcError):
    """A metric requiring positive variance received a constant input."""


class TooFewPoints(TsmcmcError):
    """Too few observations for the requested number of lags."""


class TooFewWindows(TsmcmcError):
    """Too few windows to train and hold out a classifier split."""


class InvalidDistribution(TsmcmcError):
    """Probability vector or transition matrix violates its constraints."""


class EmptySubset(TsmcmcError):
    """The queried event subset contains no states."""


class ConfigInvalid(TsmcmcError):
    """Run configuration failed validation."""


class CorrectionStepError(TsmcmcError):
    """A proposal source or density failed during a correction step."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {cause}")
        self.step = step
