"""Exception hierarchy shared by all trendshape modules."""


class TrendshapeError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(TrendshapeError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyDataset(TrendshapeError):
    """No usable series in the input."""


class AlignmentError(TrendshapeError):
    """Time axes cannot be reconciled onto a common weekly grid."""


class DuplicateKeyword(TrendshapeError):
    """The same keyword label appears more than once."""


class InvalidSpec(TrendshapeError):
    """Synthetic-series specification violates its constraints."""


class EmptyInput(TrendshapeError):
    """An operation received an empty series or point cloud."""


class WindowTooLarge(TrendshapeError):
    """Requested window exceeds the series length."""


class DegenerateSample(TrendshapeError):
    """Sample has zero variance where a scale estimate is required."""


class NumericalError(TrendshapeError):
    """Internal numerical failure (singular regression, divergent solve)."""


class InvalidAlphabet(TrendshapeError):
    """Alphabet size outside the supported [2, 26] range."""


class InvalidSegmentation(TrendshapeError):
    """More segments requested than there are samples."""


class EmbeddingError(TrendshapeError):
    """Series too short for the requested delay embedding."""


class InvalidFiltration(TrendshapeError):
    """Filtration violates the face-before-simplex ordering contract."""


class InvalidK(TrendshapeError):
    """Cluster count outside [1, n_rows]."""


class UndefinedScore(TrendshapeError):
    """Evaluation metric undefined for this labelling (degenerate geometry)."""


class ConfigError(TrendshapeError):
    """Pipeline configuration value outside the range its stage accepts."""
