"""Exception hierarchy for the neuralgas package."""


class NeuralGasError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(NeuralGasError, ValueError):
    """A scalar parameter (neighborhood range, epoch index, ...) is out of range."""


class InvalidInputError(NeuralGasError, ValueError):
    """Input data is malformed (dimension mismatch, empty sequence, ...)."""


class InvalidConfigurationError(NeuralGasError, ValueError):
    """Algorithm, mode and inputs do not fit together."""


class InvalidMetricError(NeuralGasError, ValueError):
    """A dissimilarity function returned a value violating the metric contract."""


class ValidationError(NeuralGasError, ValueError):
    """A loaded file or matrix violates its declared invariants.

    ``row`` and ``col`` locate the offending entry when known.
    """

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col
