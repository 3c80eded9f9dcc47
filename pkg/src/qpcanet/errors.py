"""Exception hierarchy shared by the library and the command line."""


class QpcaNetError(Exception):
    """Base class for every error raised by :mod:`qpcanet`."""


class QuaternionDomainError(QpcaNetError, ValueError):
    """An argument lies outside the domain of an operation (e.g. inverting zero)."""


class ShapeError(QpcaNetError, ValueError):
    """Array shapes or dimensions are inconsistent."""


class NotHermitianError(QuaternionDomainError):
    """A matrix handed to the Hermitian eigensolver is not Hermitian."""


class NumericalError(QpcaNetError, ArithmeticError):
    """An iterative numerical routine failed.

    ``diagnostics`` carries whatever the failing routine could report
    (iteration counts, residuals, the index that would not converge).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({details})"


class DataError(QpcaNetError):
    """Input data (images, manifests, splits) is unusable."""


class ModelFormatError(DataError):
    """A model file is corrupt, truncated, or of an unsupported version."""


class NotTrainedError(QpcaNetError, RuntimeError):
    """A model is used before its filter banks were learned."""
