"""Exception hierarchy shared by every module of the package."""


class QsepError(Exception):
    """Base class for all errors raised by :mod:`qsep`."""


class NonHermitianInput(QsepError, ValueError):
    pass


class NegativeSpectrum(QsepError, ValueError):
    pass


class DimensionMismatch(QsepError, ValueError):
    pass


class NotCPTP(QsepError, ValueError):
    pass


class InvalidParameter(QsepError, ValueError):
    pass


class SingularPrior(QsepError, ValueError):
    """A prior (or its image under the channel) is not invertible where needed."""


class SupportMismatch(QsepError, ValueError):
    """The support of the first argument is not contained in that of the second."""


class NotFullRank(QsepError, ValueError):
    pass


class PreconditionViolation(QsepError, ValueError):
    pass
