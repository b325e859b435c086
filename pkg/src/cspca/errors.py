"""Exception hierarchy shared by every cspca module."""


class CSPCAError(Exception):
    """Base class for all errors raised by the package."""


class NotSymmetric(CSPCAError):
    pass


class BadRank(CSPCAError):
    pass


class ConvergenceFailure(CSPCAError):
    pass


class NotPositiveDefinite(CSPCAError):
    pass


class DimensionMismatch(CSPCAError):
    pass


class NonBinaryLabels(CSPCAError):
    pass


class RankDeficient(CSPCAError):
    pass


class TooFewFeatures(CSPCAError):
    pass


class SingularScatter(CSPCAError):
    pass


class ZeroData(CSPCAError):
    pass


class ZeroCrossCovariance(CSPCAError):
    pass


class OneClassOnly(CSPCAError):
    pass


class ParseError(CSPCAError):
    pass


class MissingValue(ParseError):
    pass


class AmbiguousLabels(CSPCAError):
    pass


class VersionMismatch(CSPCAError):
    pass


class CorruptModel(CSPCAError):
    pass
