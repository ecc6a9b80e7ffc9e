"""Exception types shared across the package."""


class KcpScanError(Exception):
    """Base class for all package errors."""


class AllPointsIdentical(KcpScanError):
    """Median pairwise distance is zero, so no bandwidth can be chosen."""


class NonFiniteKernel(KcpScanError):
    """Kernel matrix contains NaN or infinite entries."""


class DegenerateSplit(KcpScanError):
    """Split index outside [2, n-2], where the null moments are undefined."""


class ZeroVariance(KcpScanError):
    """A scan statistic has zero null variance (e.g. constant kernel)."""


class SingularCovariance(KcpScanError):
    """The 2x2 covariance of (alpha, beta) is numerically singular."""


class AllSkewInvalid(KcpScanError):
    """No split point admits a valid saddlepoint for the skewness factor."""


class InvalidSpec(KcpScanError):
    """Generator specification is inconsistent."""


class DataFormatError(KcpScanError):
    """Input file cannot be parsed into a numeric matrix."""


class ConfigError(KcpScanError):
    """Run configuration is inconsistent."""
