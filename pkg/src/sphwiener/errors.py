"""Exception hierarchy shared by all sphwiener modules."""


class SphWienerError(Exception):
    """Base class for all errors raised by this package."""


class InvalidBandlimitError(SphWienerError):
    """Bandlimit is zero, negative, or too small for the requested operation."""


class InvalidOrderError(SphWienerError):
    """Harmonic order |m| exceeds the degree l."""


class UndersampledGridError(SphWienerError):
    """Grid has too few rings or longitudes for an exact transform at this bandlimit."""


class BandlimitMismatchError(SphWienerError):
    """Operands carry incompatible bandlimits."""


class InvalidDilationError(SphWienerError):
    """Wavelet dilation parameter must exceed 1."""


class InvalidScaleRangeError(SphWienerError):
    """Requested wavelet scale lies outside [j_min, j_max], or j_min > j_max."""


class ModeError(SphWienerError):
    """Operation applied to a decomposition or bank of the wrong mode
    (directional vs azimuthally symmetric)."""


class CovarianceError(SphWienerError):
    """Covariance input is non-Hermitian, indefinite, negative, or mis-sized."""


class UndefinedSnrError(SphWienerError):
    """SNR requested against a zero reference signal."""


class ConfigError(SphWienerError):
    """Experiment configuration file or CLI flags are invalid."""
