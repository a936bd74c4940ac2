"""Exception types shared across the nvforce modules."""


class NVForceError(Exception):
    """Base class for all nvforce errors."""


class ConfigError(NVForceError):
    """Invalid or inconsistent configuration input."""


class NumericalError(NVForceError):
    """A numerical routine failed its internal consistency check."""


class NotHermitian(NumericalError):
    """Matrix handed to a Hermitian eigensolver is not Hermitian."""


class NotUnitary(NumericalError):
    """Basis-change matrix is not unitary."""


class InsideMagnet(ValueError, NVForceError):
    """Field evaluation point lies inside the magnet body."""


class FieldOutOfRange(ValueError, NVForceError):
    """Magnetic field magnitude outside the sane modelling range."""


class NonPositiveTemperature(ValueError, NVForceError):
    """Temperature must be strictly positive."""


class SingularRateMatrix(NumericalError):
    """Seven-level rate matrix has no unique steady state."""


class GeometryError(ValueError, NVForceError):
    """Inconsistent diamond/magnet geometry (e.g. overlapping bodies)."""


class UnstableStep(ValueError, NVForceError):
    """Requested integration step violates the stability requirement."""


class DutyOutOfRange(ValueError, NVForceError):
    """Duty cycle must lie strictly between 0 and 1."""


class TooShort(ValueError, NVForceError):
    """Time series too short for the requested operation."""


class BandOutOfRange(ValueError, NVForceError):
    """Requested frequency band not contained in the PSD grid."""


class ParseError(ValueError, NVForceError):
    """Malformed time-series file."""


class NonuniformSampling(ParseError):
    """Imported time series is not uniformly sampled."""
