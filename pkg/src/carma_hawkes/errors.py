"""Exception types shared across the package."""


class CarmaHawkesError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateEigenvalues(CarmaHawkesError):
    """Characteristic roots are closer than the distinctness tolerance."""


class RootFindingFailure(CarmaHawkesError):
    """Polynomial root residuals exceeded tolerance."""


class NumericalOverflow(CarmaHawkesError):
    """A matrix-exponential factor would overflow (positive decay and large dt)."""


class NegativeIntensity(CarmaHawkesError):
    """Intensity fell below the baseline for a spec whose kernels validated as
    non-negative.  Indicates an internal consistency failure."""


class NonStationarySpec(CarmaHawkesError):
    """Simulation refused: the spec failed validation and no override was given."""


class HorizonNonPositive(CarmaHawkesError, ValueError):
    """Simulation horizon must be a finite positive number."""


class BoundViolation(CarmaHawkesError):
    """Intensity exceeded its dominating envelope; indicates a bug in the
    envelope constants, never expected on a correct build."""


class EmptySample(CarmaHawkesError, ValueError):
    """A statistic was requested on an empty sample."""


class SpecLogMismatch(CarmaHawkesError):
    """Event-log metadata does not match the model spec it was paired with."""
