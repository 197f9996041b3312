"""Exception hierarchy shared by every module."""


class WaterWaveError(Exception):
    """Base class for all package errors."""


class GridMismatchError(WaterWaveError, ValueError):
    """Two fields (or a field and a grid) disagree on shape."""


class InvalidMultiplierError(WaterWaveError, ValueError):
    """A Fourier multiplier is not finite at some grid wavenumber."""


class SymbolDomainError(WaterWaveError, ValueError):
    """A symbol table does not cover the frequencies requested."""


class DegenerateSymbolError(WaterWaveError, ValueError):
    """Ellipticity of the decoupling symbols fails at some sample."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SurfaceTooRoughError(WaterWaveError):
    """No smoothing parameter above the floor keeps the flattening monotone."""

    def __init__(self, message, delta=None, min_rho_z=None):
        super().__init__(message)
        self.delta = delta
        self.min_rho_z = min_rho_z


class IllConditionedError(WaterWaveError):
    """The strip linear solve did not reach its residual target."""

    def __init__(self, message, condition_estimate=None, residual=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate
        self.residual = residual


class BlowUpDetected(WaterWaveError):
    """Non-finite values appeared while advancing the surface state."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SymmetrizerUndefinedError(WaterWaveError):
    """The Taylor coefficient is not positive, so sqrt(a/lambda) is undefined."""

    def __init__(self, message, a_min=None, location=None):
        super().__init__(message)
        self.a_min = a_min
        self.location = location


class OrderingError(WaterWaveError, ValueError):
    """Monitor samples arrived out of time order."""


class ConfigError(WaterWaveError, ValueError):
    """Run configuration could not be parsed or violates an invariant."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
