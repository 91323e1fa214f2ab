"""Exception types shared across the package."""


class ThermoDomainError(ValueError):
    """An argument left the physical domain (rho < 0, theta <= 0, ...)."""


class InversionError(RuntimeError):
    """Temperature recovery failed; carries the bracket state for diagnosis."""

    def __init__(self, message, cells=None, bracket=None):
        super().__init__(message)
        self.cells = cells
        self.bracket = bracket


class StateInvalidError(RuntimeError):
    """A discrete state lost positivity; carries the offending cell index."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class StabilityError(RuntimeError):
    """Requested time step exceeds the explicit stability limit."""

    def __init__(self, dt, dt_max):
        super().__init__(
            f"dt={dt:.6g} exceeds the stability limit; use dt <= {dt_max:.6g}"
        )
        self.dt = dt
        self.dt_max = dt_max


class ConfigError(ValueError):
    """Malformed or missing configuration; message carries the key path."""


class PlotDataError(ValueError):
    """Requested CSV column missing or no data rows to draw."""
