"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid scenario/config input. CLI maps this to exit code 2."""


class NumericalError(RuntimeError):
    """Numerical failure during canceler design or rate computation.

    CLI maps this to exit code 3. ``tone`` carries the offending tone
    index when the failure is localized.
    """

    def __init__(self, message, tone=None):
        if tone is not None:
            message = f"{message} (tone {tone})"
        super().__init__(message)
        self.tone = tone


class SingularDesignError(NumericalError):
    """Channel matrix is singular or too ill-conditioned to invert."""
