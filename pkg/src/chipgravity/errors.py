"""Exception and warning types shared across the package."""


class ParameterError(ValueError):
    """A physical parameter is outside its allowed domain."""


class SingularBiasError(ParameterError):
    """Flux bias at or beyond half a flux quantum, where the SQUID inductance diverges."""


class ConfigurationError(ValueError):
    """A numerical or run configuration is inconsistent."""

    def __init__(self, message, key=None):
        self.key = key
        self.message = message
        super().__init__(f"{key}: {message}" if key else message)


class DivergenceError(ArithmeticError):
    """The lattice integration produced non-finite values."""

    def __init__(self, step, message="non-finite state"):
        self.step = step
        super().__init__(f"{message} at step {step}")


class IntegratorResolutionError(RuntimeError):
    """Bogoliubov norm identity violated beyond tolerance; the time step is too coarse."""


class CutoffError(RuntimeError):
    """A basis truncation has not converged."""


class IntegrationAccuracyError(RuntimeError):
    """Density-matrix evolution lost trace, hermiticity or positivity."""


class PhysicsRegimeWarning(UserWarning):
    """Inputs are valid but outside the regime where the model is trustworthy."""
