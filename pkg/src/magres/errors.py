"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration (unsupported crystal, bad ranges, bad CLI input)."""


class NumericalFailure(FloatingPointError):
    """A field evaluation produced a non-finite value."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class InstabilityError(RuntimeError):
    """Integrator drifted off the unit sphere; a smaller time step is needed."""

    def __init__(self, message, input_index=None):
        super().__init__(message)
        self.input_index = input_index


class SingularDesignError(ValueError):
    """Ridge normal matrix is singular at zero regularisation."""


class UndefinedNormalisation(ValueError):
    """NMSE requested against a constant target."""


class IngestionError(ValueError):
    """Malformed or short dataset file."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
