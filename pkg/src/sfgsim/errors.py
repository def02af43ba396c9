"""Exception types shared across the package.

Every domain failure derives from :class:`SfgSimError` so the CLI can map
them onto exit codes without enumerating modules.
"""


class SfgSimError(Exception):
    """Base class for all sfgsim domain errors."""


class OutOfWindow(SfgSimError):
    """Refractive index requested outside a material's validity window."""

    def __init__(self, material, wavelength_um, window_um):
        self.material = material
        self.wavelength_um = wavelength_um
        self.window_um = window_um
        super().__init__(
            f"{material}: wavelength {wavelength_um:.4g} um outside validity "
            f"window [{window_um[0]:.3g}, {window_um[1]:.3g}] um"
        )


class NonPositiveFrequency(SfgSimError):
    """A frequency that must be strictly positive (and below the sum) is not."""


class NotSymmetric(SfgSimError):
    """Matrix handed to the Takagi factorization is not complex symmetric."""


class ConvergenceFailure(SfgSimError):
    """Takagi factorization failed its own reconstruction/unitarity check."""


class AllModesVacuum(SfgSimError):
    """Schmidt-number request on a decomposition with every mode in vacuum."""


class QuadratureNotConverged(SfgSimError):
    """Oscillatory kernel quadrature did not reach the requested tolerance."""

    def __init__(self, achieved_rel_error, requested_rel_error):
        self.achieved_rel_error = achieved_rel_error
        self.requested_rel_error = requested_rel_error
        super().__init__(
            f"kernel quadrature stalled at relative error "
            f"{achieved_rel_error:.3e} (requested {requested_rel_error:.3e})"
        )


class GridMismatch(SfgSimError):
    """Kernel and decomposition do not share the same pump-frequency grid."""


class AlreadyCorrected(SfgSimError):
    """Detection correction applied twice to the same spectrum."""


class NoCrossing(SfgSimError):
    """Signal never falls to half maximum inside the analysis window."""


class ComponentEmpty(SfgSimError):
    """Width analysis on a spectrum component that is identically zero."""


class TooFewFringes(SfgSimError):
    """Fringe-period analysis found fewer than three maxima in the band."""


class ConfigError(SfgSimError):
    """Base class for configuration failures (CLI exit code 2)."""


class ParseError(ConfigError):
    """Config file could not be parsed."""

    def __init__(self, path, detail):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")


class ValidationError(ConfigError):
    """Config parsed but a field failed validation."""

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"config field '{field}': {reason}")
