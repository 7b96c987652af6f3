"""Exception hierarchy shared by all modules."""


class LemniscateError(Exception):
    """Base class for every numerical failure raised by the package."""


class RootFindingError(LemniscateError):
    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


class DegenerateMapError(LemniscateError):
    """The map is degenerate (constant, identically vanishing derivative, ...)."""


class PoleError(LemniscateError):
    def __init__(self, location):
        super().__init__(f"evaluation at a pole near {location!r}")
        self.location = location


class BlaschkeFitError(LemniscateError):
    def __init__(self, residual, tolerance):
        super().__init__(
            f"samples are not consistent with a Blaschke product with the given zeros "
            f"(residual {residual:.3e} > {tolerance:.1e})"
        )
        self.residual = residual


class DegenerateLemniscateError(LemniscateError):
    """A critical value lies on the unit circle, so the level set is not a smooth curve."""


class NotProperError(LemniscateError):
    pass


class TraceError(LemniscateError):
    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{message} near {location!r}")
        self.location = location


class ConformalMapError(LemniscateError):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class InversionError(LemniscateError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class ConjugacyError(LemniscateError):
    pass


class StageError(LemniscateError):
    """Wraps a failure inside a pipeline with the name of the stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
