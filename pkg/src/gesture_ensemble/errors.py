"""Exception types shared across the package."""


class GestureError(Exception):
    """Base class for all package errors."""


class DimensionError(GestureError, ValueError):
    """Raster dimensions are zero, inconsistent, or mismatched."""


class ParameterError(GestureError, ValueError):
    """An operation parameter is out of its valid range."""


class NoHandError(GestureError):
    """No foreground region that could be a hand was found."""


class BackgroundNotInitialized(GestureError):
    """Background subtraction was requested before any frame was seen."""


class DatasetError(GestureError, ValueError):
    """Dataset directory layout or split request is unusable."""


class ShapeError(GestureError, ValueError):
    """Shape inference failed somewhere in a model spec."""


class DivergenceError(GestureError, FloatingPointError):
    """Training produced a non-finite loss."""


class DegenerateSampleError(GestureError, ValueError):
    """A statistical test was asked of a sample with zero spread."""


class ArtifactError(GestureError, FileNotFoundError):
    """A saved model or ensemble artifact is missing or fails validation."""
