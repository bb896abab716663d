"""Exception types shared across the pipeline.

The CLI maps these onto its exit codes: I/O problems -> 1, NoPlateFoundError -> 2,
NoFoodItemsError -> 3, DatasetError / ModelError / GenerationError -> 4.
Plain ValueError is reserved for caller bugs (bad arguments, dimension mismatches).
"""


class PlatecheckError(Exception):
    """Base class for errors raised by platecheck."""


class ImageLoadError(PlatecheckError):
    """Image file unreadable, unsupported, or degenerate."""


class ConversionError(PlatecheckError):
    """Unsupported color-space conversion pair."""


class NoPlateFoundError(PlatecheckError):
    """Background subtraction found no plate-sized foreground component."""


class NoFoodItemsError(PlatecheckError):
    """Every segmented region was classified as plate surface."""


class DatasetError(PlatecheckError):
    """Training/evaluation dataset directory is malformed."""


class ModelError(PlatecheckError):
    """Classifier model file is missing fields or inconsistent."""


class GenerationError(PlatecheckError):
    """Synthetic plate spec violates the placement constraints."""
