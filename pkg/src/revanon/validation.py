"""Input validation helpers used throughout the package.

All helpers either return a canonical ndarray or raise one of the package
exceptions; they never coerce silently in ways that would change values.
"""

import numpy as np

from .exceptions import DimsMismatchError, NumericError


def check_image(image, name: str = "image") -> np.ndarray:
    """Validate an 8-bit image array of shape (channels, height, width)."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        raise ValueError(f"{name} must be uint8, got {arr.dtype}")
    if arr.ndim != 3:
        raise ValueError(f"{name} must have shape (C, H, W), got {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"{name} has an empty dimension: {arr.shape}")
    return arr


def check_latent(z, name: str = "latent") -> np.ndarray:
    """Validate a finite float latent of shape (channels, height, width)."""
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"{name} must have shape (C, H, W), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise NumericError(f"{name} contains non-finite values")
    return arr


def check_pixel_mask(mask, name: str = "mask") -> np.ndarray:
    """Validate a binary spatial mask of shape (height, width); returns bool."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"{name} must have shape (H, W), got {arr.shape}")
    if arr.dtype != np.bool_:
        if not np.isin(arr, (0, 1)).all():
            raise ValueError(f"{name} must be strictly binary")
        arr = arr.astype(bool)
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    """Raise DimsMismatchError unless the two arrays share a shape."""
    if a.shape != b.shape:
        raise DimsMismatchError(f"{what}: {a.shape} vs {b.shape}")


def check_dims(dims, name: str = "dims") -> tuple[int, int, int]:
    """Validate a (channels, height, width) tuple of positive integers."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ValueError(f"{name} must be (C, H, W), got {dims}")
    if min(dims) < 1:
        raise ValueError(f"{name} must be positive, got {dims}")
    return dims


def check_finite(arr: np.ndarray, context: str) -> np.ndarray:
    """Raise NumericError if the array contains NaN or infinity."""
    if not np.isfinite(arr).all():
        raise NumericError(f"non-finite latent after {context}")
    return arr
