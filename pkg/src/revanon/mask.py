"""Binary spatial masks: regions selected for anonymization.

Masks arrive as grayscale images at full image resolution (1 = anonymize)
and are reduced to latent resolution by OR-pooling: a latent cell is
covered if any pixel under it is. Over-covering errs toward stronger
anonymization rather than leaking face content.
"""

import numpy as np

from . import codec
from .exceptions import DimsMismatchError, FormatError
from .validation import check_pixel_mask

DEFAULT_THRESHOLD = 128


def load_pixel_mask(path, threshold: int = DEFAULT_THRESHOLD) -> np.ndarray:
    """Load a grayscale mask image and binarize it.

    A pixel >= threshold becomes True. Multi-channel images are rejected;
    a color mask is almost certainly a mistaken file.
    """
    img = codec.read_image(path)
    if img.shape[0] != 1:
        raise FormatError(f"{path}: mask must be grayscale, got {img.shape[0]} channels")
    return img[0] >= threshold


def full_mask(height: int, width: int) -> np.ndarray:
    """All-covered mask: every coordinate gets anonymized."""
    return np.ones((int(height), int(width)), dtype=bool)


def downscale_to_latent(mask: np.ndarray, latent_h: int, latent_w: int) -> np.ndarray:
    """OR-pool a pixel mask down to latent resolution.

    Image dimensions must be integer multiples of the latent dimensions; a
    latent cell is True iff any pixel in its block is True. Adding pixels
    to the input can only add cells to the output.
    """
    mask = check_pixel_mask(mask)
    latent_h, latent_w = int(latent_h), int(latent_w)
    h, w = mask.shape
    if latent_h < 1 or latent_w < 1 or h % latent_h or w % latent_w:
        raise DimsMismatchError(
            f"mask {h}x{w} does not divide evenly into latent {latent_h}x{latent_w}"
        )
    fh, fw = h // latent_h, w // latent_w
    return mask.reshape(latent_h, fh, latent_w, fw).any(axis=(1, 3))


def blend(anon: np.ndarray, original: np.ndarray, mask_z: np.ndarray) -> np.ndarray:
    """Per-coordinate selection: masked from `anon`, unmasked from `original`.

    Pure selection, no arithmetic mixing: every output coordinate is
    bitwise one of the two inputs. The spatial mask broadcasts across
    leading channel axes.
    """
    anon = np.asarray(anon, dtype=np.float64)
    original = np.asarray(original, dtype=np.float64)
    if anon.shape != original.shape:
        raise DimsMismatchError(f"blend inputs differ: {anon.shape} vs {original.shape}")
    mask_z = np.asarray(mask_z, dtype=bool)
    if mask_z.shape != anon.shape[-2:]:
        raise DimsMismatchError(f"mask {mask_z.shape} vs latent spatial {anon.shape[-2:]}")
    return np.where(mask_z, anon, original)
