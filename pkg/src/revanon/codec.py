"""Image <-> latent conversion and bit-exact image file handling.

The identity codec maps 8-bit samples linearly onto [-1, 1] and back; its
round trip is exact, which makes whole-pipeline claims checkable to the
grey level. The codec contract carries a dims mapping so a learned
encoder/decoder with spatial downsampling could slot in without touching
the pipeline.

Supported files: binary PGM (P5, grayscale) and PPM (P6, RGB) with 8-bit
samples, read and written bit-exactly; PNG as an optional convenience via
Pillow.
"""

from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np

from .exceptions import FormatError
from .fsio import atomic_write_bytes
from .validation import check_image, check_latent

_WHITESPACE = b" \t\r\n\v\f"


class ImageCodec(ABC):
    """Encoder/decoder pair between 8-bit images and float latents."""

    @abstractmethod
    def encode(self, image: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def decode(self, latent: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def latent_shape_for(self, image_shape) -> tuple[int, int, int]:
        """Latent (C, H, W) produced for an image of the given shape."""


class IdentityCodec(ImageCodec):
    """Exact linear codec: v -> v / 127.5 - 1, no spatial change.

    decode clamps to [0, 255] and rounds half-up, so decode(encode(img))
    reproduces img bitwise for every 8-bit input.
    """

    def encode(self, image: np.ndarray) -> np.ndarray:
        image = check_image(image)
        return image.astype(np.float64) / 127.5 - 1.0

    def decode(self, latent: np.ndarray) -> np.ndarray:
        latent = check_latent(latent)
        quantized = np.floor(latent * 127.5 + 128.0)
        return np.clip(quantized, 0.0, 255.0).astype(np.uint8)

    def latent_shape_for(self, image_shape) -> tuple[int, int, int]:
        c, h, w = (int(v) for v in image_shape)
        return (c, h, w)


def get_codec(name: str) -> ImageCodec:
    if name == "identity":
        return IdentityCodec()
    raise FormatError(f"unknown codec {name!r}")


def _parse_netpbm_header(data: bytes, path) -> tuple[bytes, int, int, int, int]:
    """Return (magic, width, height, maxval, payload_offset)."""
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4:
        while i < len(data):
            ch = data[i : i + 1]
            if ch in _WHITESPACE:
                i += 1
            elif ch == b"#":
                nl = data.find(b"\n", i)
                i = len(data) if nl < 0 else nl + 1
            else:
                break
        start = i
        while i < len(data) and data[i : i + 1] not in _WHITESPACE + b"#":
            i += 1
        if i == start:
            raise FormatError(f"{path}: truncated header")
        tokens.append(data[start:i])
    # exactly one whitespace byte separates the header from the raw samples
    if i >= len(data) or data[i : i + 1] not in b" \t\r\n":
        raise FormatError(f"{path}: missing separator before sample data")
    magic = tokens[0]
    try:
        width, height, maxval = (int(tok) for tok in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric header field") from exc
    if width < 1 or height < 1:
        raise FormatError(f"{path}: bad dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise FormatError(f"{path}: maxval {maxval} unsupported (8-bit only)")
    return magic, width, height, maxval, i + 1


def read_image(path) -> np.ndarray:
    """Read an image file as uint8 (C, H, W); dispatch on file magic."""
    data = Path(path).read_bytes()
    if data.startswith(b"\x89PNG"):
        return _read_png(path)
    if not data.startswith((b"P5", b"P6")):
        raise FormatError(f"{path}: unsupported image format")
    magic, width, height, _, offset, = _parse_netpbm_header(data, path)
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    payload = data[offset:]
    if len(payload) < expected:
        raise FormatError(f"{path}: truncated data ({len(payload)} of {expected} bytes)")
    if len(payload) > expected:
        raise FormatError(f"{path}: {len(payload) - expected} trailing bytes")
    samples = np.frombuffer(payload, dtype=np.uint8)
    if channels == 1:
        return samples.reshape(1, height, width)
    return samples.reshape(height, width, 3).transpose(2, 0, 1)


def write_image(path, image: np.ndarray) -> None:
    """Write uint8 (C, H, W) to PGM/PPM/PNG based on the file extension.

    The write is atomic and sample values round-trip bit-exactly through
    PGM/PPM.
    """
    image = check_image(image)
    path = Path(path)
    suffix = path.suffix.lower()
    c, h, w = image.shape
    if suffix == ".pgm":
        if c != 1:
            raise FormatError(f"PGM is single-channel, image has {c}")
        atomic_write_bytes(path, b"P5\n%d %d\n255\n" % (w, h) + image[0].tobytes())
    elif suffix == ".ppm":
        if c != 3:
            raise FormatError(f"PPM needs 3 channels, image has {c}")
        body = image.transpose(1, 2, 0).tobytes()
        atomic_write_bytes(path, b"P6\n%d %d\n255\n" % (w, h) + body)
    elif suffix == ".png":
        _write_png(path, image)
    else:
        raise FormatError(f"unsupported image extension {suffix!r}")


def _read_png(path) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - Pillow is a declared dep
        raise FormatError("PNG support requires Pillow") from exc
    with Image.open(path) as img:
        if img.mode == "L":
            return np.asarray(img, dtype=np.uint8)[np.newaxis]
        if img.mode == "RGB":
            return np.asarray(img, dtype=np.uint8).transpose(2, 0, 1)
        raise FormatError(f"{path}: PNG mode {img.mode} unsupported (use L or RGB)")


def _write_png(path, image: np.ndarray) -> None:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise FormatError("PNG support requires Pillow") from exc
    import io

    c = image.shape[0]
    if c == 1:
        pil = Image.fromarray(image[0], mode="L")
    elif c == 3:
        pil = Image.fromarray(image.transpose(1, 2, 0), mode="RGB")
    else:
        raise FormatError(f"PNG needs 1 or 3 channels, image has {c}")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())
