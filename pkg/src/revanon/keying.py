"""Secret keys: random sign patterns over latent coordinates.

A key is a binary vector b over the full latent geometry (channels *
height * width, channel-major then row-major). Its sign view k = 2b - 1
takes values in {-1, +1}; multiplying a latent by k elementwise is an
involution, which is what makes anonymization reversible. Bits are stored
packed, MSB-first within each byte, so key files are portable.
"""

import base64
import binascii
import secrets
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DimsMismatchError, FormatError
from .fsio import atomic_write_text
from .validation import check_dims

_MAGIC = "RDK1"


@dataclass(frozen=True)
class SecretKey:
    """Packed binary key for a (channels, height, width) latent geometry."""

    dims: tuple[int, int, int]
    packed: bytes

    def __post_init__(self):
        dims = check_dims(self.dims, "key dims")
        object.__setattr__(self, "dims", dims)
        n_bytes = (self.d + 7) // 8
        if len(self.packed) != n_bytes:
            raise FormatError(
                f"key payload is {len(self.packed)} bytes, dims {dims} need {n_bytes}"
            )
        pad = n_bytes * 8 - self.d
        if pad and self.packed[-1] & ((1 << pad) - 1):
            raise FormatError("key padding bits must be zero")

    @property
    def d(self) -> int:
        """Total bit count, C * H * W."""
        c, h, w = self.dims
        return c * h * w

    def bits(self) -> np.ndarray:
        """Unpacked bits as a uint8 array of shape (C, H, W)."""
        flat = np.unpackbits(np.frombuffer(self.packed, dtype=np.uint8), count=self.d)
        return flat.reshape(self.dims)

    @classmethod
    def from_bits(cls, bits, dims) -> "SecretKey":
        dims = check_dims(dims)
        flat = np.asarray(bits, dtype=np.uint8).reshape(-1)
        d = dims[0] * dims[1] * dims[2]
        if flat.size != d:
            raise DimsMismatchError(f"{flat.size} bits for dims {dims} (need {d})")
        if not np.isin(flat, (0, 1)).all():
            raise ValueError("key bits must be 0 or 1")
        return cls(dims, np.packbits(flat).tobytes())


def keygen(dims, seed: int | None = None) -> SecretKey:
    """Generate a key with i.i.d. fair-coin bits.

    Without a seed, bits come from the operating system's cryptographic
    entropy source. A seed gives reproducible keys for tests only; seeded
    keys are not secret.
    """
    dims = check_dims(dims)
    d = dims[0] * dims[1] * dims[2]
    n_bytes = (d + 7) // 8
    if seed is None:
        raw = bytearray(secrets.token_bytes(n_bytes))
        pad = n_bytes * 8 - d
        if pad:
            raw[-1] &= 0xFF ^ ((1 << pad) - 1)
        return SecretKey(dims, bytes(raw))
    rng = np.random.default_rng(seed)
    return SecretKey.from_bits(rng.integers(0, 2, size=d, dtype=np.uint8), dims)


def identity_key(dims) -> SecretKey:
    """All-ones key: its sign view is +1 everywhere, so it changes nothing."""
    dims = check_dims(dims)
    return SecretKey.from_bits(np.ones(dims, dtype=np.uint8), dims)


def to_rademacher(key: SecretKey) -> np.ndarray:
    """Sign view k = 2b - 1 as float64 of shape (C, H, W), values in {-1, +1}."""
    return 2.0 * key.bits().astype(np.float64) - 1.0


def apply_key(z: np.ndarray, key: SecretKey) -> np.ndarray:
    """Elementwise sign flip k * z. Applying the same key twice is a no-op."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != key.dims:
        raise DimsMismatchError(f"key/latent dims mismatch: key {key.dims} vs latent {z.shape}")
    return to_rademacher(key) * z


def apply_key_masked(z: np.ndarray, key: SecretKey, mask_z: np.ndarray) -> np.ndarray:
    """Sign-flip only inside the mask; outside, coordinates pass through bitwise.

    The spatial mask broadcasts across channels. Selection is exact (no
    arithmetic blend), so unmasked coordinates are untouched and applying
    the same key and mask twice restores the input bitwise.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != key.dims:
        raise DimsMismatchError(f"key/latent dims mismatch: key {key.dims} vs latent {z.shape}")
    mask_z = np.asarray(mask_z, dtype=bool)
    if mask_z.shape != z.shape[1:]:
        raise DimsMismatchError(f"mask {mask_z.shape} vs latent spatial {z.shape[1:]}")
    return np.where(mask_z, apply_key(z, key), z)


def save_key(key: SecretKey, path) -> None:
    """Write the three-line key file (magic, dims, base64 payload)."""
    body = base64.b64encode(key.packed).decode("ascii")
    c, h, w = key.dims
    atomic_write_text(path, f"{_MAGIC}\ndims {c} {h} {w}\nbits {body}\n")


def load_key(path) -> SecretKey:
    """Read a key file, rejecting malformed or truncated content outright."""
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not a key file: {exc}") from exc
    lines = text.splitlines()
    if len(lines) < 3:
        raise FormatError(f"{path}: truncated key file ({len(lines)} lines, need 3)")
    if lines[0].strip() != _MAGIC:
        raise FormatError(f"{path}: bad magic {lines[0]!r}, expected {_MAGIC!r}")
    dims_parts = lines[1].split()
    if len(dims_parts) != 4 or dims_parts[0] != "dims":
        raise FormatError(f"{path}: bad dims line {lines[1]!r}")
    try:
        dims = tuple(int(p) for p in dims_parts[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: bad dims line {lines[1]!r}") from exc
    bits_parts = lines[2].split()
    if len(bits_parts) != 2 or bits_parts[0] != "bits":
        raise FormatError(f"{path}: bad bits line")
    try:
        packed = base64.b64decode(bits_parts[1], validate=True)
    except binascii.Error as exc:
        raise FormatError(f"{path}: bad base64 payload: {exc}") from exc
    if any(line.strip() for line in lines[3:]):
        raise FormatError(f"{path}: trailing data after key payload")
    try:
        return SecretKey(tuple(dims), packed)
    except (FormatError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def key_hamming(a: SecretKey, b: SecretKey) -> int:
    """Number of bit positions where the two keys differ."""
    if a.dims != b.dims:
        raise DimsMismatchError(f"key dims mismatch: {a.dims} vs {b.dims}")
    return (int.from_bytes(a.packed, "big") ^ int.from_bytes(b.packed, "big")).bit_count()
