#!/usr/bin/env python3
"""Regenerate the bundled sample portrait and face mask.

The portrait is procedural (no real person): a shaded head-and-shoulders
arrangement over a gradient background with mild texture, quantized to
8-bit grayscale. Deterministic, so the committed assets are reproducible.
"""

from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

SIZE = 64
OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "revanon" / "data"


def ellipse(yy, xx, cy, cx, ry, rx):
    return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0


def build_portrait() -> np.ndarray:
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    img = 150.0 + 60.0 * (yy / SIZE) - 25.0 * (xx / SIZE)

    torso = ellipse(yy, xx, 70, 32, 28, 22)
    img[torso] = 95.0 - 0.6 * (yy[torso] - 50)

    head = ellipse(yy, xx, 30, 32, 17, 13)
    img[head] = 190.0 - 1.1 * (yy[head] - 18) + 0.5 * (xx[head] - 32)

    hair = ellipse(yy, xx, 20, 32, 11, 14) & (yy < 22)
    img[hair] = 60.0 + 0.8 * (xx[hair] - 32)

    for ex in (26, 38):
        img[ellipse(yy, xx, 28, ex, 1.6, 2.6)] = 45.0
    img[ellipse(yy, xx, 33, 32, 2.2, 1.4)] = 150.0  # nose highlight
    img[ellipse(yy, xx, 39, 32, 1.2, 4.0)] = 70.0  # mouth

    rng = np.random.default_rng(20240531)
    img += gaussian_filter(rng.normal(0.0, 6.0, img.shape), 1.2)
    img = gaussian_filter(img, 0.6)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def build_mask() -> np.ndarray:
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    face = ellipse(yy, xx, 31, 32, 14, 11)
    return np.where(face, 255, 0).astype(np.uint8)


def write_pgm(path: Path, gray: np.ndarray) -> None:
    h, w = gray.shape
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + gray.tobytes())


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    portrait = build_portrait()
    mask = build_mask()
    write_pgm(OUT_DIR / "portrait.pgm", portrait)
    write_pgm(OUT_DIR / "portrait_mask.pgm", mask)
    near_mid = int(np.isin(portrait, (127, 128)).sum())
    print(f"portrait: min={portrait.min()} max={portrait.max()} "
          f"mid-grey pixels={near_mid}/{portrait.size}")
    print(f"mask coverage: {mask.astype(bool).mean():.3f}")


if __name__ == "__main__":
    main()
