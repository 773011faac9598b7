"""Fidelity metrics and distribution checks.

Includes image-space MSE/PSNR (optionally restricted to a mask region), a
one-sample Kolmogorov-Smirnov test against the standard normal (the
instrument behind "the keyed latent is still Gaussian"), and latent
agreement statistics used by wrong-key analysis.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .exceptions import DimsMismatchError
from .validation import check_image, check_pixel_mask

PSNR_MAX = 255.0


def _pixel_diff(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    a = check_image(a, "a")
    b = check_image(b, "b")
    if a.shape != b.shape:
        raise DimsMismatchError(f"image shapes differ: {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    if mask is None:
        return diff.ravel()
    mask = check_pixel_mask(mask)
    if mask.shape != a.shape[1:]:
        raise DimsMismatchError(f"mask {mask.shape} vs image spatial {a.shape[1:]}")
    if not mask.any():
        raise ValueError("empty mask: no pixels selected")
    return diff[:, mask].ravel()


def mse(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Mean squared error in grey levels; `mask` restricts to a pixel region."""
    diff = _pixel_diff(a, b, mask)
    return float(np.mean(diff * diff))


def psnr(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Peak signal-to-noise ratio in dB with MAX = 255; +inf for equal inputs."""
    err = mse(a, b, mask)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PSNR_MAX * PSNR_MAX / err)


def max_abs_error(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Largest per-pixel absolute difference in grey levels."""
    return float(np.max(np.abs(_pixel_diff(a, b, mask))))


@dataclass(frozen=True)
class GaussianityReport:
    """Outcome of the standard-normal KS test plus mean/variance side checks."""

    n: int
    ks_stat: float
    ks_crit: float
    mean: float
    var: float
    ks_pass: bool
    mean_pass: bool
    var_pass: bool

    @property
    def passed(self) -> bool:
        return self.ks_pass and self.mean_pass and self.var_pass

    def to_dict(self) -> dict:
        """Stable serialization field names."""
        return {
            "n": self.n,
            "ks_stat": self.ks_stat,
            "ks_crit": self.ks_crit,
            "mean": self.mean,
            "var": self.var,
            "pass": self.passed,
        }


def ks_standard_normal(samples) -> GaussianityReport:
    """One-sample KS test of `samples` against the standard normal CDF.

    Uses the asymptotic 5% critical value 1.36 / sqrt(n), accurate for the
    large samples this package works with. Side checks: |mean| within
    3 / sqrt(n) and variance within 1 +- 3 * sqrt(2 / n).
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n < 8:
        raise ValueError(f"need at least 8 samples, got {n}")
    cdf = ndtr(np.sort(x))
    grid = np.arange(1, n + 1, dtype=np.float64) / n
    d_plus = np.max(grid - cdf)
    d_minus = np.max(cdf - (grid - 1.0 / n))
    ks_stat = float(max(d_plus, d_minus))
    ks_crit = 1.36 / math.sqrt(n)
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    return GaussianityReport(
        n=n,
        ks_stat=ks_stat,
        ks_crit=ks_crit,
        mean=mean,
        var=var,
        ks_pass=ks_stat < ks_crit,
        mean_pass=abs(mean) <= 3.0 / math.sqrt(n),
        var_pass=abs(var - 1.0) <= 3.0 * math.sqrt(2.0 / n),
    )


def sign_agreement(a: np.ndarray, b: np.ndarray, mask_z: np.ndarray) -> float:
    """Fraction of masked coordinates with matching signs.

    Exact zeros count as agreeing; with continuous latents they carry
    measure ~0 and the convention only matters for synthetic inputs.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimsMismatchError(f"latent shapes differ: {a.shape} vs {b.shape}")
    mask_z = np.asarray(mask_z, dtype=bool)
    if mask_z.shape != a.shape[-2:]:
        raise DimsMismatchError(f"mask {mask_z.shape} vs latent spatial {a.shape[-2:]}")
    if not mask_z.any():
        raise ValueError("empty mask: no coordinates selected")
    sel_a = a[..., mask_z].ravel()
    sel_b = b[..., mask_z].ravel()
    agree = (np.sign(sel_a) == np.sign(sel_b)) | (sel_a == 0.0) | (sel_b == 0.0)
    return float(np.mean(agree))


def latent_cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two latents flattened to vectors."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimsMismatchError(f"latent sizes differ: {a.size} vs {b.size}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))
