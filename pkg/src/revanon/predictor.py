"""Noise predictors: the seam where a trained denoising network would sit.

A predictor estimates the noise component of a noisy latent. The package
ships no neural network; instead it provides analytically tractable
predictors (zero, per-timestep affine) whose behaviour downstream is
exactly checkable. Every predictor is deterministic and shape-preserving.
"""

from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np

from .exceptions import FormatError
from .fsio import atomic_write_text
from .schedule import AlphaBarSchedule


class NoisePredictor(ABC):
    """Contract: predict(x, t) returns a noise estimate of x's shape.

    Implementations must be pure functions of (x, t): repeated calls on
    equal inputs return bitwise-identical outputs.
    """

    @abstractmethod
    def predict(self, x: np.ndarray, t: int) -> np.ndarray:
        ...


class ZeroPredictor(NoisePredictor):
    """Predicts zero noise everywhere; steps become pure rescalings."""

    def predict(self, x: np.ndarray, t: int) -> np.ndarray:
        return np.zeros_like(x, dtype=np.float64)

    def __repr__(self) -> str:
        return "ZeroPredictor()"


class AffineTablePredictor(NoisePredictor):
    """Per-timestep affine predictor: predict(x, t) = a_t * x + c_t.

    Coefficients are scalar per timestep (i.i.d.-coordinate assumption),
    which keeps downstream behaviour closed-form. Timesteps need not be
    contiguous; predicting at an absent timestep is an error.
    """

    def __init__(self, rows: dict[int, tuple[float, float]]):
        if not rows:
            raise ValueError("affine table must contain at least one row")
        self._rows = {int(t): (float(a), float(c)) for t, (a, c) in rows.items()}

    @property
    def rows(self) -> dict[int, tuple[float, float]]:
        return dict(self._rows)

    def coefficients(self, t: int) -> tuple[float, float]:
        """(a_t, c_t) for timestep t; KeyError-free lookup with a clear message."""
        try:
            return self._rows[int(t)]
        except KeyError:
            raise FormatError(f"affine table has no row for timestep {t}") from None

    def predict(self, x: np.ndarray, t: int) -> np.ndarray:
        a, c = self.coefficients(t)
        return a * np.asarray(x, dtype=np.float64) + c

    def __repr__(self) -> str:
        return f"AffineTablePredictor({len(self._rows)} rows)"


def zero_predictor() -> ZeroPredictor:
    return ZeroPredictor()


def gaussian_prior_predictor(
    mu: float, sigma: float, schedule: AlphaBarSchedule
) -> AffineTablePredictor:
    """Optimal affine noise estimate for i.i.d. Normal(mu, sigma^2) data.

    When each clean coordinate is drawn Normal(mu, sigma^2) and noised via
    the closed-form diffusion, noise and noisy state are jointly Gaussian,
    so the posterior-mean noise estimate is affine:

        predict(x, t) = a_t * (x - sqrt(ab_t) * mu)
        a_t = sqrt(1 - ab_t) / (ab_t * sigma^2 + 1 - ab_t)

    At t = 0 the data is clean and the estimate is zero. Returned as an
    affine table covering every timestep of the schedule.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    rows: dict[int, tuple[float, float]] = {0: (0.0, 0.0)}
    for t in range(1, schedule.t_train + 1):
        ab = schedule.at(t)
        a = np.sqrt(1.0 - ab) / (ab * sigma * sigma + 1.0 - ab)
        rows[t] = (float(a), float(-a * np.sqrt(ab) * mu))
    return AffineTablePredictor(rows)


def save_affine_table(table: AffineTablePredictor, path) -> None:
    """Write an affine table as text rows `t a c`.

    Floats are written with repr so a load() round trip is bitwise exact.
    """
    lines = ["# affine noise predictor: t a c"]
    for t in sorted(table.rows):
        a, c = table.rows[t]
        lines.append(f"{t} {a!r} {c!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_affine_table(path) -> AffineTablePredictor:
    """Parse an affine table file: whitespace-separated `t a c` rows.

    Lines starting with `#` and blank lines are ignored.
    """
    rows: dict[int, tuple[float, float]] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
        try:
            t, a, c = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        if t < 0:
            raise FormatError(f"{path}:{lineno}: negative timestep {t}")
        if t in rows:
            raise FormatError(f"{path}:{lineno}: duplicate timestep {t}")
        rows[t] = (a, c)
    if not rows:
        raise FormatError(f"{path}: affine table has no data rows")
    return AffineTablePredictor(rows)


def predictor_from_spec(spec, schedule: AlphaBarSchedule) -> NoisePredictor:
    """Build a predictor from a spec string.

    Grammar: `zero` | `gaussian:mu=<real>,sigma=<real>` | `file:<path>`.
    A NoisePredictor instance passes through unchanged.
    """
    if isinstance(spec, NoisePredictor):
        return spec
    if spec == "zero":
        return ZeroPredictor()
    if spec.startswith("gaussian:"):
        params = {}
        for item in spec[len("gaussian:"):].split(","):
            name, sep, value = item.partition("=")
            if not sep or name not in ("mu", "sigma") or name in params:
                raise FormatError(f"bad predictor spec {spec!r}")
            try:
                params[name] = float(value)
            except ValueError:
                raise FormatError(f"bad predictor spec {spec!r}") from None
        if set(params) != {"mu", "sigma"}:
            raise FormatError(f"bad predictor spec {spec!r}")
        return gaussian_prior_predictor(params["mu"], params["sigma"], schedule)
    if spec.startswith("file:"):
        return load_affine_table(spec[len("file:"):])
    raise FormatError(f"unknown predictor spec {spec!r}")
