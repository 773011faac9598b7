"""Noise-decay schedule and inference-time timestep plan.

The schedule stores the cumulative signal-retention sequence alpha_bar,
where a noisy state at timestep t is

    x_t = sqrt(alpha_bar_t) * x_0 + sqrt(1 - alpha_bar_t) * eps

with alpha_bar_0 == 1 exactly, so t = 0 is clean data. A timestep plan is
the strictly increasing subsequence of training timesteps that inference
actually visits.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import FormatError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULT_T_TRAIN = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02
DEFAULT_STEPS = 50


class AlphaBarSchedule:
    """Cumulative noise-decay sequence, anchored at alpha_bar_0 = 1.

    Args:
        alpha_bar: Values for timesteps 1..t_train. Must lie in (0, 1] and
            be strictly decreasing; the t = 0 anchor is added internally.
    """

    def __init__(self, alpha_bar):
        values = np.asarray(alpha_bar, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("alpha_bar must be a non-empty 1-D sequence")
        if not np.isfinite(values).all():
            raise ValueError("alpha_bar contains non-finite values")
        if values.min() <= 0.0 or values.max() > 1.0:
            raise ValueError("alpha_bar values must lie in (0, 1]")
        table = np.concatenate(([1.0], values))
        if not (np.diff(table) < 0.0).all():
            raise ValueError("alpha_bar must be strictly decreasing from 1")
        table.flags.writeable = False
        self._table = table

    @property
    def t_train(self) -> int:
        return self._table.size - 1

    def at(self, t: int) -> float:
        """alpha_bar at integer timestep t in 0..t_train."""
        t = int(t)
        if not 0 <= t <= self.t_train:
            raise ValueError(f"timestep {t} outside 0..{self.t_train}")
        return float(self._table[t])

    def as_array(self) -> np.ndarray:
        """Read-only view of the full table, index 0..t_train."""
        return self._table

    def __repr__(self) -> str:
        return f"AlphaBarSchedule(t_train={self.t_train})"


@dataclass(frozen=True)
class TimestepPlan:
    """Strictly increasing inference timesteps tau_1 < ... < tau_S.

    The implicit anchor tau_0 = 0 (clean data) is not stored; `anchors`
    prepends it.
    """

    steps: tuple[int, ...]

    def __post_init__(self):
        steps = tuple(int(t) for t in self.steps)
        if len(steps) < 1:
            raise ValueError("plan must contain at least one timestep")
        if steps[0] < 1 or any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("plan timesteps must be strictly increasing and >= 1")
        object.__setattr__(self, "steps", steps)

    @property
    def anchors(self) -> tuple[int, ...]:
        """(0, tau_1, ..., tau_S): every state the trajectory passes through."""
        return (0,) + self.steps

    def __len__(self) -> int:
        return len(self.steps)


def build_linear_beta_schedule(
    t_train: int, beta_start: float, beta_end: float
) -> AlphaBarSchedule:
    """Build the schedule from per-step noise rates beta interpolated linearly.

    beta_t runs linearly from beta_start to beta_end over t = 1..t_train and
    alpha_bar_t is the running product of (1 - beta_i). All arithmetic is in
    double precision to keep the cumulative product stable.

    Args:
        t_train: Number of training timesteps, >= 1.
        beta_start: First noise rate, in (0, 1).
        beta_end: Last noise rate, >= beta_start and < 1.

    Raises:
        ValueError: If the beta bounds are out of range.
    """
    t_train = int(t_train)
    if t_train < 1:
        raise ValueError(f"t_train must be >= 1, got {t_train}")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ValueError(
            f"need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}"
        )
    betas = np.linspace(beta_start, beta_end, t_train, dtype=np.float64)
    return AlphaBarSchedule(np.cumprod(1.0 - betas))


def build_timestep_plan(t_train: int, s: int) -> TimestepPlan:
    """Subsample 1..t_train into s near-uniform timesteps ending at t_train.

    tau_i = round(i * t_train / s), computed in exact integer arithmetic
    (half-up); rounding collisions collapse by deduplication, so the plan may
    be shorter than s. The last timestep is always t_train.
    """
    t_train, s = int(t_train), int(s)
    if t_train < 1:
        raise ValueError(f"t_train must be >= 1, got {t_train}")
    if not 1 <= s <= t_train:
        raise ValueError(f"plan length {s} outside 1..{t_train}")
    steps: list[int] = []
    for i in range(1, s + 1):
        tau = (2 * i * t_train + s) // (2 * s)
        if not steps or tau > steps[-1]:
            steps.append(tau)
    return TimestepPlan(tuple(steps))


def diffuse(x0: np.ndarray, t: int, eps: np.ndarray, schedule: AlphaBarSchedule) -> np.ndarray:
    """Closed-form noising: sqrt(ab_t) * x0 + sqrt(1 - ab_t) * eps.

    At t = 0 this returns a copy of x0 bit-exactly, for every eps.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise ValueError(f"x0/eps shape mismatch: {x0.shape} vs {eps.shape}")
    t = int(t)
    if t == 0:
        return x0.copy()
    ab = schedule.at(t)
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * eps


def load_schedule_toml(path) -> dict:
    """Read schedule settings from a TOML file, applying defaults.

    Recognized keys: t_train (int), beta_start, beta_end (floats), steps
    (int). Missing keys take the module defaults; unknown keys are rejected
    so typos do not silently fall back to defaults.
    """
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(f"bad schedule config {path}: {exc}") from exc
    known = {
        "t_train": DEFAULT_T_TRAIN,
        "beta_start": DEFAULT_BETA_START,
        "beta_end": DEFAULT_BETA_END,
        "steps": DEFAULT_STEPS,
    }
    unknown = set(doc) - set(known)
    if unknown:
        raise FormatError(f"unknown schedule config keys: {sorted(unknown)}")
    out = dict(known)
    for key, value in doc.items():
        if key in ("t_train", "steps"):
            if not isinstance(value, int) or isinstance(value, bool):
                raise FormatError(f"config key {key} must be an integer")
            out[key] = value
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise FormatError(f"config key {key} must be a number")
            out[key] = float(value)
    return out
