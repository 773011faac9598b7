"""Deterministic diffusion stepping, inversion, and generation.

A single step between timesteps (t_lo, t_hi) is the noiseless update

    x_hat_0 = (x - sqrt(1 - ab_src) * eps) / sqrt(ab_src)
    x_dst   = sqrt(ab_dst) * x_hat_0 + sqrt(1 - ab_dst) * eps

applied toward smaller t (generation) or larger t (inversion). Both
directions evaluate the predictor at the larger timestep of the pair:
a backward step uses its source timestep, a forward step its target.
A forward step and the backward step that retraces it therefore consume
the same predictor row, so for predictors that ignore the state the two
steps are exact mutual inverses, and inversion followed by generation
reproduces the input up to rounding.

The update has an equivalent gain/offset form,

    x_dst = sqrt(ab_dst / ab_src) * x
          + sqrt(ab_dst) * (sqrt(1/ab_dst - 1) - sqrt(1/ab_src - 1)) * eps,

kept alongside as an internal cross-check of the algebra.
"""

import numpy as np

from .exceptions import DimsMismatchError
from .predictor import NoisePredictor
from .schedule import AlphaBarSchedule, TimestepPlan
from .validation import check_finite, check_latent


class Trajectory:
    """Latents recorded at every plan anchor 0 = tau_0 < tau_1 < ... < tau_S.

    Immutable once built; the final entry is the noise-endpoint latent.
    """

    def __init__(self, timesteps, latents):
        timesteps = tuple(int(t) for t in timesteps)
        latents = tuple(np.asarray(z, dtype=np.float64) for z in latents)
        if len(timesteps) != len(latents) or len(timesteps) < 2:
            raise ValueError("trajectory needs matching timesteps/latents, >= 2 entries")
        if timesteps[0] != 0:
            raise ValueError("trajectory must start at timestep 0")
        if any(b <= a for a, b in zip(timesteps, timesteps[1:])):
            raise ValueError("trajectory timesteps must be strictly increasing")
        shape = latents[0].shape
        if any(z.shape != shape for z in latents):
            raise ValueError("trajectory latents must share one shape")
        for z in latents:
            z.flags.writeable = False
        self.timesteps = timesteps
        self.latents = latents
        self._by_t = dict(zip(timesteps, latents))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.latents[0].shape

    @property
    def endpoint(self) -> np.ndarray:
        """The latent at the largest timestep (the noise end)."""
        return self.latents[-1]

    def latent_at(self, t: int) -> np.ndarray:
        try:
            return self._by_t[int(t)]
        except KeyError:
            raise KeyError(f"trajectory has no entry at timestep {t}") from None

    def __len__(self) -> int:
        return len(self.timesteps)


def _step_x0form(x: np.ndarray, ab_src: float, ab_dst: float, eps: np.ndarray) -> np.ndarray:
    x0_hat = (x - np.sqrt(1.0 - ab_src) * eps) / np.sqrt(ab_src)
    if ab_dst == 1.0:
        return x0_hat
    return np.sqrt(ab_dst) * x0_hat + np.sqrt(1.0 - ab_dst) * eps


def _step_gain_offset(x: np.ndarray, ab_src: float, ab_dst: float, eps: np.ndarray) -> np.ndarray:
    gain = np.sqrt(ab_dst / ab_src)
    offset = np.sqrt(ab_dst) * (np.sqrt(1.0 / ab_dst - 1.0) - np.sqrt(1.0 / ab_src - 1.0))
    return gain * x + offset * eps


def backward_step(
    x_t: np.ndarray,
    t: int,
    t_prev: int,
    predictor: NoisePredictor,
    schedule: AlphaBarSchedule,
) -> np.ndarray:
    """One generation step from timestep t down to t_prev < t.

    The predictor is evaluated at (x_t, t). At t_prev = 0 the step returns
    the denoised estimate x_hat_0 itself.
    """
    t, t_prev = int(t), int(t_prev)
    if not 0 <= t_prev < t <= schedule.t_train:
        raise ValueError(f"need 0 <= t_prev < t <= {schedule.t_train}, got {t_prev}, {t}")
    x_t = np.asarray(x_t, dtype=np.float64)
    eps = predictor.predict(x_t, t)
    if eps.shape != x_t.shape:
        raise DimsMismatchError(f"predictor output {eps.shape} vs latent {x_t.shape}")
    out = _step_x0form(x_t, schedule.at(t), schedule.at(t_prev), eps)
    return check_finite(out, f"backward step {t} -> {t_prev}")


def forward_step(
    x_t: np.ndarray,
    t: int,
    t_next: int,
    predictor: NoisePredictor,
    schedule: AlphaBarSchedule,
) -> np.ndarray:
    """One inversion step from timestep t up to t_next > t.

    The predictor is evaluated at (x_t, t_next): the current state, but the
    coefficient row of the pair's larger timestep, mirroring backward_step
    so round trips cancel (see module docstring).
    """
    t, t_next = int(t), int(t_next)
    if not 0 <= t < t_next <= schedule.t_train:
        raise ValueError(f"need 0 <= t < t_next <= {schedule.t_train}, got {t}, {t_next}")
    x_t = np.asarray(x_t, dtype=np.float64)
    eps = predictor.predict(x_t, t_next)
    if eps.shape != x_t.shape:
        raise DimsMismatchError(f"predictor output {eps.shape} vs latent {x_t.shape}")
    out = _step_x0form(x_t, schedule.at(t), schedule.at(t_next), eps)
    return check_finite(out, f"forward step {t} -> {t_next}")


def invert(
    z0: np.ndarray,
    plan: TimestepPlan,
    predictor: NoisePredictor,
    schedule: AlphaBarSchedule,
) -> Trajectory:
    """Run the deterministic forward pass 0 -> tau_1 -> ... -> tau_S.

    Records the latent at every anchor; the final entry is the noise
    endpoint z_T associated with z0.
    """
    z0 = check_latent(z0, "z0")
    if plan.steps[-1] > schedule.t_train:
        raise ValueError(f"plan reaches {plan.steps[-1]} beyond t_train {schedule.t_train}")
    anchors = plan.anchors
    latents = [z0.copy()]
    x = z0
    for t, t_next in zip(anchors, anchors[1:]):
        x = forward_step(x, t, t_next, predictor, schedule)
        latents.append(x)
    return Trajectory(anchors, latents)


def generate(
    z_end: np.ndarray,
    plan: TimestepPlan,
    predictor: NoisePredictor,
    schedule: AlphaBarSchedule,
    reinjection: tuple[Trajectory, np.ndarray] | None = None,
) -> np.ndarray:
    """Run the deterministic backward pass tau_S -> ... -> tau_1 -> 0.

    With `reinjection` = (trajectory, latent_mask), after every step
    (including the final one to t = 0) the coordinates outside the mask are
    replaced by the trajectory's recorded latent at that timestep, so
    content there is preserved exactly. Masked coordinates evolve freely.
    """
    x = check_latent(z_end, "z_end")
    if plan.steps[-1] > schedule.t_train:
        raise ValueError(f"plan reaches {plan.steps[-1]} beyond t_train {schedule.t_train}")
    anchors = plan.anchors
    mask = trajectory = None
    if reinjection is not None:
        trajectory, mask = reinjection
        if trajectory.timesteps != anchors:
            raise ValueError(
                f"trajectory anchors {trajectory.timesteps} do not match plan {anchors}"
            )
        if trajectory.shape != x.shape:
            raise DimsMismatchError(f"trajectory {trajectory.shape} vs latent {x.shape}")
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != x.shape[1:]:
            raise DimsMismatchError(f"mask {mask.shape} vs latent spatial {x.shape[1:]}")
    for t, t_prev in zip(anchors[:0:-1], anchors[-2::-1]):
        x = backward_step(x, t, t_prev, predictor, schedule)
        if reinjection is not None:
            x = np.where(mask, x, trajectory.latent_at(t_prev))
    return x
