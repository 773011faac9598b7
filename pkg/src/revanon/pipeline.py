"""End-to-end anonymization flows.

anonymize: encode the image, invert it deterministically to its noise
endpoint, sign-flip the masked endpoint coordinates with the secret key,
then generate back down while re-injecting the recorded trajectory outside
the mask, and decode. deanonymize is the same procedure run on the
anonymized image: the sign flip is an involution, so the correct key
restores the masked content while re-injection preserves everything else.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .codec import ImageCodec, get_codec
from .ddim import generate, invert
from .exceptions import DimsMismatchError
from .keying import SecretKey, apply_key_masked
from .mask import downscale_to_latent
from .predictor import NoisePredictor, predictor_from_spec
from .schedule import (
    DEFAULT_BETA_END,
    DEFAULT_BETA_START,
    DEFAULT_STEPS,
    DEFAULT_T_TRAIN,
    AlphaBarSchedule,
    TimestepPlan,
    build_linear_beta_schedule,
    build_timestep_plan,
    load_schedule_toml,
)
from .validation import check_image, check_pixel_mask


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs besides the image, key, and mask.

    `predictor` is either a spec string (`zero`,
    `gaussian:mu=<real>,sigma=<real>`, `file:<path>`) or a NoisePredictor
    instance.
    """

    t_train: int = DEFAULT_T_TRAIN
    beta_start: float = DEFAULT_BETA_START
    beta_end: float = DEFAULT_BETA_END
    steps: int = DEFAULT_STEPS
    predictor: str | NoisePredictor = "zero"
    codec: str = "identity"

    @classmethod
    def from_toml(cls, path, **overrides) -> "PipelineConfig":
        """Load schedule settings from TOML; keyword overrides win."""
        settings = load_schedule_toml(path)
        settings.update(overrides)
        return cls(**settings)

    def resolve(self) -> tuple[AlphaBarSchedule, TimestepPlan, NoisePredictor, ImageCodec]:
        schedule = build_linear_beta_schedule(self.t_train, self.beta_start, self.beta_end)
        plan = build_timestep_plan(self.t_train, self.steps)
        predictor = predictor_from_spec(self.predictor, schedule)
        return schedule, plan, predictor, get_codec(self.codec)


def _check_geometry(image, key: SecretKey, pixel_mask, codec: ImageCodec):
    image = check_image(image)
    pixel_mask = check_pixel_mask(pixel_mask)
    if pixel_mask.shape != image.shape[1:]:
        raise DimsMismatchError(
            f"mask {pixel_mask.shape} vs image spatial {image.shape[1:]}"
        )
    latent_shape = codec.latent_shape_for(image.shape)
    if key.dims != latent_shape:
        raise DimsMismatchError(
            f"key/latent dims mismatch: key {key.dims} vs latent {latent_shape}"
        )
    return image, pixel_mask, latent_shape


def _keyed_pass(image, key, pixel_mask, config: PipelineConfig) -> np.ndarray:
    schedule, plan, predictor, codec = config.resolve()
    image, pixel_mask, latent_shape = _check_geometry(image, key, pixel_mask, codec)
    z0 = codec.encode(image)
    trajectory = invert(z0, plan, predictor, schedule)
    mask_z = downscale_to_latent(pixel_mask, latent_shape[1], latent_shape[2])
    z_end = apply_key_masked(trajectory.endpoint, key, mask_z)
    z_out = generate(z_end, plan, predictor, schedule, reinjection=(trajectory, mask_z))
    return codec.decode(z_out)


def anonymize(image, key: SecretKey, pixel_mask, config: PipelineConfig) -> np.ndarray:
    """Produce the anonymized image; unmasked pixels are preserved exactly."""
    return _keyed_pass(image, key, pixel_mask, config)


def deanonymize(image, key: SecretKey, pixel_mask, config: PipelineConfig) -> np.ndarray:
    """Undo `anonymize` given the same key and mask.

    Runs the identical keyed pass on the anonymized image: flipping the
    masked endpoint signs a second time cancels the first flip, so only a
    wrong key yields a wrong face.
    """
    return _keyed_pass(image, key, pixel_mask, config)


def reconstruct(image, config: PipelineConfig) -> np.ndarray:
    """Keyless, maskless round trip: invert then generate, then decode.

    Measures how faithfully the deterministic pass reproduces its input.
    """
    schedule, plan, predictor, codec = config.resolve()
    image = check_image(image)
    z0 = codec.encode(image)
    trajectory = invert(z0, plan, predictor, schedule)
    return codec.decode(generate(trajectory.endpoint, plan, predictor, schedule))


@dataclass(frozen=True)
class RoundtripReport:
    """Recovery-error metrics of deanonymize(anonymize(image)) vs the original.

    The masked/unmasked split uses the pixel mask; with the identity codec
    the latent mask covers exactly the same region. Region metrics are None
    when the region is empty. PSNR is +inf for an exact match.
    """

    mse: float
    psnr: float
    max_abs_err: float
    masked_mse: float | None
    masked_psnr: float | None
    masked_max_abs_err: float | None
    unmasked_mse: float | None
    unmasked_psnr: float | None
    unmasked_max_abs_err: float | None
    masked_fraction: float
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["warnings"] = list(self.warnings)
        return out


def _region_metrics(original, recovered, region_mask):
    if not region_mask.any():
        return None, None, None
    return (
        diagnostics.mse(recovered, original, mask=region_mask),
        diagnostics.psnr(recovered, original, mask=region_mask),
        diagnostics.max_abs_error(recovered, original, mask=region_mask),
    )


def roundtrip_report(image, key: SecretKey, pixel_mask, config: PipelineConfig) -> RoundtripReport:
    """Anonymize, de-anonymize with the same key, and measure recovery error."""
    image = check_image(image)
    pixel_mask = check_pixel_mask(pixel_mask)
    anonymized = anonymize(image, key, pixel_mask, config)
    recovered = deanonymize(anonymized, key, pixel_mask, config)

    warnings = []
    if not pixel_mask.any():
        warnings.append("no-op anonymization: mask selects no pixels")
    masked = _region_metrics(image, recovered, pixel_mask)
    unmasked = _region_metrics(image, recovered, ~pixel_mask)
    return RoundtripReport(
        mse=diagnostics.mse(recovered, image),
        psnr=diagnostics.psnr(recovered, image),
        max_abs_err=diagnostics.max_abs_error(recovered, image),
        masked_mse=masked[0],
        masked_psnr=masked[1],
        masked_max_abs_err=masked[2],
        unmasked_mse=unmasked[0],
        unmasked_psnr=unmasked[1],
        unmasked_max_abs_err=unmasked[2],
        masked_fraction=float(np.mean(pixel_mask)),
        warnings=tuple(warnings),
    )


def report_to_json(report: RoundtripReport) -> str:
    """Serialize a report; +inf PSNR becomes the string "inf" for portability."""
    import json

    def _clean(value):
        if isinstance(value, float) and math.isinf(value):
            return "inf"
        return value

    return json.dumps({k: _clean(v) for k, v in report.to_dict().items()}, indent=2)
