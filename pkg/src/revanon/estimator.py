"""Scikit-learn style front end for the anonymization pipeline."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import pipeline
from .exceptions import DimsMismatchError
from .keying import SecretKey, keygen, load_key
from .mask import full_mask, load_pixel_mask
from .validation import check_image, check_pixel_mask


class ReversibleAnonymizer(BaseEstimator, TransformerMixin):
    """Key-conditioned reversible image anonymizer.

    `transform` anonymizes images and `inverse_transform` recovers them
    with the same key. Images are uint8 arrays of shape (C, H, W) or
    batches (N, C, H, W).

    Parameters
    ----------
    key : SecretKey, path, or None
        Secret key. None generates a fresh random key at fit time
        (retrievable as `key_`, without which recovery is impossible).
    mask : ndarray (H, W), path, or None
        Region to anonymize; None covers the whole image.
    t_train : int
        Training timestep count of the noise-decay schedule.
    beta_start, beta_end : float
        Linear noise-rate range of the schedule.
    steps : int
        Inference timestep count (plan length).
    predictor : str or NoisePredictor
        Noise predictor spec: `zero`, `gaussian:mu=<real>,sigma=<real>`,
        `file:<path>`, or an instance.
    codec : str
        Image/latent codec; only "identity" ships.

    Attributes
    ----------
    key_ : SecretKey
        Resolved key in effect.
    pixel_mask_ : ndarray of bool, shape (H, W)
        Resolved mask in effect.
    image_shape_ : tuple
        (C, H, W) accepted by transform.
    config_ : PipelineConfig
        Resolved pipeline configuration.
    """

    def __init__(
        self,
        key=None,
        mask=None,
        t_train=1000,
        beta_start=1e-4,
        beta_end=0.02,
        steps=50,
        predictor="zero",
        codec="identity",
    ):
        self.key = key
        self.mask = mask
        self.t_train = t_train
        self.beta_start = beta_start
        self.beta_end = beta_end
        self.steps = steps
        self.predictor = predictor
        self.codec = codec

    def _first_image(self, X) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim == 4:
            if X.shape[0] < 1:
                raise ValueError("empty image batch")
            return check_image(X[0])
        return check_image(X)

    def fit(self, X, y=None):
        """Resolve key, mask, and configuration against X's image geometry."""
        img = self._first_image(X)
        self.image_shape_ = img.shape

        self.config_ = pipeline.PipelineConfig(
            t_train=self.t_train,
            beta_start=self.beta_start,
            beta_end=self.beta_end,
            steps=self.steps,
            predictor=self.predictor,
            codec=self.codec,
        )
        _, _, _, codec = self.config_.resolve()
        latent_shape = codec.latent_shape_for(img.shape)

        if self.key is None:
            self.key_ = keygen(latent_shape)
        elif isinstance(self.key, SecretKey):
            self.key_ = self.key
        else:
            self.key_ = load_key(self.key)
        if self.key_.dims != latent_shape:
            raise DimsMismatchError(
                f"key/latent dims mismatch: key {self.key_.dims} vs latent {latent_shape}"
            )

        if self.mask is None:
            self.pixel_mask_ = full_mask(*img.shape[1:])
        elif isinstance(self.mask, (str, bytes)) or hasattr(self.mask, "__fspath__"):
            self.pixel_mask_ = load_pixel_mask(self.mask)
        else:
            self.pixel_mask_ = check_pixel_mask(self.mask)
        if self.pixel_mask_.shape != img.shape[1:]:
            raise DimsMismatchError(
                f"mask {self.pixel_mask_.shape} vs image spatial {img.shape[1:]}"
            )
        return self

    def _apply(self, X, op):
        check_is_fitted(self, "config_")
        X = np.asarray(X)
        if X.ndim == 4:
            return np.stack([self._apply(img, op) for img in X])
        img = check_image(X)
        if img.shape != self.image_shape_:
            raise DimsMismatchError(
                f"image shape {img.shape} differs from fitted {self.image_shape_}"
            )
        return op(img)

    def transform(self, X) -> np.ndarray:
        """Anonymize; unmasked pixels pass through unchanged."""
        return self._apply(
            X, lambda img: pipeline.anonymize(img, self.key_, self.pixel_mask_, self.config_)
        )

    def inverse_transform(self, X) -> np.ndarray:
        """Recover originals from anonymized images using the fitted key."""
        return self._apply(
            X, lambda img: pipeline.deanonymize(img, self.key_, self.pixel_mask_, self.config_)
        )

    def reconstruct(self, X) -> np.ndarray:
        """Keyless round trip, for measuring the deterministic pass alone."""
        return self._apply(X, lambda img: pipeline.reconstruct(img, self.config_))
