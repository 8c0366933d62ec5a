"""Image representation and the single-pixel (bucket) detector forward model.

Images are plain 2-D ``float64`` numpy arrays of shape ``(height, width)``
holding intensities in ``[0, 1]``. The same representation is used for
objects, illumination patterns and reconstructions. Stacks of patterns are
3-D arrays of shape ``(count, height, width)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseModel",
    "as_image",
    "is_binary",
    "measure_bucket",
    "measure_buckets",
    "random_pattern",
    "random_patterns",
    "pattern_weight",
    "pattern_weights",
]


def as_image(data, *, binary: bool = False, copy: bool = True) -> np.ndarray:
    """Validate ``data`` as an image and return it as a float64 array.

    Raises:
        ValueError: if the array is not 2-D, is empty, has pixels outside
            ``[0, 1]``, or (when ``binary``) has pixels other than 0 and 1.
    """
    img = np.array(data, dtype=np.float64, copy=copy)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"image must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image pixels must lie in [0, 1]")
    if binary and not is_binary(img):
        raise ValueError("binary image must contain only 0 and 1")
    return img


def is_binary(img: np.ndarray) -> bool:
    return bool(np.all((img == 0.0) | (img == 1.0)))


@dataclass(frozen=True)
class NoiseModel:
    """Detector noise. ``sigma`` is in the units of the noiseless bucket signal."""

    kind: str = "none"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "additive-gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not self.sigma >= 0.0:
            raise ValueError("noise sigma must be nonnegative")

    @property
    def active(self) -> bool:
        return self.kind == "additive-gaussian" and self.sigma > 0.0


NOISELESS = NoiseModel()


def _check_dims(pattern_shape, object_shape):
    if tuple(pattern_shape) != tuple(object_shape):
        raise ValueError(
            f"pattern dims {tuple(pattern_shape)} do not match object dims {tuple(object_shape)}"
        )


def measure_buckets(
    patterns: np.ndarray,
    obj: np.ndarray,
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Bucket signals for a stack of patterns, shape ``(count,)``.

    Each signal is the discrete overlap ``sum(pattern * object)``. With
    additive Gaussian noise one normal draw is taken per pattern, in stack
    order, and the result is clamped at zero.
    """
    patterns = np.asarray(patterns, dtype=np.float64)
    if patterns.ndim != 3:
        raise ValueError("patterns must be a (count, height, width) stack")
    _check_dims(patterns.shape[1:], np.shape(obj))
    signals = np.einsum("kij,ij->k", patterns, obj)
    if noise.active:
        if rng is None:
            raise ValueError("a random generator is required for noisy measurements")
        signals = np.maximum(signals + rng.normal(0.0, noise.sigma, size=signals.shape), 0.0)
    return signals


def measure_bucket(
    pattern: np.ndarray,
    obj: np.ndarray,
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
) -> float:
    """Single bucket measurement of ``obj`` under illumination ``pattern``.

    >>> measure_bucket(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([[1.0, 1.0], [0.0, 1.0]]))
    2.0
    """
    pattern = np.asarray(pattern, dtype=np.float64)
    _check_dims(pattern.shape, np.shape(obj))
    return float(measure_buckets(pattern[None], obj, noise, rng)[0])


def random_patterns(
    count: int,
    height: int,
    width: int,
    rng: np.random.Generator,
    mode: str = "binary",
    fill: float = 0.5,
) -> np.ndarray:
    """Stack of ``count`` independent random patterns.

    Binary patterns switch each pixel on with probability ``fill``;
    grayscale patterns draw each pixel uniformly from ``[0, 1]``.
    """
    if height < 1 or width < 1:
        raise ValueError("pattern dims must be at least 1x1")
    shape = (count, height, width)
    if mode == "binary":
        if not 0.0 < fill < 1.0:
            raise ValueError(f"binary fill must lie in (0, 1), got {fill}")
        return (rng.random(shape) < fill).astype(np.float64)
    if mode == "grayscale":
        return rng.random(shape)
    raise ValueError(f"unknown pattern mode {mode!r}")


def random_pattern(
    width: int,
    height: int,
    rng: np.random.Generator,
    mode: str = "binary",
    fill: float = 0.5,
) -> np.ndarray:
    return random_patterns(1, height, width, rng, mode, fill)[0]


def pattern_weights(patterns: np.ndarray, order: int = 1) -> np.ndarray:
    """Per-pattern ``sum(pixel ** order)`` over a stack."""
    if order not in (1, 2):
        raise ValueError(f"weight order must be 1 or 2, got {order}")
    patterns = np.asarray(patterns, dtype=np.float64)
    if order == 1:
        return patterns.sum(axis=(-2, -1))
    return np.square(patterns).sum(axis=(-2, -1))


def pattern_weight(pattern: np.ndarray, order: int = 1) -> float:
    """Total pattern weight: pixel sum (order 1) or sum of squares (order 2)."""
    return float(pattern_weights(pattern, order))
