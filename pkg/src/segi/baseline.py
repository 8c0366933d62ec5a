"""Conventional correlation ghost imaging, used as the reference method."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import NOISELESS, NoiseModel, measure_buckets, random_patterns

__all__ = ["MeasurementSet", "correlate_raw", "correlate", "normalize", "run_traditional_gi"]


@dataclass(frozen=True)
class MeasurementSet:
    patterns: np.ndarray  # (count, height, width)
    signals: np.ndarray  # (count,)

    def __post_init__(self):
        patterns = np.asarray(self.patterns, dtype=np.float64)
        signals = np.asarray(self.signals, dtype=np.float64)
        if patterns.ndim != 3:
            raise ValueError("patterns must be a (count, height, width) stack")
        if signals.shape != (patterns.shape[0],):
            raise ValueError("need exactly one signal per pattern")
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "signals", signals)

    def __len__(self):
        return len(self.signals)


def correlate_raw(mset: MeasurementSet) -> np.ndarray:
    """Per-pixel covariance ``<S I(x,y)> - <S><I(x,y)>`` over the ensemble."""
    if len(mset) < 2:
        raise ValueError("correlation needs at least 2 measurements")
    s = mset.signals
    mean_si = np.tensordot(s, mset.patterns, axes=1) / len(s)
    return mean_si - s.mean() * mset.patterns.mean(axis=0)


def normalize(raw: np.ndarray, atol: float = 0.0) -> np.ndarray:
    """Min-max scale to [0, 1]; a spread of ``atol`` or less maps to all zeros."""
    lo, hi = raw.min(), raw.max()
    if hi - lo <= atol:
        return np.zeros_like(raw)
    return (raw - lo) / (hi - lo)


def correlate(mset: MeasurementSet) -> np.ndarray:
    """Correlation reconstruction scaled to [0, 1] for export.

    Spreads at rounding level relative to ``<|S|><I>`` count as flat.
    """
    scale = np.abs(mset.signals).mean() * np.abs(mset.patterns).mean()
    return normalize(correlate_raw(mset), atol=1e-12 * scale)


def run_traditional_gi(
    obj: np.ndarray,
    n_measurements: int,
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
    fill: float = 0.5,
):
    """Illuminate ``obj`` with random binary patterns and correlate.

    Returns the normalized reconstruction and the measurement set.
    """
    if n_measurements < 2:
        raise ValueError("traditional GI needs at least 2 measurements")
    rng = np.random.default_rng() if rng is None else rng
    obj = np.asarray(obj, dtype=np.float64)
    patterns = random_patterns(n_measurements, obj.shape[0], obj.shape[1], rng, "binary", fill)
    mset = MeasurementSet(patterns, measure_buckets(patterns, obj, noise, rng))
    return correlate(mset), mset
