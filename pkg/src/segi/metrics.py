"""Image quality metrics: PSNR and SSIM."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["SsimParams", "psnr", "ssim", "ssim_window"]


def _pair(reference, test):
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image dims differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(reference, test, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB. Identical images give ``math.inf``."""
    a, b = _pair(reference, test)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


@dataclass(frozen=True)
class SsimParams:
    window: str = "gaussian"  # "gaussian" (11x11, sigma 1.5) or "uniform" (8x8)
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window not in ("gaussian", "uniform"):
            raise ValueError(f"unknown SSIM window {self.window!r}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("SSIM constants k1, k2 must be positive")


def _window_1d(kind: str) -> np.ndarray:
    if kind == "uniform":
        return np.full(8, 1.0 / 8.0)
    x = np.arange(11) - 5.0
    g = np.exp(-(x**2) / (2 * 1.5**2))
    return g / g.sum()


def ssim_window(kind: str = "gaussian") -> np.ndarray:
    """Normalized 2-D SSIM weighting window (8x8 uniform or 11x11 Gaussian)."""
    g = _window_1d(kind)
    return np.outer(g, g)


def ssim(reference, test, params: SsimParams = SsimParams()) -> float:
    """Mean structural similarity over all fully contained windows.

    Local statistics use the weighted (population) moments of each window.
    """
    a, b = _pair(reference, test)
    g = _window_1d(params.window)
    n = len(g)
    if a.ndim != 2 or a.shape[0] < n or a.shape[1] < n:
        raise ValueError(f"image must be at least {n}x{n} for SSIM")
    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2

    def local(x):
        # separable weighted mean over each full window position
        rows = np.einsum("ijk,k->ij", sliding_window_view(x, n, axis=0), g)
        return np.einsum("ijk,k->ij", sliding_window_view(rows, n, axis=1), g)

    mu_a, mu_b = local(a), local(b)
    var_a = local(a * a) - mu_a**2
    var_b = local(b * b) - mu_b**2
    cov = local(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))
