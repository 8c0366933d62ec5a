"""Post-filters for evolved images, plus a hook for external denoisers."""
from __future__ import annotations

import math
import os
import shlex
import subprocess
import tempfile

import numpy as np
from scipy import ndimage

from .pgm import read_pgm, write_pgm

__all__ = ["median_filter_3x3", "gaussian_kernel", "gaussian_blur", "external_denoise", "make_filter"]


def median_filter_3x3(image) -> np.ndarray:
    """3x3 median filter with edge replication at the borders."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < 3:
        raise ValueError("median filter needs an image of at least 3x3")
    return ndimage.median_filter(img, size=3, mode="nearest")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian kernel with radius ``ceil(3*sigma)``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2 * sigma**2))
    return k / k.sum()


def gaussian_blur(image, sigma: float) -> np.ndarray:
    """Separable Gaussian blur, edge replication, output clipped to [0, 1]."""
    img = np.asarray(image, dtype=np.float64)
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(img, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return np.clip(out, 0.0, 1.0)


def external_denoise(image, command: str, *, timeout: float | None = None) -> np.ndarray:
    """Round-trip ``image`` through an external denoiser command.

    ``command`` is a template with ``{input}`` and ``{output}`` placeholders
    that are filled with paths of binary PGM files, e.g.
    ``"bm3d-cli --sigma 60 {input} {output}"``. The command must write the
    denoised image to ``{output}``.
    """
    if "{input}" not in command or "{output}" not in command:
        raise ValueError("denoise command needs {input} and {output} placeholders")
    with tempfile.TemporaryDirectory(prefix="segi-denoise-") as tmp:
        src = os.path.join(tmp, "input.pgm")
        dst = os.path.join(tmp, "output.pgm")
        write_pgm(src, image)
        cmd = command.format(input=shlex.quote(src), output=shlex.quote(dst))
        subprocess.run(cmd, shell=True, check=True, timeout=timeout)
        return read_pgm(dst)


def make_filter(spec: str | None, denoise_cmd: str | None = None):
    """Build a post-filter callable from ``none``, ``median`` or ``gaussian:<sigma>``.

    A denoise command, when given, replaces the named filter.
    """
    if denoise_cmd:
        return lambda img: external_denoise(img, denoise_cmd)
    if spec is None or spec == "none":
        return None
    if spec == "median":
        return median_filter_3x3
    if spec.startswith("gaussian:"):
        sigma = float(spec.split(":", 1)[1])
        gaussian_kernel(sigma)
        return lambda img: gaussian_blur(img, sigma)
    raise ValueError(f"unknown filter {spec!r}; expected none, median or gaussian:<sigma>")
