"""
Grayscale patterns and objects
===============================

In grayscale mode pixels take any value in [0, 1], mutation redraws a
pixel instead of flipping it, and pattern weight is the sum of squared
intensities.
"""

import numpy as np

from segi import GaConfig, evolve, gaussian_blur, psnr, write_pgm
from segi.scenes import grayscale_blocks_object

obj = grayscale_blocks_object()
print("distinct object levels:", np.unique(obj))

config = GaConfig(population=30, generations=1500, mode="grayscale")
print(f"k defaults to {config.k} in this mode")

trace = evolve(config, obj, rng=np.random.default_rng(1))
smooth = gaussian_blur(trace.result, 1.0)
print(f"raw {psnr(obj, trace.result):.2f} dB, blurred {psnr(obj, smooth):.2f} dB")

write_pgm("grayscale_result.pgm", trace.result)
