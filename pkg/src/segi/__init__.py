"""Self-evolving ghost imaging: genetic evolution of illumination patterns
from single-pixel measurements, with a correlation-imaging baseline."""
from .baseline import MeasurementSet, correlate, correlate_raw, run_traditional_gi
from .filters import gaussian_blur, median_filter_3x3
from .ga import (
    CfBaseline,
    DegenerateBaselineError,
    EvolutionTrace,
    GaConfig,
    evolve,
    init_population,
    step_generation,
    warm_start,
)
from .imaging import NoiseModel, measure_bucket, pattern_weight, random_pattern
from .metrics import SsimParams, psnr, ssim
from .pgm import read_pgm, write_pgm

__version__ = "0.1.0"
