"""Experiment configuration from TOML files with dotted keys.

Keys may be written nested (``[ga]`` / ``population = 30``) or flat
(``ga.population = 30``); both flatten to the same dotted names. Recognized
keys::

    mode                static | dynamic | baseline | sweep-k
    seed                64-bit master seed (required)
    output              output directory
    snapshot_every      generations between snapshot images (0 = final only)
    filter              none | median | gaussian:<sigma>
    denoise_cmd         external denoiser template with {input} and {output}

    object.kind         shapes | random-shapes | grayscale-blocks | file |
                        rectangle | disk | ring | checkerboard
    object.path         graymap path (kind = file)
    object.width, object.height, object.value, object.fill
    object.<geometry>   primitive geometry (top, left, cx, radius, ...)

    ga.population, ga.generations, ga.offspring, ga.k, ga.mode,
    ga.mutation_initial, ga.mutation_final, ga.mutation_decay, ga.fill,
    ga.result_rule, ga.top_q, ga.remeasure_inherited

    noise.kind, noise.sigma

    scene.preset        slide-rotate (slow and fast translation, then rotation)
    scene.phase.<i>.kind     translate | rotate
    scene.phase.<i>.frames, .dx, .dy, .degrees, .cx, .cy
    scene.cold_start    also run every frame from scratch for comparison

    sweep.k             list of weight coefficients
    sweep.seeds         replicate count per k
    sweep.jobs          worker processes

    baseline.measurements   correlation-GI measurement count (default 10x pixels)
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import scenes
from .ga import GaConfig
from .imaging import NoiseModel, as_image
from .pgm import read_pgm

__all__ = ["ExperimentConfig", "ConfigError", "flatten", "read_config", "load_config", "config_from_dict"]

MODES = ("static", "dynamic", "baseline", "sweep-k")
_GA_FIELDS = {f.name for f in dataclasses.fields(GaConfig)}
_PRIMITIVES = ("rectangle", "disk", "ring", "checkerboard")


class ConfigError(ValueError):
    pass


def flatten(doc: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = value
    return out


@dataclass
class ExperimentConfig:
    mode: str
    seed: int
    ga: GaConfig = field(default_factory=GaConfig)
    object: dict[str, Any] = field(default_factory=lambda: {"kind": "shapes"})
    noise: NoiseModel = field(default_factory=NoiseModel)
    phases: list[scenes.MotionPhase] = field(default_factory=list)
    cold_start: bool = False
    snapshot_every: int = 0
    output: str | None = "segi-out"
    filter: str = "median"
    denoise_cmd: str | None = None
    sweep_k: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    sweep_seeds: int = 1
    jobs: int = 1
    baseline_measurements: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.seed is None:
            raise ConfigError("a seed is required")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.mode == "dynamic" and not self.phases:
            raise ConfigError("dynamic mode needs scene.phase.* entries or scene.preset")
        if self.snapshot_every < 0:
            raise ConfigError("snapshot_every must be nonnegative")
        if self.sweep_seeds < 1 or self.jobs < 1:
            raise ConfigError("sweep.seeds and sweep.jobs must be positive")

    def build_object(self) -> np.ndarray:
        spec = dict(self.object)
        kind = spec.pop("kind", "shapes")
        dims = (int(spec.pop("height", 64)), int(spec.pop("width", 64)))
        if kind == "file":
            return as_image(read_pgm(spec["path"]))
        if kind == "shapes":
            return scenes.shapes_object(dims)
        if kind == "random-shapes":
            rng = np.random.default_rng(int(spec.pop("seed", self.seed)))
            return scenes.random_shapes_object(dims, rng, float(spec.pop("fill", 0.15)))
        if kind == "grayscale-blocks":
            return scenes.grayscale_blocks_object(dims)
        if kind in _PRIMITIVES:
            value = float(spec.pop("value", 1.0))
            return scenes.make_primitive(kind, dims, value, **spec)
        raise ConfigError(f"unknown object kind {kind!r}")

    def flat(self) -> dict[str, Any]:
        """Dotted-key view used for the config echo in run summaries."""
        out: dict[str, Any] = {"mode": self.mode, "seed": int(self.seed)}
        out.update({f"object.{k}": v for k, v in sorted(self.object.items())})
        out.update({f"ga.{k}": v for k, v in dataclasses.asdict(self.ga).items()})
        out["noise.kind"] = self.noise.kind
        out["noise.sigma"] = self.noise.sigma
        for i, ph in enumerate(self.phases, 1):
            t = ph.transform
            out[f"scene.phase.{i}.frames"] = ph.frame_count
            if isinstance(t, scenes.Translate):
                out[f"scene.phase.{i}.kind"] = "translate"
                out[f"scene.phase.{i}.dx"] = t.dx
                out[f"scene.phase.{i}.dy"] = t.dy
            else:
                out[f"scene.phase.{i}.kind"] = "rotate"
                out[f"scene.phase.{i}.degrees"] = t.degrees
                if t.center is not None:
                    out[f"scene.phase.{i}.cx"], out[f"scene.phase.{i}.cy"] = t.center
        out.update(
            snapshot_every=self.snapshot_every,
            filter=self.filter,
            denoise_cmd=self.denoise_cmd or "",
        )
        if self.mode == "sweep-k":
            out.update({"sweep.k": list(self.sweep_k), "sweep.seeds": self.sweep_seeds})
        if self.mode == "baseline":
            out["baseline.measurements"] = self.baseline_measurements or ""
        return out


def _phases(flat: dict[str, Any]) -> list[scenes.MotionPhase]:
    preset = flat.pop("scene.preset", None)
    indices = sorted(
        {int(k.split(".")[2]) for k in flat if k.startswith("scene.phase.")}
    )
    phases = []
    for i in indices:
        p = f"scene.phase.{i}."
        kind = flat.pop(p + "kind", "translate")
        frames = int(flat.pop(p + "frames", 1))
        if kind == "translate":
            t = scenes.Translate(float(flat.pop(p + "dx", 0.0)), float(flat.pop(p + "dy", 0.0)))
        elif kind == "rotate":
            cx, cy = flat.pop(p + "cx", None), flat.pop(p + "cy", None)
            center = None if cx is None or cy is None else (float(cx), float(cy))
            t = scenes.Rotate(float(flat.pop(p + "degrees", 0.0)), center)
        else:
            raise ConfigError(f"unknown motion kind {kind!r} in scene.phase.{i}")
        phases.append(scenes.MotionPhase(frames, t))
    if preset == "slide-rotate" and not phases:
        phases = scenes.three_phase_motion()
    elif preset not in (None, "slide-rotate"):
        raise ConfigError(f"unknown scene preset {preset!r}")
    return phases


def config_from_dict(doc: dict, **overrides) -> ExperimentConfig:
    """Build a config from a (possibly nested) mapping; ``overrides`` win."""
    flat = flatten(doc)
    flat.update({k: v for k, v in overrides.items() if v is not None})
    ga_kw = {}
    for key in [k for k in flat if k.startswith("ga.")]:
        name = key[3:]
        if name not in _GA_FIELDS:
            raise ConfigError(f"unknown key {key}")
        ga_kw[name] = flat.pop(key)
    obj = {k[7:]: flat.pop(k) for k in [k for k in flat if k.startswith("object.")]}
    noise = NoiseModel(flat.pop("noise.kind", "none"), float(flat.pop("noise.sigma", 0.0)))
    phases = _phases(flat)
    k_list = flat.pop("sweep.k", [1, 2, 3, 4])
    try:
        cfg = ExperimentConfig(
            mode=flat.pop("mode", "static"),
            seed=flat.pop("seed", None),
            ga=GaConfig(**ga_kw),
            object=obj or {"kind": "shapes"},
            noise=noise,
            phases=phases,
            cold_start=bool(flat.pop("scene.cold_start", False)),
            snapshot_every=int(flat.pop("snapshot_every", 0)),
            output=str(flat.pop("output", "segi-out")),
            filter=str(flat.pop("filter", "median")),
            denoise_cmd=flat.pop("denoise_cmd", None) or None,
            sweep_k=[int(k) for k in k_list],
            sweep_seeds=int(flat.pop("sweep.seeds", 1)),
            jobs=int(flat.pop("sweep.jobs", 1)),
            baseline_measurements=flat.pop("baseline.measurements", None),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    if flat:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(flat))}")
    return cfg


def read_config(path: str | Path) -> dict:
    with open(path, "rb") as f:
        return tomllib.load(f)


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    return config_from_dict(read_config(path), **overrides)
