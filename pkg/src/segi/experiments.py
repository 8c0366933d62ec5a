"""Experiment runners behind the command line: static, dynamic, baseline, k-sweep.

Seeding: every run draws from ``SeedSequence(seed, spawn_key=(experiment,
frame))``. Static runs use ``(0, 0)``; dynamic frame ``i`` (0-based) uses
``(0, i)`` and its cold-start comparison ``(1, i)``; sweep replicate ``r``
uses ``(r, 0)`` for every k, so replicate 0 of a sweep reproduces a static
run and results do not depend on execution order or worker count.

All written files (CSV, PGM, summary) are byte-for-byte reproducible from
the configuration; wall-clock timings are only logged.
"""
from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .baseline import correlate_raw, run_traditional_gi
from .config import ExperimentConfig
from .filters import make_filter
from .ga import EvolutionTrace, GaConfig, evolve, warm_start
from .imaging import is_binary
from .metrics import psnr, ssim
from .pgm import write_pgm
from .scenes import SceneSpec, generate_frames

__all__ = [
    "RunReport",
    "TRACE_HEADER",
    "substream",
    "sampling_ratio",
    "report_sampling_ratio",
    "format_ratio",
    "run_static",
    "run_dynamic",
    "run_baseline",
    "run_sweep_k",
    "write_trace_csv",
]

log = logging.getLogger(__name__)

TRACE_HEADER = [
    "generation",
    "best_cf",
    "mean_cf",
    "cum_measurements",
    "psnr_raw",
    "psnr_filtered",
    "ssim_raw",
    "ssim_filtered",
]
_METRICS = ("psnr_raw", "psnr_filtered", "ssim_raw", "ssim_filtered")


@dataclass
class RunReport:
    sampling_ratio: float  # percent
    measurements: int
    pixels: int
    metrics: dict[str, Optional[float]]
    best_cf: float = math.nan
    frame: Optional[int] = None
    trace_csv: Optional[Path] = None
    snapshots: list[Path] = field(default_factory=list)
    trace: Optional[EvolutionTrace] = field(default=None, repr=False)
    result: Optional[np.ndarray] = field(default=None, repr=False)


def substream(seed: int, experiment: int = 0, frame: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(experiment, frame)))


def sampling_ratio(measurements: int, pixels: int) -> float:
    """Measurements per pixel, in percent."""
    return 100.0 * measurements / pixels


def report_sampling_ratio(ga: GaConfig, pixels: int, *, continuation: bool = False) -> float:
    """Planned sampling ratio of a static run, or of one warm-started frame.

    A static run costs ``N + G*M``. A continuation frame costs ``G*M``, plus
    ``N`` when inherited members are re-measured.
    """
    per_frame = ga.generations * ga.offspring
    if not continuation or ga.remeasure_inherited:
        per_frame += ga.population
    return sampling_ratio(per_frame, pixels)


def format_ratio(percent: float) -> str:
    return f"{percent:.1f}%"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ("inf" if value > 0 else "-inf")
    return str(value)


def write_trace_csv(path: Path, trace: EvolutionTrace, prefix: tuple = ()) -> None:
    """Write generations 1..G of ``trace``; ``prefix`` values lead each row."""
    with open(path, "w", newline="") as f:
        _write_trace_rows(csv.writer(f, lineterminator="\n"), trace, prefix, header=not prefix)


def _write_trace_rows(writer, trace, prefix=(), header=True):
    if header:
        writer.writerow(TRACE_HEADER)
    for r in trace.records[1:]:
        row = [r.generation, r.best_cf, r.mean_cf, r.measurements]
        row += [getattr(r, m) for m in _METRICS]
        writer.writerow([_fmt(v) for v in (*prefix, *row)])


def _final_metrics(trace: EvolutionTrace) -> dict[str, Optional[float]]:
    last = trace.records[-1]
    return {m: getattr(last, m) for m in _METRICS}


def _write_summary(path: Path, cfg: ExperimentConfig, lines: dict) -> None:
    with open(path, "w") as f:
        f.write("# configuration\n")
        for key, value in cfg.flat().items():
            f.write(f"{key} = {value}\n")
        f.write("# results\n")
        for key, value in lines.items():
            f.write(f"{key} = {_fmt(value) if not isinstance(value, str) else value}\n")


def _out_dir(cfg: ExperimentConfig, out: Optional[str | os.PathLike]) -> Optional[Path]:
    target = out if out is not None else cfg.output
    if target is None:
        return None
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_snapshots(directory: Path, trace: EvolutionTrace) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for g, img in sorted(trace.snapshots.items()):
        p = directory / f"gen_{g:06d}.pgm"
        write_pgm(p, img)
        paths.append(p)
    return paths


def _evolve_static(cfg: ExperimentConfig, obj, rng):
    filt = make_filter(cfg.filter, cfg.denoise_cmd)
    t0 = time.perf_counter()
    trace = evolve(cfg.ga, obj, cfg.noise, rng, cfg.snapshot_every, truth=obj, post_filter=filt)
    if cfg.ga.generations:
        dt = (time.perf_counter() - t0) / cfg.ga.generations
        log.info("%.3f ms per generation", 1e3 * dt)
    return trace, filt


def _static_outputs(cfg, obj, trace, filt, out: Optional[Path]) -> RunReport:
    pixels = obj.size
    report = RunReport(
        sampling_ratio=sampling_ratio(trace.state.measurements, pixels),
        measurements=trace.state.measurements,
        pixels=pixels,
        metrics=_final_metrics(trace),
        best_cf=float(trace.population.cfs[0]),
        trace=trace,
        result=trace.result,
    )
    if out is None:
        return report
    report.trace_csv = out / "trace.csv"
    write_trace_csv(report.trace_csv, trace)
    write_pgm(out / "object.pgm", obj)
    write_pgm(out / "result_raw.pgm", trace.result)
    if filt is not None:
        write_pgm(out / "result_filtered.pgm", filt(trace.result))
    if cfg.snapshot_every:
        report.snapshots = _write_snapshots(out / "snapshots", trace)
    _write_summary(
        out / "summary.txt",
        cfg,
        {
            "pixels": pixels,
            "measurements": report.measurements,
            "sampling_ratio": format_ratio(report.sampling_ratio),
            "best_cf": report.best_cf,
            **report.metrics,
        },
    )
    return report


def run_static(cfg: ExperimentConfig, out=None) -> RunReport:
    """Evolve once against a static object and write its outputs.

    ``out`` overrides ``cfg.output``; when both are None nothing is written.
    """
    obj = cfg.build_object()
    trace, filt = _evolve_static(cfg, obj, substream(cfg.seed, 0, 0))
    return _static_outputs(cfg, obj, trace, filt, _out_dir(cfg, out))


def run_dynamic(cfg: ExperimentConfig, out=None) -> list[RunReport]:
    """Image a moving object frame by frame, warm-starting each frame.

    With ``cfg.cold_start`` every frame is also evolved from scratch and the
    cold-start metrics are reported alongside as ``cold_*``.
    """
    base = cfg.build_object()
    frames = generate_frames(SceneSpec(base, cfg.phases, binary=is_binary(base)))
    filt = make_filter(cfg.filter, cfg.denoise_cmd)
    out = _out_dir(cfg, out)
    pixels = base.size
    reports: list[RunReport] = []
    state = None
    rows = []
    for i, frame in enumerate(frames):
        rng = substream(cfg.seed, 0, i)
        initial = None if state is None else warm_start(state, frame, cfg.ga, cfg.noise, rng)
        trace = evolve(
            cfg.ga, frame, cfg.noise, rng, cfg.snapshot_every,
            initial=initial, truth=frame, post_filter=filt,
        )
        state = trace.state
        metrics = _final_metrics(trace)
        if cfg.cold_start:
            cold = evolve(cfg.ga, frame, cfg.noise, substream(cfg.seed, 1, i), truth=frame, post_filter=filt)
            metrics.update({f"cold_{k}": v for k, v in _final_metrics(cold).items()})
        report = RunReport(
            sampling_ratio=sampling_ratio(state.measurements, pixels),
            measurements=state.measurements,
            pixels=pixels,
            metrics=metrics,
            best_cf=float(state.population.cfs[0]),
            frame=i + 1,
            trace=trace,
            result=trace.result,
        )
        rows.append([i + 1, report.measurements, report.sampling_ratio, report.best_cf, *metrics.values()])
        if out is not None:
            tag = f"frame_{i + 1:04d}"
            (out / "traces").mkdir(exist_ok=True)
            (out / "frames").mkdir(exist_ok=True)
            report.trace_csv = out / "traces" / f"{tag}.csv"
            write_trace_csv(report.trace_csv, trace)
            write_pgm(out / "frames" / f"{tag}_object.pgm", frame)
            write_pgm(out / "frames" / f"{tag}_raw.pgm", trace.result)
            if filt is not None:
                write_pgm(out / "frames" / f"{tag}_filtered.pgm", filt(trace.result))
            if cfg.snapshot_every:
                report.snapshots = _write_snapshots(out / "snapshots" / tag, trace)
        reports.append(report)
        log.info("frame %d: psnr_raw %.2f dB", i + 1, metrics["psnr_raw"])
    if out is not None:
        with open(out / "frames.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["frame", "measurements", "sampling_ratio", "best_cf", *reports[0].metrics])
            w.writerows([[_fmt(v) for v in row] for row in rows])
        total = sum(r.measurements for r in reports)
        _write_summary(
            out / "summary.txt",
            cfg,
            {
                "pixels": pixels,
                "frames": len(reports),
                "first_frame_sampling_ratio": format_ratio(reports[0].sampling_ratio),
                "continuation_sampling_ratio": format_ratio(reports[-1].sampling_ratio),
                "total_measurements": total,
                **{f"final_{k}": v for k, v in reports[-1].metrics.items()},
            },
        )
    return reports


def _pearson(a, b) -> float:
    a = np.ravel(a) - np.mean(a)
    b = np.ravel(b) - np.mean(b)
    den = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b) / den if den > 0 else 0.0


def run_baseline(cfg: ExperimentConfig, out=None) -> RunReport:
    """Conventional correlation GI with random binary patterns."""
    obj = cfg.build_object()
    n = int(cfg.baseline_measurements or 10 * obj.size)
    image, mset = run_traditional_gi(obj, n, cfg.noise, substream(cfg.seed, 0, 0), cfg.ga.fill)
    filt = make_filter(cfg.filter, cfg.denoise_cmd)
    metrics = {
        "psnr_raw": psnr(obj, image),
        "psnr_filtered": psnr(obj, filt(image)) if filt else None,
        "ssim_raw": ssim(obj, image),
        "ssim_filtered": ssim(obj, filt(image)) if filt else None,
        "pearson": _pearson(correlate_raw(mset), obj),
    }
    report = RunReport(sampling_ratio(n, obj.size), n, obj.size, metrics, result=image)
    out = _out_dir(cfg, out)
    if out is not None:
        write_pgm(out / "object.pgm", obj)
        write_pgm(out / "result_raw.pgm", image)
        if filt is not None:
            write_pgm(out / "result_filtered.pgm", filt(image))
        with open(out / "signals.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["index", "signal"])
            w.writerows([[i + 1, _fmt(float(s))] for i, s in enumerate(mset.signals)])
        _write_summary(
            out / "summary.txt",
            cfg,
            {"pixels": obj.size, "measurements": n, "sampling_ratio": format_ratio(report.sampling_ratio), **metrics},
        )
    return report


def _sweep_job(args) -> RunReport:
    cfg, k, replicate, out = args
    cfg = replace(cfg, ga=replace(cfg.ga, k=k))
    obj = cfg.build_object()
    trace, filt = _evolve_static(cfg, obj, substream(cfg.seed, replicate, 0))
    run_dir = None
    if out is not None:
        run_dir = Path(out) / f"k{k}_seed{replicate}"
        run_dir.mkdir(parents=True, exist_ok=True)
    return _static_outputs(cfg, obj, trace, filt, run_dir)


def run_sweep_k(cfg: ExperimentConfig, k_values=None, out=None, jobs=None) -> list[RunReport]:
    """One static run per (k, replicate); reports are ordered k-major.

    Writes ``sweep.csv`` (trace rows prefixed by k and replicate) and
    ``sweep_summary.csv`` (mean final metrics per k).
    """
    k_values = list(cfg.sweep_k if k_values is None else k_values)
    jobs = cfg.jobs if jobs is None else jobs
    out = _out_dir(cfg, out)
    tasks = [(cfg, k, r, out) for k in k_values for r in range(cfg.sweep_seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_sweep_job, tasks))
    else:
        reports = [_sweep_job(t) for t in tasks]
    if out is not None:
        with open(out / "sweep.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["k", "replicate", *TRACE_HEADER])
            for (_, k, r, _), rep in zip(tasks, reports):
                _write_trace_rows(w, rep.trace, (k, r), header=False)
        with open(out / "sweep_summary.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["k", "runs", *(f"mean_final_{m}" for m in _METRICS)])
            for k in k_values:
                group = [rep for (_, kk, _, _), rep in zip(tasks, reports) if kk == k]
                means = []
                for m in _METRICS:
                    vals = [rep.metrics[m] for rep in group if rep.metrics[m] is not None]
                    means.append(float(np.mean(vals)) if vals else None)
                w.writerow([_fmt(v) for v in (k, len(group), *means)])
    return reports
