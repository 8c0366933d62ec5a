"""Command-line runner.

    segi static   --config exp.toml --seed 7 --out runs/static
    segi dynamic  --config scene.toml --seed 7 --filter median
    segi baseline --config exp.toml --seed 7
    segi sweep-k  --config exp.toml --seed 7 --jobs 4
    segi ratio    --config exp.toml
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import ConfigError, config_from_dict, read_config
from .experiments import (
    format_ratio,
    report_sampling_ratio,
    run_baseline,
    run_dynamic,
    run_static,
    run_sweep_k,
)

COMMANDS = ("static", "dynamic", "baseline", "sweep-k", "ratio")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML experiment file")
        p.add_argument("--seed", type=_u64, help="master seed (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--snapshot-every", type=int, help="generations between snapshot images")
        p.add_argument("--filter", help="none | median | gaussian:<sigma>")
        p.add_argument("--denoise-cmd", help="external denoiser, e.g. 'tool {input} {output}'")
        p.add_argument("--jobs", type=int, help="parallel workers for sweep-k")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    overrides = {
        "mode": None if args.command == "ratio" else args.command,
        "seed": args.seed,
        "output": args.out,
        "snapshot_every": args.snapshot_every,
        "filter": args.filter,
        "denoise_cmd": args.denoise_cmd,
        "sweep.jobs": args.jobs,
    }
    try:
        doc = read_config(args.config) if args.config else {}
        if args.command == "ratio":
            doc.setdefault("seed", 0)  # ratios do not depend on the seed
        cfg = config_from_dict(doc, **overrides)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"segi: {exc}", file=sys.stderr)
        return 2

    if args.command == "ratio":
        pixels = cfg.build_object().size
        print(f"static: {format_ratio(report_sampling_ratio(cfg.ga, pixels))}")
        print(f"dynamic frame: {format_ratio(report_sampling_ratio(cfg.ga, pixels, continuation=True))}")
        stale = dataclasses.replace(cfg.ga, remeasure_inherited=False)
        offspring_only = report_sampling_ratio(stale, pixels, continuation=True)
        print(f"dynamic frame, offspring only: {format_ratio(offspring_only)}")
        return 0
    if args.command == "static":
        r = run_static(cfg)
        print(f"sampling ratio {format_ratio(r.sampling_ratio)}, psnr_raw {r.metrics['psnr_raw']:.2f} dB")
    elif args.command == "dynamic":
        reports = run_dynamic(cfg)
        r = reports[-1]
        print(f"{len(reports)} frames, last frame psnr_raw {r.metrics['psnr_raw']:.2f} dB")
    elif args.command == "baseline":
        r = run_baseline(cfg)
        print(f"sampling ratio {format_ratio(r.sampling_ratio)}, pearson {r.metrics['pearson']:.3f}")
    else:
        reports = run_sweep_k(cfg)
        print(f"{len(reports)} runs written to {cfg.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
