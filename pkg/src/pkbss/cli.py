"""Command-line harness for the four bundled experiments.

Subcommands: ``validate``, ``waves``, ``audio``, ``radar``.  Each writes
``results.csv``, ``manifest.json``, and figure files (deterministic SVG
plus a matplotlib PNG) into the output directory.  Exit code is 0 exactly
when every run completed; metric values never affect it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import experiments
from .experiments import ExperimentConfig, RunManifest
from .reporting import write_csv, write_png_curves, write_svg_curves
from .signals import export_sources_csv

__all__ = ["main"]


def _csv_list(text: str) -> list:
    return [part.strip() for part in text.split(",") if part.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pkbss",
        description="Blind source separation experiments "
                    "(kurtosis-tensor eigenpair toolkit)",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, help_text in (
        ("validate", "eigenvector recovery on random statistical tensors"),
        ("waves", "basic-wave separation benchmark"),
        ("audio", "speech-surrogate separation protocol"),
        ("radar", "jamming suppression sweep"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seeds", type=_csv_list, default=None,
                       help="comma-separated seed list")
        p.add_argument("--algorithms", type=_csv_list, default=None,
                       help="comma-separated algorithm list")
        p.add_argument("--out-dir", default=None)
        p.add_argument("--config", default=None,
                       help="JSON config file; CLI flags override its values")
        if name == "validate":
            p.add_argument("--n-tensors", type=int, default=None)
            p.add_argument("--dim", type=int, default=None)
            p.add_argument("--thresholds", type=_csv_list, default=None)
        if name == "audio":
            p.add_argument("--wav", action="append", default=None,
                           help="WAV file path (repeat 4 times); omit to use "
                                "the bundled surrogates")
        if name == "radar":
            p.add_argument("--kind", choices=("csi", "isrj"), default=None)
            p.add_argument("--axis", choices=("dtheta", "snr", "sir"),
                           default=None)
            p.add_argument("--values", type=_csv_list, default=None)
    return parser


_DEFAULTS = {
    "validate": {
        "algorithms": ("pka", "fixed_point", "cfastica"),
        "seeds": (0,),
        "params": {"n_tensors": 100, "dim": 3,
                   "thresholds": list(experiments.DEFAULT_THRESHOLDS)},
    },
    "waves": {
        "algorithms": ("pka", "cfastica", "jade", "psa"),
        "seeds": tuple(range(20)),
        "params": {},
    },
    "audio": {
        "algorithms": ("pka", "cfastica", "jade", "psa"),
        "seeds": tuple(range(20)),
        "params": {"paths": None},
    },
    "radar": {
        "algorithms": ("pka", "cfastica", "jade", "psa"),
        "seeds": tuple(range(10)),
        "params": {"kind": "isrj", "axis": "dtheta",
                   "values": [0.25, 0.5, 1.0, 2.0]},
    },
}


def _merge_config(args) -> ExperimentConfig:
    exp = args.experiment
    merged = {
        "algorithms": list(_DEFAULTS[exp]["algorithms"]),
        "seeds": list(_DEFAULTS[exp]["seeds"]),
        "out_dir": "out",
        "params": dict(_DEFAULTS[exp]["params"]),
    }
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        for key in ("algorithms", "seeds", "out_dir"):
            if key in file_cfg:
                merged[key] = file_cfg[key]
        merged["params"].update(file_cfg.get("params", {}))
    if args.seeds is not None:
        merged["seeds"] = [int(s) for s in args.seeds]
    if args.algorithms is not None:
        merged["algorithms"] = args.algorithms
    if args.out_dir is not None:
        merged["out_dir"] = args.out_dir
    p = merged["params"]
    if exp == "validate":
        if args.n_tensors is not None:
            p["n_tensors"] = args.n_tensors
        if args.dim is not None:
            p["dim"] = args.dim
        if args.thresholds is not None:
            p["thresholds"] = [float(t) for t in args.thresholds]
    if exp == "audio" and args.wav is not None:
        p["paths"] = args.wav
    if exp == "radar":
        if args.kind is not None:
            p["kind"] = args.kind
        if args.axis is not None:
            p["axis"] = args.axis
        if args.values is not None:
            p["values"] = [float(v) for v in args.values]
    return ExperimentConfig(exp, tuple(merged["algorithms"]),
                            tuple(merged["seeds"]), p, merged["out_dir"])


def _run(cfg: ExperimentConfig) -> list:
    p = cfg.params
    if cfg.experiment == "validate":
        return experiments.run_validation(
            n_tensors=p["n_tensors"], dim=p["dim"],
            thresholds=tuple(p["thresholds"]), algorithms=cfg.algorithms,
            seed=cfg.seeds[0])
    if cfg.experiment == "waves":
        return experiments.run_waves(seeds=cfg.seeds, algorithms=cfg.algorithms)
    if cfg.experiment == "audio":
        return experiments.run_audio(paths=p.get("paths"), seeds=cfg.seeds,
                                     algorithms=cfg.algorithms)
    return experiments.run_radar_sweep(
        kind=p["kind"], axis=p["axis"], values=tuple(p["values"]),
        seeds=cfg.seeds, algorithms=cfg.algorithms)


def _radar_summary(rows) -> list:
    keyed = {}
    for row in rows:
        keyed.setdefault((row["value"], row["algorithm"]), []).append(
            row["sir_improvement_db"])
    out = []
    for (value, alg) in sorted(keyed):
        vals = np.array(keyed[(value, alg)], dtype=float)
        finite = vals[np.isfinite(vals)]
        out.append({
            "value": value, "algorithm": alg,
            "mean_db": float(np.mean(finite)) if finite.size else float("-inf"),
            "std_db": float(np.std(finite)) if finite.size else float("nan"),
            "n_failed": int(np.sum(~np.isfinite(vals))),
        })
    return out


def _emit_figures(cfg: ExperimentConfig, rows) -> None:
    out = cfg.out_dir
    if cfg.experiment == "validate":
        plot_rows = [dict(r, severity=-np.log10(max(1.0 - r["threshold"], 1e-300)))
                     for r in rows]
        write_svg_curves(plot_rows, f"{out}/validate.svg", "severity",
                         "successes", "algorithm")
        write_png_curves(plot_rows, f"{out}/validate.png", "severity",
                         "successes", "algorithm",
                         "successes vs -log10(1 - threshold)")
    elif cfg.experiment in ("waves", "audio"):
        write_svg_curves(rows, f"{out}/{cfg.experiment}_isi.svg", "seed",
                         "isi", "algorithm")
        write_png_curves(rows, f"{out}/{cfg.experiment}_isi.png", "seed",
                         "isi", "algorithm", f"{cfg.experiment}: ISI per seed")
        write_svg_curves(rows, f"{out}/{cfg.experiment}_sdr.svg", "seed",
                         "sdr_mean", "algorithm")
        write_png_curves(rows, f"{out}/{cfg.experiment}_sdr.png", "seed",
                         "sdr_mean", "algorithm",
                         f"{cfg.experiment}: mean SDR per seed")
    else:
        summary = _radar_summary(rows)
        write_csv(summary, f"{out}/radar_summary.csv")
        write_svg_curves(summary, f"{out}/radar.svg", "value", "mean_db",
                         "algorithm")
        write_png_curves(summary, f"{out}/radar.png", "value", "mean_db",
                         "algorithm", "mean SIR improvement")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    os.makedirs(cfg.out_dir, exist_ok=True)
    start = time.monotonic()
    try:
        rows = _run(cfg)
    except Exception as exc:  # any aborted run is a nonzero exit
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    wall = time.monotonic() - start
    write_csv(rows, os.path.join(cfg.out_dir, "results.csv"))
    manifest = RunManifest(
        config={"experiment": cfg.experiment,
                "algorithms": list(cfg.algorithms),
                "seeds": list(cfg.seeds), "params": cfg.params,
                "out_dir": cfg.out_dir},
        n_rows=len(rows), wall_clock_s=wall)
    with open(os.path.join(cfg.out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest.as_dict(), fh, indent=2, sort_keys=True)
    try:
        _emit_figures(cfg, rows)
        if cfg.experiment == "waves":
            export_sources_csv(experiments.waves_separated(cfg.seeds[0]),
                               os.path.join(cfg.out_dir, "waves_separated.csv"))
    except Exception as exc:
        print(f"figure emission failed: {exc}", file=sys.stderr)
        return 1
    print(f"{cfg.experiment}: {len(rows)} rows -> {cfg.out_dir}/results.csv "
          f"({wall:.1f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
