"""Command line front end: pairwise registration, group registration,
and synthetic experiments.

Exit codes: 0 on success, 2 on invalid input or usage, 3 when a
computation fails on well-formed input.  Every command writes a
``manifest.json`` describing the run next to its outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import register_icp
from .contour import read_contour, write_contour
from .errors import ComputationError, InputError
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .groupwise import default_group_stop, learn_model, register_group, total_variance
from .metrics import metric_report
from .pairwise import StopCriteria, default_stop, register_pair
from .svg import write_overlay

_METHODS = ("dtw", "dtw-unweighted", "icp")


@dataclass(frozen=True)
class RunManifest:
    """Record of one command invocation, written beside its outputs."""

    command: str
    argv: list[str]
    inputs: list[str]
    config_digest: str
    seed: int
    version: str
    wall_time_s: float

    def write(self, directory: Path) -> None:
        """Atomically write ``manifest.json`` into ``directory``."""
        payload = json.dumps(asdict(self), indent=2) + "\n"
        tmp = directory / "manifest.json.tmp"
        tmp.write_text(payload)
        os.replace(tmp, directory / "manifest.json")


def _digest(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()
    ).hexdigest()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapereg",
        description="Correspondence-free similarity registration of planar contours.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    reg = sub.add_parser("register", help="register a target contour onto a reference")
    reg.add_argument("reference", help="reference contour file (.csv or .json)")
    reg.add_argument("target", help="target contour file (.csv or .json)")
    reg.add_argument("--out", default="out", help="output directory")
    reg.add_argument("--method", choices=_METHODS, default="dtw")
    reg.add_argument("--imax", type=int, default=100, help="iteration budget")
    reg.add_argument("--cmin", type=float, default=None, help="movement tolerance [px^2]")
    reg.add_argument("--band", type=int, default=None, help="warping band half-width")
    reg.add_argument("--resolution", type=float, default=0.25, help="IoU cell size [px]")
    reg.add_argument("--seed", type=int, default=0)
    reg.add_argument("--svg", action="store_true", help="also write an overlay SVG")
    reg.set_defaults(func=cmd_register)

    grp = sub.add_parser("group", help="register a directory of contours jointly")
    grp.add_argument("directory", help="directory of contour files (.csv or .json)")
    grp.add_argument("--out", default="out", help="output directory")
    grp.add_argument("--imax", type=int, default=100)
    grp.add_argument("--cmin", type=float, default=None)
    grp.add_argument("--init", default=None, help="file whose contour seeds the mean")
    grp.add_argument("--seed", type=int, default=0)
    grp.set_defaults(func=cmd_group)

    exp = sub.add_parser("experiment", help="run a synthetic experiment")
    exp.add_argument("name", help=f"one of: {', '.join(EXPERIMENTS)}")
    exp.add_argument("--out", default="out", help="output directory")
    exp.add_argument("--trials", type=int, default=None)
    exp.add_argument("--seed", type=int, default=None)
    exp.add_argument("--config", default=None, help="JSON file of experiment settings")
    exp.set_defaults(func=cmd_experiment)
    return parser


def cmd_register(args) -> int:
    started = time.monotonic()
    reference = read_contour(args.reference)
    target = read_contour(args.target)
    c_min = args.cmin if args.cmin is not None else default_stop([reference, target]).c_min
    stop = StopCriteria(i_max=args.imax, c_min=c_min)
    out = _out_dir(args)

    doc: dict = {
        "method": args.method,
        "reference": str(args.reference),
        "target": str(args.target),
    }
    if args.method == "icp":
        res = register_icp(reference, target, stop)
        doc.update(res.to_dict())
    else:
        res = register_pair(
            reference, target, stop, weighted=(args.method == "dtw"), band=args.band
        )
        doc.update(res.to_dict())
    report = metric_report(reference, res.registered, args.resolution)
    doc["metrics"] = {
        "d_test": report.d_test,
        "iou": None if np.isnan(report.iou) else report.iou,
        "n_reference": report.n_reference,
        "n_target": report.n_target,
    }

    _write_json(out / "result.json", doc)
    write_contour(res.registered, out / "registered.csv")
    if args.svg:
        write_overlay(
            out / "overlay.svg",
            [
                (reference, "#1f77b4", "reference"),
                (target, "#d62728", "target (input)"),
                (res.registered, "#2ca02c", "target (registered)"),
            ],
            title=f"register --method {args.method}",
        )
    config = {
        "method": args.method,
        "imax": args.imax,
        "cmin": c_min,
        "band": args.band,
        "resolution": args.resolution,
    }
    RunManifest(
        command="register",
        argv=sys.argv[1:],
        inputs=[str(args.reference), str(args.target)],
        config_digest=_digest(config),
        seed=args.seed,
        version=__version__,
        wall_time_s=time.monotonic() - started,
    ).write(out)
    print(report.table())
    return 0


def cmd_group(args) -> int:
    started = time.monotonic()
    directory = Path(args.directory)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    files = sorted(
        p for p in directory.iterdir() if p.suffix.lower() in (".csv", ".json")
    )
    if len(files) < 2:
        raise InputError(
            f"group registration needs at least 2 contour files, found {len(files)}"
        )
    samples = [read_contour(p) for p in files]
    initial_index = None
    if args.init is not None:
        init_path = Path(args.init).resolve()
        matches = [i for i, p in enumerate(files) if p.resolve() == init_path]
        if not matches:
            raise InputError(f"--init {args.init} is not one of the input files")
        initial_index = matches[0]

    if args.cmin is not None:
        stop = StopCriteria(i_max=args.imax, c_min=args.cmin)
    else:
        stop = default_group_stop(args.imax)
    out = _out_dir(args)

    result = register_group(samples, stop, initial_index=initial_index)
    doc = result.to_dict()
    doc["files"] = [str(p) for p in files]
    doc["total_variance"] = total_variance(result)
    _write_json(out / "group_result.json", doc)
    write_contour(result.mean, out / "mean.csv")

    # one grey layer per registered sample; only the first carries a legend label
    layers = [
        (
            s.resampled.values[s.resampled.mask],
            "#bbbbbb",
            "registered samples" if m == 0 else "",
        )
        for m, s in enumerate(result.per_sample)
    ]
    write_overlay(
        out / "overlay.svg",
        layers + [(result.mean, "#d62728", "mean")],
        title="group registration",
    )

    model = learn_model(result)
    _write_json(out / "shape_model.json", model.to_dict())

    config = {"imax": args.imax, "cmin": stop.c_min, "init": args.init}
    RunManifest(
        command="group",
        argv=sys.argv[1:],
        inputs=[str(p) for p in files],
        config_digest=_digest(config),
        seed=args.seed,
        version=__version__,
        wall_time_s=time.monotonic() - started,
    ).write(out)
    print(f"registered {len(files)} contours in {result.iterations} iterations")
    print(f"total variance: {total_variance(result):.6g}")
    return 0


def cmd_experiment(args) -> int:
    started = time.monotonic()
    settings: dict = {}
    if args.config is not None:
        cfg_path = Path(args.config)
        if not cfg_path.is_file():
            raise InputError(f"config file not found: {cfg_path}")
        try:
            settings = json.loads(cfg_path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid config JSON: {exc.msg}")
        if not isinstance(settings, dict):
            raise InputError("config JSON must be an object")
    settings["name"] = args.name
    if args.trials is not None:
        settings["trials"] = args.trials
    if args.seed is not None:
        settings["seed"] = args.seed
    try:
        cfg = ExperimentConfig.from_dict(settings)
    except TypeError as exc:
        raise InputError(f"bad config: {exc}")

    out = _out_dir(args)
    rows, summary = run_experiment(cfg)

    columns = list(rows[0].keys()) if rows else []
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in columns))
    (out / "trials.csv").write_text("\n".join(lines) + "\n")
    _write_json(out / "summary.json", summary)

    RunManifest(
        command="experiment",
        argv=sys.argv[1:],
        inputs=[],
        config_digest=_digest(cfg.to_dict()),
        seed=cfg.seed,
        version=__version__,
        wall_time_s=time.monotonic() - started,
    ).write(out)
    print(json.dumps(summary, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
