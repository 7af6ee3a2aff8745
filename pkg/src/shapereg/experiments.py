"""Reproducible synthetic registration experiments.

Each experiment perturbs a fixed template, registers the perturbed copy
back with every method and scores the result.  Trials draw their random
streams from per-trial seeds split off the master seed, so results do not
depend on execution order or worker count.  The ``SHAPEREG_THREADS``
environment variable caps the trial worker pool.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baseline import register_icp
from .contour import to_preshape, transform, geodesic_distance
from .errors import OrderRecoveryFailed
from .groupwise import (
    default_group_stop,
    masked_variance_trace,
    register_group,
    total_variance,
)
from .metrics import metric_report
from .pairwise import StopCriteria, default_stop, register_pair
from .synth import (
    OutlierConfig,
    PoseRanges,
    SynthFamilyConfig,
    femur_like_template,
    generate_family,
    inject_outliers,
    recover_order,
    shuffle_points,
)

PAIRWISE_EXPERIMENTS = ("clean", "outliers", "unsorted", "outliers+unsorted")
EXPERIMENTS = PAIRWISE_EXPERIMENTS + ("groupwise",)
METHODS = ("dtw", "dtw-unweighted", "icp")


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings shared by all experiment conditions."""

    name: str
    trials: int = 30
    seed: int = 0
    template_points: int = 600
    pose_ranges: PoseRanges = field(
        default_factory=lambda: PoseRanges(
            scale=(0.8, 1.25),
            rotation=np.deg2rad(25.0),
            translation=((-40.0, 40.0), (-40.0, 40.0)),
        )
    )
    outliers: OutlierConfig = field(default_factory=OutlierConfig)
    i_max: int = 100
    c_min: float | None = None
    iou_resolution: float = 0.25
    group_m: int = 20
    group_deform_sigma: float = 0.5
    group_truncation: tuple[float, float] = (0.0, 0.15)

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}"
            )
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "seed": self.seed,
            "template_points": self.template_points,
            "pose_ranges": {
                "scale": list(self.pose_ranges.scale),
                "rotation": self.pose_ranges.rotation,
                "translation": [list(r) for r in self.pose_ranges.translation],
            },
            "outliers": {
                "sigma_t": self.outliers.sigma_t,
                "sigma_n": self.outliers.sigma_n,
                "n_segments": self.outliers.n_segments,
                "seg_len_frac": list(self.outliers.seg_len_frac),
            },
            "i_max": self.i_max,
            "c_min": self.c_min,
            "iou_resolution": self.iou_resolution,
            "group_m": self.group_m,
            "group_deform_sigma": self.group_deform_sigma,
            "group_truncation": list(self.group_truncation),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kwargs = dict(d)
        if "pose_ranges" in kwargs:
            pr = kwargs["pose_ranges"]
            kwargs["pose_ranges"] = PoseRanges(
                scale=tuple(pr["scale"]),
                rotation=float(pr["rotation"]),
                translation=tuple(tuple(r) for r in pr["translation"]),
            )
        if "outliers" in kwargs:
            oc = dict(kwargs["outliers"])
            oc["seg_len_frac"] = tuple(oc.get("seg_len_frac", (0.01, 0.10)))
            kwargs["outliers"] = OutlierConfig(**oc)
        if "group_truncation" in kwargs:
            kwargs["group_truncation"] = tuple(kwargs["group_truncation"])
        return cls(**kwargs)


def worker_count() -> int:
    """Size of the trial worker pool, capped by ``SHAPEREG_THREADS``."""
    size = min(os.cpu_count() or 1, 4)
    env = os.environ.get("SHAPEREG_THREADS")
    if env:
        try:
            size = max(1, min(size, int(env)))
        except ValueError:
            raise ValueError(f"SHAPEREG_THREADS must be an integer, got {env!r}")
    return size


def _pair_stop(cfg: ExperimentConfig, reference, target) -> StopCriteria:
    if cfg.c_min is None:
        c_min = default_stop([reference, target]).c_min
    else:
        c_min = cfg.c_min
    return StopCriteria(i_max=cfg.i_max, c_min=c_min)


def _run_trial(args: tuple) -> list[dict]:
    cfg, template, child, trial = args
    rng = np.random.default_rng(child)
    perturbed = template
    if "outliers" in cfg.name:
        out_seed = int(rng.integers(0, 2**63 - 1))
        perturbed, _ = inject_outliers(template, replace(cfg.outliers, seed=out_seed))
    pose = cfg.pose_ranges.draw(rng)
    target = transform(perturbed, pose)
    recovered = None
    recovery_failed = False
    if "unsorted" in cfg.name:
        shuffled = shuffle_points(target, int(rng.integers(0, 2**63 - 1)))
        target_for_icp = shuffled
        try:
            recovered = recover_order(shuffled)
        except OrderRecoveryFailed:
            recovery_failed = True
    else:
        target_for_icp = target

    rows = []
    stop = _pair_stop(cfg, template, target)
    for method in METHODS:
        row = {
            "trial": trial,
            "method": method,
            "ok": True,
            "d_test": float("nan"),
            "iou": float("nan"),
            "converged": False,
            "iterations": 0,
        }
        if method == "icp":
            res = register_icp(template, target_for_icp, stop)
            registered = res.registered
            row["converged"] = res.converged
            row["iterations"] = res.iterations
        else:
            inp = recovered if "unsorted" in cfg.name else target
            if inp is None or recovery_failed:
                row["ok"] = False
                rows.append(row)
                continue
            res = register_pair(template, inp, stop, weighted=(method == "dtw"))
            registered = res.registered
            row["converged"] = res.converged
            row["iterations"] = res.iterations
        report = metric_report(template, registered, cfg.iou_resolution)
        row["d_test"] = report.d_test
        row["iou"] = report.iou
        rows.append(row)
    return rows


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Run one experiment; returns per-trial rows and a summary dict."""
    template = femur_like_template(cfg.template_points)
    if cfg.name == "groupwise":
        return _run_groupwise(cfg, template)

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    jobs = [(cfg, template, children[t], t) for t in range(cfg.trials)]
    workers = worker_count()
    if workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            nested = list(pool.map(_run_trial, jobs))
    else:
        nested = [_run_trial(job) for job in jobs]
    rows = [row for trial_rows in nested for row in trial_rows]

    summary: dict = {
        "name": cfg.name,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "methods": {},
    }
    for method in METHODS:
        good = [r for r in rows if r["method"] == method and r["ok"]]
        d = np.array([r["d_test"] for r in good])
        ious = np.array([r["iou"] for r in good])
        entry: dict = {"n_ok": len(good), "n_failed": cfg.trials - len(good)}
        if len(good):
            q25, q50, q75 = np.percentile(d, [25.0, 50.0, 75.0])
            entry.update(
                d_test_median=float(q50),
                d_test_q25=float(q25),
                d_test_q75=float(q75),
                iou_median=float(np.nanmedian(ious)) if np.isfinite(ious).any() else None,
            )
        summary["methods"][method] = entry
    return rows, summary


def _run_groupwise(cfg: ExperimentConfig, template) -> tuple[list[dict], dict]:
    family = SynthFamilyConfig(
        base=template,
        m=cfg.group_m,
        deform_sigma=cfg.group_deform_sigma,
        pose_ranges=cfg.pose_ranges,
        truncation_frac=cfg.group_truncation,
        seed=cfg.seed,
    )
    samples, truths = generate_family(family)
    if cfg.c_min is None:
        outer = default_group_stop(cfg.i_max)
    else:
        outer = StopCriteria(i_max=cfg.i_max, c_min=cfg.c_min)
    result = register_group(samples, outer)

    # naive baseline: preshape each sample, align by raw index, mask the rest
    max_n = max(len(s) for s in samples)
    values = np.zeros((len(samples), max_n), dtype=np.complex128)
    mask = np.zeros((len(samples), max_n), dtype=bool)
    for m, s in enumerate(samples):
        tau, _, _ = to_preshape(s)
        values[m, : len(s)] = tau
        mask[m, : len(s)] = True
    baseline_tv = masked_variance_trace(values, mask)

    initial = int(np.argmax([len(s) for s in samples]))
    truth = truths[initial]
    n = len(template)
    slice_true = template[truth.cut_start : n - truth.cut_end]
    tau_true, _, _ = to_preshape(slice_true)
    geo = geodesic_distance(result.mean, tau_true)

    rows = [
        {
            "sample": m,
            "n_points": len(samples[m]),
            "cut_start": truths[m].cut_start,
            "cut_end": truths[m].cut_end,
        }
        for m in range(len(samples))
    ]
    summary = {
        "name": cfg.name,
        "seed": cfg.seed,
        "samples": cfg.group_m,
        "iterations": result.iterations,
        "converged": result.converged,
        "total_variance": total_variance(result),
        "baseline_total_variance": baseline_tv,
        "geodesic_to_template": geo,
    }
    return rows, summary
