"""Plain rigid ICP baseline.

Deliberately naive: each iteration matches every target point to its
nearest reference point, fits an unweighted rotation-plus-translation on
the matched pairs and applies it.  The scale stays fixed at one: a free
scale lets far-from-aligned runs shrink the target onto the reference and
masquerade as converged.  No warping, no ordering, no outlier handling;
it serves as the comparison floor for the warp-based registration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .contour import Contour, Pose, as_contour
from .pairwise import StopCriteria, default_stop
from .procrustes import fit_rigid


@dataclass
class IcpResult:
    """Outcome of a baseline ICP run.

    ``mse_trace`` records the matched-pair mean squared error after each
    iteration's pose update; classical ICP guarantees it never increases.
    """

    pose: Pose
    registered: np.ndarray
    iterations: int
    converged: bool
    final_mse: float
    mse_trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pose": self.pose.to_dict(),
            "iterations": self.iterations,
            "converged": self.converged,
            "final_mse": self.final_mse,
            "mse_trace": [float(v) for v in self.mse_trace],
        }


def register_icp(
    reference: Contour, target: Contour, stop: StopCriteria | None = None
) -> IcpResult:
    """Register ``target`` onto ``reference`` with nearest-point matching."""
    reference = as_contour(reference, name="reference")
    target = as_contour(target, name="target")
    if stop is None:
        stop = default_stop([reference, target])

    tree = cKDTree(np.column_stack([reference.real, reference.imag]))
    y = target.copy()
    total = Pose.identity()
    mse_trace: list[float] = []
    movement = np.inf
    converged = False
    iterations = 0

    for i in range(stop.i_max):
        _, idx = tree.query(np.column_stack([y.real, y.imag]), k=1)
        matched = reference[idx]
        pose = fit_rigid(matched, y)
        y_next = pose.r * y + pose.t
        mse_trace.append(float(np.mean(np.abs(matched - y_next) ** 2)))
        movement = float(np.sum(np.abs(y - y_next) ** 2))
        total = pose.compose(total)
        y = y_next
        iterations = i + 1
        if movement <= stop.c_min:
            converged = True
            break

    return IcpResult(
        pose=total,
        registered=y,
        iterations=iterations,
        converged=converged,
        final_mse=mse_trace[-1],
        mse_trace=mse_trace,
    )
