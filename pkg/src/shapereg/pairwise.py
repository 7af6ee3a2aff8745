"""Alternating warp/fit registration of one contour onto another.

Each iteration warps the current target estimate against the reference,
weights the resulting correspondences, fits a weighted similarity pose and
applies it to the whole target.  The loop stops when the squared movement
of the target between consecutive iterations drops to the tolerance, the
iteration budget runs out, or the movement keeps growing (divergence).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .contour import Contour, Pose, as_contour
from .dtw import WarpingPath, apply_path, dtw_path
from .errors import ComputationError, EmptySet
from .procrustes import compute_weights, fit_pose_weighted, soft_boundary

# consecutive movement increases tolerated before the loop is cut short
_DIVERGENCE_PATIENCE = 5


@dataclass(frozen=True)
class StopCriteria:
    """Iteration budget and movement tolerance for iterative registration.

    :param i_max: maximum number of iterations (at least 1).
    :param c_min: squared-movement tolerance in pixels squared.
    """

    i_max: int = 100
    c_min: float = 0.0

    def __post_init__(self):
        if self.i_max < 1:
            raise ValueError(f"i_max must be at least 1, got {self.i_max}")
        if not (np.isfinite(self.c_min) and self.c_min >= 0):
            raise ValueError(f"c_min must be finite and non-negative, got {self.c_min}")


def default_stop(contours: Iterable[Contour]) -> StopCriteria:
    """Stop criteria scaled to the data: 100 iterations, tolerance
    ``1e-4`` times the smallest contour norm."""
    norms = [float(np.linalg.norm(as_contour(c))) for c in contours]
    if not norms:
        raise EmptySet("default_stop needs at least one contour")
    return StopCriteria(i_max=100, c_min=1e-4 * min(norms))


@dataclass
class RegistrationResult:
    """Outcome of a pairwise registration.

    ``pose`` maps the original target onto the reference; ``registered``
    holds the transformed target points.  ``path`` and ``weights`` come
    from the final iteration.
    """

    pose: Pose
    path: WarpingPath
    weights: np.ndarray
    registered: np.ndarray
    iterations: int
    final_movement: float
    converged: bool
    cost_trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pose": self.pose.to_dict(),
            "path": self.path.to_json_pairs(),
            "weights": [float(w) for w in self.weights],
            "iterations": self.iterations,
            "final_movement": self.final_movement,
            "converged": self.converged,
            "cost_trace": [float(c) for c in self.cost_trace],
        }


def register_pair(
    reference: Contour,
    target: Contour,
    stop: StopCriteria | None = None,
    *,
    weighted: bool = True,
    band: int | None = None,
) -> RegistrationResult:
    """Register ``target`` onto ``reference``.

    :param stop: stop criteria; defaults to :func:`default_stop` over both
        inputs.
    :param weighted: when false, every correspondence keeps unit weight
        (the plain unweighted fit).
    :param band: optional warping band half-width passed to the warp.
    """
    reference = as_contour(reference, name="reference")
    target = as_contour(target, name="target")
    if stop is None:
        stop = default_stop([reference, target])

    y = target.copy()
    total = Pose.identity()
    path: WarpingPath | None = None
    weights: np.ndarray | None = None
    cost_trace: list[float] = []
    movement = np.inf
    prev_movement = np.inf
    rising = 0
    converged = False
    iterations = 0

    for i in range(stop.i_max):
        try:
            path, _ = dtw_path(reference, y, band=band)
            aligned = apply_path(reference, y, path)
            if weighted:
                weights, _ = compute_weights(aligned)
                weights = soft_boundary(weights, path)
            else:
                weights = np.ones(len(path))
            pose = fit_pose_weighted(aligned.a, aligned.b, weights)
        except ComputationError as exc:
            raise type(exc)(f"iteration {i}: {exc}") from exc

        y_next = pose.r * y + pose.t
        fitted = pose.r * aligned.b + pose.t
        cost_trace.append(float(np.sum(weights * np.abs(aligned.a - fitted) ** 2)))
        movement = float(np.sum(np.abs(y - y_next) ** 2))
        total = pose.compose(total)
        y = y_next
        iterations = i + 1

        if movement <= stop.c_min:
            converged = True
            break
        rising = rising + 1 if movement > prev_movement else 0
        prev_movement = movement
        if rising >= _DIVERGENCE_PATIENCE:
            break

    assert path is not None and weights is not None
    return RegistrationResult(
        pose=total,
        path=path,
        weights=weights,
        registered=y,
        iterations=iterations,
        final_movement=movement,
        converged=converged,
        cost_trace=cost_trace,
    )
