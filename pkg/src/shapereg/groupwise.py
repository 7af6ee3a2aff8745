"""Group-wise registration and statistics over a set of contours.

The group mean starts as the preshape of the longest sample.  Each outer
iteration registers every sample onto the current mean, resamples it onto
the mean's index set through its correspondence path, and replaces the mean
by the entrywise average of the resampled samples over the indices they
cover.  Samples need not share a length: indices a sample does not cover
are masked out and tracked in per-index support counts.

Resampling onto the reference index set collapses warp fluctuations:

* several target points mapped to one interior reference point reduce to
  the target point nearest the arithmetic midpoint of the run;
* one target point mapped to several interior reference points is
  repeated at each of them;
* runs forced by the warp's endpoint rule mark the affected reference
  slots as empty (reference side) or drop the extra points (target side).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import Contour, Pose, as_contour, to_preshape
from .dtw import WarpingPath
from .errors import (
    ComputationError,
    IndexOutOfRange,
    InsufficientSupport,
    LengthMismatch,
)
from .pairwise import RegistrationResult, StopCriteria, default_stop, register_pair

OUTER_C_MIN = 1e-4


def default_group_stop(i_max: int = 100) -> StopCriteria:
    """Outer-loop criteria for :func:`register_group`.

    The mean is a preshape (unit norm), so the movement rule that scales
    the pairwise tolerance by the contour norm reduces to the constant
    ``1e-4`` here.
    """
    return StopCriteria(i_max=i_max, c_min=OUTER_C_MIN)


@dataclass(frozen=True)
class MaskedResampledContour:
    """A contour resampled onto a reference index set, with empty slots.

    ``values`` has the reference length; entries where ``mask`` is false
    are meaningless placeholders (zero).
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.mask.shape:
            raise LengthMismatch("values and mask lengths differ")
        if not self.mask.any():
            raise ValueError("resampled contour has no present entries")


@dataclass(frozen=True)
class SampleRegistration:
    """Per-sample outcome of group registration."""

    pose: Pose
    path: WarpingPath
    resampled: MaskedResampledContour


@dataclass
class GroupResult:
    """Converged group registration state."""

    mean: np.ndarray
    per_sample: list[SampleRegistration]
    iterations: int
    converged: bool
    support_counts: np.ndarray

    def to_dict(self) -> dict:
        return {
            "mean": [[float(p.real), float(p.imag)] for p in self.mean],
            "iterations": self.iterations,
            "converged": self.converged,
            "support_counts": [int(n) for n in self.support_counts],
            "samples": [
                {
                    "pose": s.pose.to_dict(),
                    "path": s.path.to_json_pairs(),
                    "present": [bool(b) for b in s.resampled.mask],
                }
                for s in self.per_sample
            ],
        }


@dataclass(frozen=True)
class ShapeModel:
    """Mean preshape plus complex covariance of registered samples."""

    mean: np.ndarray
    covariance: np.ndarray
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "mean": [[float(p.real), float(p.imag)] for p in self.mean],
            "covariance_re": self.covariance.real.tolist(),
            "covariance_im": self.covariance.imag.tolist(),
            "sample_count": self.sample_count,
        }


def resample_to_reference(
    reference: Contour, target: Contour, path: WarpingPath
) -> MaskedResampledContour:
    """Resample ``target`` onto the index set of ``reference`` along ``path``."""
    reference = as_contour(reference, name="reference")
    target = as_contour(target, name="target")
    p = path.pairs
    n1 = len(reference)
    if p.min() < 0 or p[:, 0].max() >= n1 or p[:, 1].max() >= len(target):
        raise IndexOutOfRange(
            f"path indices exceed contour lengths {n1} and {len(target)}"
        )
    L = len(p)

    # pairs forced by the warp's endpoint rule: several reference indices
    # pinned to the single first (or last) target point.  Only the pair
    # nearest the path interior keeps its value; the other reference slots
    # go empty.  Runs of a repeated *reference* index are never forced:
    # they collapse through the midpoint rule below wherever they sit.
    forced = np.zeros(L, dtype=bool)
    col = p[:, 1]
    lead = 1
    while lead < L and col[lead] == col[0]:
        lead += 1
    if lead > 1:
        forced[: lead - 1] = True
    trail = 1
    while trail < L and col[L - 1 - trail] == col[L - 1]:
        trail += 1
    if trail > 1:
        forced[L - trail + 1 :] = True

    values = np.zeros(n1, dtype=np.complex128)
    mask = np.zeros(n1, dtype=bool)
    k = 0
    while k < L:
        n = p[k, 0]
        run = [p[k, 1]] if not forced[k] else []
        k += 1
        while k < L and p[k, 0] == n:
            if not forced[k]:
                run.append(p[k, 1])
            k += 1
        if not run:
            continue
        if len(run) == 1:
            values[n] = target[run[0]]
        else:
            candidates = target[np.array(run)]
            mid = candidates.mean()
            values[n] = candidates[int(np.argmin(np.abs(candidates - mid)))]
        mask[n] = True
    return MaskedResampledContour(values=values, mask=mask)


def register_group(
    samples: list[Contour],
    stop: StopCriteria | None = None,
    *,
    inner_stop: StopCriteria | None = None,
    initial_index: int | None = None,
) -> GroupResult:
    """Jointly register ``samples`` and estimate their mean shape.

    :param stop: outer-loop criteria applied to the squared movement of the
        unit-norm mean; defaults to :func:`default_group_stop`.
    :param inner_stop: criteria for the per-sample pairwise registrations;
        defaults to :func:`default_stop` of each (mean, sample) pair, which
        lands on the mean's scale once the sample has been pulled into the
        mean's frame.
    :param initial_index: sample seeding the mean; defaults to the longest
        sample (first one on ties).
    """
    samples = [as_contour(s, name=f"sample {m}") for m, s in enumerate(samples)]
    if len(samples) < 2:
        raise ValueError(f"group registration needs at least 2 samples, got {len(samples)}")
    if stop is None:
        stop = default_group_stop()
    if initial_index is None:
        initial_index = int(np.argmax([len(s) for s in samples]))
    elif not 0 <= initial_index < len(samples):
        raise ValueError(f"initial_index {initial_index} out of range")

    mean, _, _ = to_preshape(samples[initial_index])
    current = [s.copy() for s in samples]
    totals = [Pose.identity() for _ in samples]
    results: list[RegistrationResult] = []
    resampled: list[MaskedResampledContour] = []
    converged = False
    iterations = 0

    for it in range(stop.i_max):
        results = []
        resampled = []
        for m, y in enumerate(current):
            try:
                pair_stop = inner_stop if inner_stop is not None else default_stop([mean, y])
                res = register_pair(mean, y, pair_stop)
                resampled.append(resample_to_reference(mean, res.registered, res.path))
            except ComputationError as exc:
                raise type(exc)(f"sample {m}: {exc}") from exc
            results.append(res)
            current[m] = res.registered
            totals[m] = res.pose.compose(totals[m])

        counts = np.sum([r.mask for r in resampled], axis=0)
        if (counts == 0).any():
            bad = int(np.argmin(counts))
            raise InsufficientSupport(f"no sample covers mean index {bad}")
        stacked = np.sum([r.values for r in resampled], axis=0)
        mean_next, _, _ = to_preshape(stacked / counts)
        movement = float(np.sum(np.abs(mean_next - mean) ** 2))
        mean = mean_next
        iterations = it + 1
        if movement <= stop.c_min:
            converged = True
            break

    per_sample = [
        SampleRegistration(pose=totals[m], path=results[m].path, resampled=resampled[m])
        for m in range(len(samples))
    ]
    counts = np.sum([r.mask for r in resampled], axis=0)
    return GroupResult(
        mean=mean,
        per_sample=per_sample,
        iterations=iterations,
        converged=converged,
        support_counts=counts.astype(np.int64),
    )


def _masked_arrays(g: GroupResult) -> tuple[np.ndarray, np.ndarray]:
    values = np.stack([s.resampled.values for s in g.per_sample])
    mask = np.stack([s.resampled.mask for s in g.per_sample])
    return values, mask


def masked_variance_trace(
    values: np.ndarray, mask: np.ndarray, mean: np.ndarray | None = None
) -> float:
    """Total variance (covariance trace) of a masked sample stack.

    ``values`` is ``(M, N)`` complex, ``mask`` the matching presence flags.
    Indices covered by fewer than two samples contribute nothing.  The
    per-index variance uses the ``M_n - 1`` denominator; ``mean`` defaults
    to the masked per-index average.
    """
    values = np.asarray(values, dtype=np.complex128)
    mask = np.asarray(mask, dtype=bool)
    if values.shape != mask.shape:
        raise LengthMismatch("values and mask shapes differ")
    counts = mask.sum(axis=0)
    if mean is None:
        with np.errstate(invalid="ignore"):
            mean = np.where(
                counts > 0, np.sum(values * mask, axis=0) / np.maximum(counts, 1), 0.0
            )
    dev = (values - mean) * mask
    sq = np.sum(np.abs(dev) ** 2, axis=0)
    ok = counts >= 2
    return float(np.sum(sq[ok] / (counts[ok] - 1)))


def total_variance(g: GroupResult) -> float:
    """Trace of the masked sample covariance of the registered group."""
    values, mask = _masked_arrays(g)
    return masked_variance_trace(values, mask, mean=g.mean)


def learn_model(g: GroupResult) -> ShapeModel:
    """Estimate the complex covariance of the registered group about its mean.

    The estimate is pairwise complete: entry ``(i, j)`` averages deviation
    products over the samples covering both indices, with an ``M_ij - 1``
    denominator.  Every index must be covered by at least two samples.
    The result is projected onto the positive semidefinite cone (negative
    eigenvalues clipped to zero), since pairwise-complete estimates need
    not be positive semidefinite on their own.
    """
    values, mask = _masked_arrays(g)
    counts = mask.sum(axis=0)
    if (counts < 2).any():
        bad = int(np.argmin(counts))
        raise InsufficientSupport(
            f"mean index {bad} is covered by {int(counts[bad])} sample(s); need 2"
        )
    dev = (values - g.mean) * mask
    pair_counts = mask.T.astype(np.int64) @ mask.astype(np.int64)
    num = dev.T @ np.conj(dev)
    denom = np.maximum(pair_counts - 1, 1)
    cov = np.where(pair_counts >= 2, num / denom, 0.0)
    cov = (cov + cov.conj().T) / 2.0
    eigval, eigvec = np.linalg.eigh(cov)
    if eigval.min() < 0:
        cov = (eigvec * np.maximum(eigval, 0.0)) @ eigvec.conj().T
        cov = (cov + cov.conj().T) / 2.0
    return ShapeModel(mean=g.mean, covariance=cov, sample_count=len(g.per_sample))
