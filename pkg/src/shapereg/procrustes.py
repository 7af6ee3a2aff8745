"""Similarity pose estimation and correspondence weighting.

The pose fit solves, for a target ``x2`` and reference ``x1`` of equal
length, ``min_{r,t} sum_l w_l |x1_l - (r*x2_l + t)|^2`` in closed form by
eliminating the translation through weighted centroids.  Weights grade each
correspondence by how well it agrees with the dominant residual scale: the
squared preshape residual of a pair, normalised by the average residual
power, follows a chi-square law with two degrees of freedom under an
isotropic complex Gaussian deformation, and the weight is that law's
survival function ``exp(-delta/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import Pose, to_preshape
from .dtw import AlignedPair, WarpingPath
from .errors import LengthMismatch, SingularSystem

# weights at or below this value count as zero support for the fit
_ZERO_WEIGHT = 1e-12


@dataclass(frozen=True)
class DeformationStats:
    """Residual statistics behind a weight vector.

    :param sigma2: mean squared preshape residual per point.
    :param rbar: unit-modulus rotation aligning the target preshape onto
        the reference preshape.
    :param deltas: per-point normalised squared residuals (non-negative).
    """

    sigma2: float
    rbar: complex
    deltas: np.ndarray


def fit_pose(x1: np.ndarray, x2: np.ndarray) -> Pose:
    """Least-squares similarity pose mapping ``x2`` onto ``x1``."""
    return fit_pose_weighted(x1, x2, None)


def fit_pose_weighted(
    x1: np.ndarray, x2: np.ndarray, weights: np.ndarray | None
) -> Pose:
    """Weighted least-squares similarity pose mapping ``x2`` onto ``x1``.

    ``weights`` may be ``None`` for the unweighted fit.  Raises
    :class:`SingularSystem` when fewer than two correspondences carry
    weight or the weighted target points coincide.
    """
    x1 = np.asarray(x1, dtype=np.complex128)
    x2 = np.asarray(x2, dtype=np.complex128)
    if x1.shape != x2.shape or x1.ndim != 1:
        raise LengthMismatch(
            f"pose fit needs equal-length vectors, got {x1.shape} and {x2.shape}"
        )
    if weights is None:
        w = np.ones(len(x1))
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != x1.shape:
            raise LengthMismatch(
                f"weight length {w.shape} does not match points {x1.shape}"
            )
        if w.min() < 0 or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
    if np.count_nonzero(w > _ZERO_WEIGHT) < 2:
        raise SingularSystem("fewer than 2 positively weighted correspondences")

    # Schur-complement solution of the 2x2 weighted normal equations:
    # centring against the weighted means leaves a scalar complex system.
    # Real/imaginary parts are summed separately so that a self-fit
    # cancels exactly and returns the identity pose bit for bit.
    sw = float(w.sum())
    m1 = complex(np.sum(w * x1) / sw)
    m2 = complex(np.sum(w * x2) / sw)
    d1 = x1 - m1
    d2 = x2 - m2
    num_re = float(np.sum(w * (d2.real * d1.real + d2.imag * d1.imag)))
    num_im = float(np.sum(w * (d2.real * d1.imag - d2.imag * d1.real)))
    den = float(np.sum(w * (d2.real * d2.real + d2.imag * d2.imag)))
    power = float(np.sum(w * (x2.real * x2.real + x2.imag * x2.imag)))
    if den <= 0.0 or den <= 1e-12 * power:
        raise SingularSystem("weighted target points are (numerically) coincident")
    r = complex(num_re / den, num_im / den)
    t = m1 - r * m2
    return Pose(r, t)


def fit_rigid(x1: np.ndarray, x2: np.ndarray) -> Pose:
    """Least-squares rotation plus translation mapping ``x2`` onto ``x1``.

    Like :func:`fit_pose` but with the scale pinned to one, so a shrinking
    point set cannot buy residual reduction by collapsing.  Raises
    :class:`SingularSystem` when the rotation is undetermined (either side
    degenerate, or the centred cross-correlation vanishing).
    """
    x1 = np.asarray(x1, dtype=np.complex128)
    x2 = np.asarray(x2, dtype=np.complex128)
    if x1.shape != x2.shape or x1.ndim != 1:
        raise LengthMismatch(
            f"pose fit needs equal-length vectors, got {x1.shape} and {x2.shape}"
        )
    if len(x1) < 2:
        raise SingularSystem("fewer than 2 correspondences")
    n = float(len(x1))
    m1 = complex(np.sum(x1) / n)
    m2 = complex(np.sum(x2) / n)
    d1 = x1 - m1
    d2 = x2 - m2
    num_re = float(np.sum(d2.real * d1.real + d2.imag * d1.imag))
    num_im = float(np.sum(d2.real * d1.imag - d2.imag * d1.real))
    den1 = float(np.sum(d1.real * d1.real + d1.imag * d1.imag))
    den2 = float(np.sum(d2.real * d2.real + d2.imag * d2.imag))
    nrm = float(np.hypot(num_re, num_im))
    if den1 <= 0.0 or den2 <= 0.0 or nrm <= 1e-12 * np.sqrt(den1 * den2):
        raise SingularSystem("rotation is undetermined for these correspondences")
    r = complex(num_re / nrm, num_im / nrm)
    t = m1 - r * m2
    return Pose(r, t)


def residual_weight(delta) -> np.ndarray:
    """Weight of a normalised squared residual ``delta``.

    The survival function of a chi-square variable with two degrees of
    freedom: ``1`` at zero, ``0.5`` at ``2*ln(2)``, decaying to zero.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if (delta < 0).any():
        raise ValueError("normalised residuals must be non-negative")
    return np.exp(-delta / 2.0)


# preshapes have unit norm, so mean squared residuals at or below this are
# floating-point noise and the pair counts as identical
_NOISE_POWER = 1e-28


def compute_weights(aligned: AlignedPair) -> tuple[np.ndarray, DeformationStats]:
    """Per-correspondence weights in ``[0, 1]`` for an aligned pair.

    Both sequences are reduced to preshapes, rotationally aligned, and the
    pointwise residuals normalised by their mean power.  When both
    sequences have identical preshapes all weights are one.
    """
    tau1, _, _ = to_preshape(aligned.a)
    tau2, _, _ = to_preshape(aligned.b)
    rbar = np.exp(-1j * np.angle(np.vdot(tau1, tau2)))
    residual = rbar * tau2 - tau1
    sq = np.abs(residual) ** 2
    sigma2 = float(sq.mean())
    if sigma2 <= _NOISE_POWER:
        sigma2 = 0.0
        deltas = np.zeros(len(sq))
        weights = np.ones(len(sq))
    else:
        deltas = 2.0 * sq / sigma2
        weights = residual_weight(deltas)
    return weights, DeformationStats(sigma2=sigma2, rbar=complex(rbar), deltas=deltas)


def soft_boundary(weights: np.ndarray, path: WarpingPath) -> np.ndarray:
    """Zero out weights of boundary-forced correspondences.

    The first and last path pairs are forced by the warp's endpoint rule,
    so a run of repeats of either contour's first (or last) index marks
    correspondences that exist only to satisfy that rule.  On each side,
    every pair before the last repeat of the initial index, and every pair
    after the first repeat of the final index, loses its weight.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) != len(path):
        raise LengthMismatch(
            f"weight length {w.shape} does not match path length {len(path)}"
        )
    w = w.copy()
    L = len(w)
    for side in (0, 1):
        col = path.pairs[:, side]
        lead = 1
        while lead < L and col[lead] == col[0]:
            lead += 1
        if lead > 1:
            w[: lead - 1] = 0.0
        trail = 1
        while trail < L and col[L - 1 - trail] == col[L - 1]:
            trail += 1
        if trail > 1:
            w[L - trail + 1 :] = 0.0
    return w
