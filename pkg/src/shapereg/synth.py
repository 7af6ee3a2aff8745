"""Synthetic contour perturbations, point-order recovery and data generation.

All generators take integer seeds and are deterministic: per-sample (or
per-trial) random streams are split off the master seed with
``numpy.random.SeedSequence.spawn``, so changing one sample's draws never
shifts another's.  Complex Gaussian noise ``CN(0, s^2)`` draws real and
imaginary parts independently with standard deviation ``s / sqrt(2)``,
giving ``E|z|^2 = s^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import cKDTree

from .contour import Contour, Pose, as_contour
from .errors import ConfigInfeasible, OrderRecoveryFailed

_PLACEMENT_ATTEMPTS = 10_000


@dataclass(frozen=True)
class OutlierConfig:
    """Parameters of the segment-displacement corruption model.

    Every point receives isotropic complex Gaussian noise of power
    ``sigma_n**2``; then ``n_segments`` non-overlapping runs of random
    length (a fraction of the contour length drawn uniformly from
    ``seg_len_frac``) are each displaced rigidly by a single complex
    Gaussian draw of power ``sigma_t**2``.
    """

    sigma_t: float = 12.0
    sigma_n: float = 1.0
    n_segments: int = 10
    seg_len_frac: tuple[float, float] = (0.01, 0.10)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.seg_len_frac
        if not 0 < lo <= hi < 1:
            raise ValueError(f"seg_len_frac must satisfy 0 < lo <= hi < 1, got {self.seg_len_frac}")
        if self.sigma_t < 0 or self.sigma_n < 0:
            raise ValueError("noise scales must be non-negative")
        if self.n_segments < 0:
            raise ValueError("n_segments must be non-negative")


def _complex_normal(rng: np.random.Generator, power: float, size=None) -> np.ndarray:
    s = math.sqrt(power / 2.0) if power > 0 else 0.0
    return rng.normal(0.0, s, size) + 1j * rng.normal(0.0, s, size)


def inject_outliers(c: Contour, cfg: OutlierConfig) -> tuple[Contour, np.ndarray]:
    """Corrupt ``c`` per ``cfg``; returns the corrupted contour and a mask
    flagging the displaced points."""
    c = as_contour(c)
    n = len(c)
    lo = max(1, int(round(cfg.seg_len_frac[0] * n)))
    hi = max(lo, int(round(cfg.seg_len_frac[1] * n)))
    if cfg.n_segments * hi > n:
        raise ConfigInfeasible(
            f"{cfg.n_segments} segments of up to {hi} points cannot fit in {n} points"
        )
    rng = np.random.default_rng(cfg.seed)
    out = c + _complex_normal(rng, cfg.sigma_n**2, n)
    mask = np.zeros(n, dtype=bool)
    for s in range(cfg.n_segments):
        placed = False
        for _ in range(_PLACEMENT_ATTEMPTS):
            length = int(rng.integers(lo, hi + 1))
            start = int(rng.integers(0, n - length + 1))
            if not mask[start : start + length].any():
                placed = True
                break
        if not placed:
            raise ConfigInfeasible(
                f"could not place segment {s} without overlap after "
                f"{_PLACEMENT_ATTEMPTS} attempts"
            )
        out[start : start + length] += _complex_normal(rng, cfg.sigma_t**2)
        mask[start : start + length] = True
    return out, mask


def shuffle_points(c: Contour, seed: int = 0) -> Contour:
    """Return the points of ``c`` in a random order."""
    c = as_contour(c)
    rng = np.random.default_rng(seed)
    return c[rng.permutation(len(c))]


def recover_order(points: Contour) -> Contour:
    """Recover a traversal order for an unordered curve-like point set.

    Builds a symmetric nearest-neighbour graph, reduces it to its minimum
    spanning tree and reads the ordering off the tree, which must be a
    simple chain; a tree vertex touching more than two edges means the
    ordering is ambiguous and raises :class:`OrderRecoveryFailed`.  The
    result traverses the closed polygon anti-clockwise (positive signed
    area with the y axis up) and starts at the point nearest the bounding
    box of the set; for open chains the start is the endpoint nearest the
    bounding box.
    """
    pts = as_contour(points, name="point set")
    n = len(pts)
    if n < 3:
        raise ValueError(f"order recovery needs at least 3 points, got {n}")
    coords = np.column_stack([pts.real, pts.imag])
    tree = cKDTree(coords)

    k = min(4, n - 1)
    while True:
        dist, idx = tree.query(coords, k=k + 1)
        rows = np.repeat(np.arange(n), k)
        cols = idx[:, 1:].ravel()
        vals = dist[:, 1:].ravel()
        graph = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        graph = graph.maximum(graph.T)
        n_comp, _ = connected_components(graph, directed=False)
        if n_comp == 1 or k >= n - 1:
            break
        k = min(2 * k, n - 1)
    if n_comp > 1:
        raise OrderRecoveryFailed(f"point set splits into {n_comp} disconnected clusters")

    mst = minimum_spanning_tree(graph)
    mst = mst.maximum(mst.T).tocsr()
    degrees = np.diff(mst.indptr)
    if degrees.max() > 2:
        bad = int(np.argmax(degrees))
        raise OrderRecoveryFailed(
            f"branching at point {bad}: {int(degrees[bad])} chain neighbours"
        )

    # a tree with max degree 2 is a simple path; walk it end to end
    start = int(np.argmax(degrees == 1))
    order = [start]
    prev = -1
    node = start
    for _ in range(n - 1):
        nbrs = mst.indices[mst.indptr[node] : mst.indptr[node + 1]]
        nxt = [int(v) for v in nbrs if v != prev]
        if len(nxt) != 1:
            raise OrderRecoveryFailed("chain walk did not cover every point")
        prev, node = node, nxt[0]
        order.append(node)
    order = np.array(order)

    ordered = pts[order]
    spacing = np.abs(np.diff(ordered))
    gap = abs(ordered[-1] - ordered[0])
    closed = bool(gap < 2.0 * np.median(spacing))

    if closed:
        border = _border_distance(ordered)
        shift = int(np.argmin(border))
        ordered = np.roll(ordered, -shift)
        if _signed_area(ordered) < 0:
            ordered = np.concatenate([ordered[:1], ordered[1:][::-1]])
    else:
        border = _border_distance(ordered)
        d_first, d_last = float(border[0]), float(border[-1])
        if abs(d_first - d_last) > 1e-12:
            if d_last < d_first:
                ordered = ordered[::-1].copy()
        elif _signed_area(ordered) < 0:
            ordered = ordered[::-1].copy()
    return ordered


def _signed_area(c: np.ndarray) -> float:
    """Shoelace area of the closed polygon; positive is anti-clockwise."""
    x, y = c.real, c.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _border_distance(c: np.ndarray) -> np.ndarray:
    """Distance of each point to the bounding box of the whole set."""
    x, y = c.real, c.imag
    return np.minimum.reduce(
        [x - x.min(), x.max() - x, y - y.min(), y.max() - y]
    )


@dataclass(frozen=True)
class PoseRanges:
    """Uniform sampling ranges for random similarity poses."""

    scale: tuple[float, float] = (1.0, 1.0)
    rotation: float = 0.0
    translation: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))

    def __post_init__(self):
        if not 0 < self.scale[0] <= self.scale[1]:
            raise ValueError(f"scale range must be positive and ordered, got {self.scale}")
        if self.rotation < 0:
            raise ValueError("rotation half-range must be non-negative")

    def draw(self, rng: np.random.Generator) -> Pose:
        scale = rng.uniform(*self.scale)
        angle = rng.uniform(-self.rotation, self.rotation)
        tx = rng.uniform(*self.translation[0])
        ty = rng.uniform(*self.translation[1])
        return Pose(scale * complex(math.cos(angle), math.sin(angle)), complex(tx, ty))


@dataclass(frozen=True)
class SynthFamilyConfig:
    """Recipe for a family of deformed, posed, optionally truncated samples."""

    base: np.ndarray
    m: int
    deform_sigma: float = 0.0
    pose_ranges: PoseRanges = field(default_factory=PoseRanges)
    truncation_frac: tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"a family needs at least 2 samples, got {self.m}")
        lo, hi = self.truncation_frac
        if not 0 <= lo <= hi < 1:
            raise ValueError(f"truncation_frac must satisfy 0 <= lo <= hi < 1, got {self.truncation_frac}")
        if self.deform_sigma < 0:
            raise ValueError("deform_sigma must be non-negative")


@dataclass(frozen=True)
class SampleTruth:
    """Generating parameters of one synthetic sample."""

    pose: Pose
    deformation: np.ndarray
    cut_start: int
    cut_end: int


def generate_family(cfg: SynthFamilyConfig) -> tuple[list[Contour], list[SampleTruth]]:
    """Draw ``cfg.m`` samples ``pose(base + deformation)`` with truncation.

    Each sample's deformation is isotropic complex Gaussian per point with
    power ``deform_sigma**2``; truncation removes a uniformly drawn
    fraction of points from one randomly chosen end.
    """
    base = as_contour(cfg.base, name="base contour")
    n = len(base)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.m)
    samples: list[Contour] = []
    truths: list[SampleTruth] = []
    for child in children:
        rng = np.random.default_rng(child)
        deform = _complex_normal(rng, cfg.deform_sigma**2, n)
        pose = cfg.pose_ranges.draw(rng)
        full = pose.r * (base + deform) + pose.t
        frac = rng.uniform(*cfg.truncation_frac)
        cut = min(int(round(frac * n)), n - 2)
        at_start = bool(rng.integers(0, 2))
        cut_start, cut_end = (cut, 0) if at_start else (0, cut)
        samples.append(full[cut_start : n - cut_end])
        truths.append(
            SampleTruth(pose=pose, deformation=deform, cut_start=cut_start, cut_end=cut_end)
        )
    return samples, truths


# Control polygon of the test template: a femur-like outline traced
# anti-clockwise (y up) from the shaft up over the greater trochanter,
# around the head, and back down the far side of the shaft.  The first
# point sits on the bounding box; the last is 8 px inside it.
_TEMPLATE_CONTROL = (
    (150.0, 0.0),
    (155.0, 60.0),
    (160.0, 120.0),
    (172.0, 168.0),
    (200.0, 215.0),
    (206.0, 252.0),
    (190.0, 272.0),
    (168.0, 262.0),
    (150.0, 238.0),
    (132.0, 252.0),
    (114.0, 286.0),
    (84.0, 305.0),
    (50.0, 290.0),
    (34.0, 255.0),
    (44.0, 218.0),
    (70.0, 180.0),
    (92.0, 142.0),
    (104.0, 118.0),
    (98.0, 60.0),
    (100.0, 8.0),
)


def femur_like_template(n_points: int = 600, scale: float = 1.0) -> Contour:
    """Smooth open test contour resembling a proximal femur outline.

    A cubic spline through a fixed control polygon, resampled to
    ``n_points`` equal arc-length steps.  Deterministic; ``scale``
    multiplies all coordinates.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be at least 2, got {n_points}")
    ctrl = np.array(_TEMPLATE_CONTROL)
    tck, _ = interpolate.splprep([ctrl[:, 0], ctrl[:, 1]], s=0.0, k=3)
    u_dense = np.linspace(0.0, 1.0, 4096)
    x, y = interpolate.splev(u_dense, tck)
    steps = np.hypot(np.diff(x), np.diff(y))
    arc = np.concatenate([[0.0], np.cumsum(steps)])
    targets = np.linspace(0.0, arc[-1], n_points)
    u_eq = np.interp(targets, arc, u_dense)
    x, y = interpolate.splev(u_eq, tck)
    return scale * (np.asarray(x) + 1j * np.asarray(y))
