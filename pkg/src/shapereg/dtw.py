"""Dynamic time warping between two contours under squared point distance.

The warp minimises the summed squared Euclidean distance over all monotone
index paths from the first point pair to the last, with unit steps
``(1, 0)``, ``(0, 1)`` and ``(1, 1)``.  Indices are 0-based everywhere in
this package; the 1-based convention only appears in JSON serialisation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .contour import Contour, as_contour
from .errors import BandTooNarrow, IndexOutOfRange


@dataclass(frozen=True)
class WarpingPath:
    """Monotone correspondence path between two index ranges.

    ``pairs`` is an ``(L, 2)`` integer array; column 0 indexes the first
    contour, column 1 the second.
    """

    pairs: np.ndarray

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def n1(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def n2(self) -> np.ndarray:
        return self.pairs[:, 1]

    def validate(self, len1: int, len2: int) -> None:
        """Raise if the path violates any admissibility rule."""
        p = self.pairs
        if p.ndim != 2 or p.shape[1] != 2 or len(p) == 0:
            raise ValueError(f"path must be a non-empty (L, 2) array, got {p.shape}")
        if p.min() < 0 or p[:, 0].max() >= len1 or p[:, 1].max() >= len2:
            raise IndexOutOfRange(
                f"path indices exceed contour lengths {len1} and {len2}"
            )
        if tuple(p[0]) != (0, 0) or tuple(p[-1]) != (len1 - 1, len2 - 1):
            raise ValueError("path must run from the first pair to the last")
        steps = np.diff(p, axis=0)
        if steps.size and (
            steps.min() < 0 or steps.max() > 1 or (steps.sum(axis=1) < 1).any()
        ):
            raise ValueError("path steps must be (1,0), (0,1) or (1,1)")
        if not max(len1, len2) <= len(p) <= len1 + len2 - 1:
            raise ValueError("path length outside admissible bounds")

    def to_json_pairs(self) -> list[list[int]]:
        """1-based index pairs for serialisation."""
        return (self.pairs + 1).tolist()

    @classmethod
    def from_json_pairs(cls, pairs: list[list[int]]) -> "WarpingPath":
        return cls(np.asarray(pairs, dtype=np.int64) - 1)


@dataclass(frozen=True)
class AlignedPair:
    """Two equal-length point sequences produced by applying a path."""

    a: np.ndarray
    b: np.ndarray
    path: WarpingPath


@njit(cache=True)
def _accumulate(cost: np.ndarray) -> np.ndarray:  # pragma: no cover - jitted
    n1, n2 = cost.shape
    acc = np.full((n1 + 1, n2 + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n1 + 1):
        for j in range(1, n2 + 1):
            c = cost[i - 1, j - 1]
            if c == np.inf:
                continue
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            if best < np.inf:
                acc[i, j] = c + best
    return acc


def _local_cost(x1: Contour, x2: Contour, band: int | None) -> np.ndarray:
    cost = np.abs(x1[:, None] - x2[None, :]) ** 2
    if band is not None:
        offsets = np.arange(len(x1))[:, None] - np.arange(len(x2))[None, :]
        cost[np.abs(offsets) > band] = np.inf
    return cost


def accumulated_cost(x1: Contour, x2: Contour, band: int | None = None) -> np.ndarray:
    """Full ``(N1+1, N2+1)`` cumulative cost table with an infinite border.

    ``acc[i, j]`` is the minimal warp cost ending at the point pair
    ``(i-1, j-1)``; ``acc[N1, N2]`` is the optimal total cost.
    """
    x1 = as_contour(x1, name="first contour")
    x2 = as_contour(x2, name="second contour")
    if band is not None:
        band = int(band)
        if band < 0:
            raise ValueError("band must be non-negative")
        if band < abs(len(x1) - len(x2)):
            raise BandTooNarrow(
                f"band {band} cannot bridge lengths {len(x1)} and {len(x2)}"
            )
    return _accumulate(_local_cost(x1, x2, band))


def dtw_path(
    x1: Contour, x2: Contour, band: int | None = None
) -> tuple[WarpingPath, float]:
    """Optimal warping path between ``x1`` and ``x2`` and its total cost.

    :param band: optional half-width of a diagonal corridor ``|n1 - n2|``
        outside which correspondences are forbidden.
    :returns: ``(path, cost)``; ties during backtracking are broken in
        favour of the diagonal step, then the step advancing ``x1``.
    """
    x1 = as_contour(x1, name="first contour")
    x2 = as_contour(x2, name="second contour")
    acc = accumulated_cost(x1, x2, band)
    n1, n2 = len(x1), len(x2)
    cost = acc[n1, n2]
    if not np.isfinite(cost):
        raise RuntimeError("no admissible warping path found")  # unreachable

    i, j = n1, n2
    rev = [(i - 1, j - 1)]
    while (i, j) != (1, 1):
        diag = acc[i - 1, j - 1]
        vert = acc[i - 1, j]
        horz = acc[i, j - 1]
        if diag <= vert and diag <= horz:
            i, j = i - 1, j - 1
        elif vert <= horz:
            i = i - 1
        else:
            j = j - 1
        rev.append((i - 1, j - 1))
    pairs = np.array(rev[::-1], dtype=np.int64)
    path = WarpingPath(pairs)
    path.validate(n1, n2)
    return path, float(cost)


def apply_path(x1: Contour, x2: Contour, path: WarpingPath) -> AlignedPair:
    """Expand both contours along ``path`` into equal-length sequences."""
    x1 = as_contour(x1, name="first contour")
    x2 = as_contour(x2, name="second contour")
    p = path.pairs
    if p.min() < 0 or p[:, 0].max() >= len(x1) or p[:, 1].max() >= len(x2):
        raise IndexOutOfRange(
            f"path indices exceed contour lengths {len(x1)} and {len(x2)}"
        )
    return AlignedPair(a=x1[p[:, 0]], b=x2[p[:, 1]], path=path)
