"""Registration quality metrics: nearest-point distance and region overlap.

``d_test`` averages, over the target points, the distance to the nearest
reference point; it is asymmetric and scales linearly with any similarity
applied to both contours.  ``iou`` rasterises both contours (closed by
joining last to first point) on a shared grid with even-odd filling and
reports the intersection-over-union of the filled cell sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .contour import Contour, as_contour
from .errors import ZeroArea

# refuse grids this large; the caller picked a resolution too fine
_MAX_CELLS = 50_000_000


@dataclass(frozen=True)
class MetricReport:
    """Metric summary for one registered pair."""

    d_test: float
    iou: float
    n_reference: int
    n_target: int

    def table(self) -> str:
        """Fixed-precision two-row table for terminal output."""
        rows = [
            ("d_test [px]", f"{self.d_test:.3f}"),
            ("iou", "n/a" if np.isnan(self.iou) else f"{self.iou:.4f}"),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def d_test(reference: Contour, target: Contour) -> float:
    """Mean distance from each target point to its nearest reference point."""
    reference = as_contour(reference, name="reference")
    target = as_contour(target, name="target")
    tree = cKDTree(np.column_stack([reference.real, reference.imag]))
    dist, _ = tree.query(np.column_stack([target.real, target.imag]), k=1)
    return float(dist.mean())


def iou(reference: Contour, target: Contour, resolution: float = 0.25) -> float:
    """Intersection over union of the two filled contour regions.

    Both contours are closed by connecting the last point back to the
    first and rasterised with the even-odd rule on a common grid of cell
    size ``resolution`` covering their joint bounding box plus a two-cell
    margin.  Raises :class:`ZeroArea` when either region fills no cell.
    """
    reference = as_contour(reference, name="reference")
    target = as_contour(target, name="target")
    if not (np.isfinite(resolution) and resolution > 0):
        raise ValueError(f"resolution must be positive, got {resolution}")
    both = np.concatenate([reference, target])
    x0 = float(both.real.min()) - 2.0 * resolution
    y0 = float(both.imag.min()) - 2.0 * resolution
    ncols = int(np.ceil((float(both.real.max()) - x0) / resolution)) + 2
    nrows = int(np.ceil((float(both.imag.max()) - y0) / resolution)) + 2
    if nrows * ncols > _MAX_CELLS:
        raise ValueError(
            f"resolution {resolution} yields {nrows * ncols} cells; too fine for extent"
        )
    fill_a = _rasterize(reference, x0, y0, nrows, ncols, resolution)
    fill_b = _rasterize(target, x0, y0, nrows, ncols, resolution)
    area_a = int(fill_a.sum())
    area_b = int(fill_b.sum())
    if area_a == 0:
        raise ZeroArea("reference contour rasterises to an empty region")
    if area_b == 0:
        raise ZeroArea("target contour rasterises to an empty region")
    inter = int(np.logical_and(fill_a, fill_b).sum())
    union = area_a + area_b - inter
    return inter / union


def metric_report(
    reference: Contour, target: Contour, resolution: float = 0.25
) -> MetricReport:
    """Compute both metrics; IoU falls back to NaN when an area degenerates."""
    reference = as_contour(reference, name="reference")
    target = as_contour(target, name="target")
    try:
        overlap = iou(reference, target, resolution)
    except ZeroArea:
        overlap = float("nan")
    return MetricReport(
        d_test=d_test(reference, target),
        iou=overlap,
        n_reference=len(reference),
        n_target=len(target),
    )


def _rasterize(
    c: Contour, x0: float, y0: float, nrows: int, ncols: int, res: float
) -> np.ndarray:
    """Even-odd scanline fill of the closed polygon ``c`` on a cell grid.

    A cell belongs to the region when its centre sees an odd number of
    polygon edge crossings to its left.
    """
    xs = np.append(c.real, c.real[0])
    ys = np.append(c.imag, c.imag[0])
    x1, x2 = xs[:-1], xs[1:]
    y1, y2 = ys[:-1], ys[1:]
    keep = y1 != y2  # horizontal edges never cross a scanline
    x1, x2, y1, y2 = x1[keep], x2[keep], y1[keep], y2[keep]

    fill = np.zeros((nrows, ncols), dtype=bool)
    if x1.size == 0:
        return fill
    row_y = y0 + (np.arange(nrows) + 0.5) * res
    col_x = x0 + (np.arange(ncols) + 0.5) * res
    # half-open span test makes shared edge vertices count exactly once
    crosses = ((y1[None, :] <= row_y[:, None]) & (row_y[:, None] < y2[None, :])) | (
        (y2[None, :] <= row_y[:, None]) & (row_y[:, None] < y1[None, :])
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        cross_x = x1 + (row_y[:, None] - y1) * (x2 - x1) / (y2 - y1)
    for r in range(nrows):
        hit = crosses[r]
        if not hit.any():
            continue
        edges = np.sort(cross_x[r, hit])
        fill[r] = np.searchsorted(edges, col_x, side="left") % 2 == 1
    return fill
