"""Planar contours as complex vectors, similarity poses, and file I/O.

A contour is a 1-D ``numpy`` array of ``complex128`` samples, one point per
entry, ``x + 1j*y`` in pixel units.  A similarity pose is the pair ``(r, t)``
of complex numbers acting as ``p(x) = r*x + t``: ``|r|`` is the scale,
``arg(r)`` the rotation angle and ``t`` the translation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateContour, LengthMismatch, MalformedRow, ParseError

Contour = np.ndarray


def as_contour(points, *, name: str = "contour") -> Contour:
    """Validate and coerce ``points`` into a contour array.

    Accepts any sequence convertible to a 1-D complex vector of length >= 2
    with finite entries.  Returns a fresh ``complex128`` array.
    """
    c = np.asarray(points, dtype=np.complex128)
    if c.ndim == 2 and c.shape[1] == 2 and np.isrealobj(points):
        # (N, 2) real coordinate rows are accepted for convenience
        c = c[:, 0] + 1j * c[:, 1]
    if c.ndim != 1:
        raise ValueError(f"{name} must be a 1-D point sequence, got shape {c.shape}")
    if c.size < 2:
        raise ValueError(f"{name} needs at least 2 points, got {c.size}")
    c = np.ascontiguousarray(c)
    if not np.all(np.isfinite(c.view(np.float64))):
        raise ValueError(f"{name} contains non-finite coordinates")
    return c.copy()


@dataclass(frozen=True)
class Pose:
    """Similarity transform ``x -> r*x + t`` in complex form."""

    r: complex
    t: complex

    def __post_init__(self):
        if not (np.isfinite(self.r) and np.isfinite(self.t)):
            raise ValueError("pose parameters must be finite")

    @classmethod
    def identity(cls) -> "Pose":
        return cls(1.0 + 0.0j, 0.0 + 0.0j)

    @property
    def scale(self) -> float:
        return abs(self.r)

    @property
    def angle(self) -> float:
        """Rotation angle in radians."""
        return math.atan2(self.r.imag, self.r.real)

    def compose(self, inner: "Pose") -> "Pose":
        """Pose applying ``inner`` first, then ``self``."""
        return Pose(self.r * inner.r, self.r * inner.t + self.t)

    def inverse(self) -> "Pose":
        if self.r == 0:
            raise ValueError("pose with zero scale has no inverse")
        return Pose(1.0 / self.r, -self.t / self.r)

    def to_dict(self) -> dict:
        return {
            "r": {"re": self.r.real, "im": self.r.imag},
            "t": {"re": self.t.real, "im": self.t.imag},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Pose":
        return cls(
            complex(d["r"]["re"], d["r"]["im"]),
            complex(d["t"]["re"], d["t"]["im"]),
        )


def transform(c: Contour, p: Pose) -> Contour:
    """Apply the similarity ``p`` to every point of ``c``."""
    c = as_contour(c)
    return p.r * c + p.t


def to_preshape(c: Contour) -> tuple[np.ndarray, complex, float]:
    """Remove translation and scale from ``c``.

    Returns ``(tau, centroid, scale)`` where ``tau`` is the centred,
    unit-norm version of ``c``, ``centroid`` is the removed mean and
    ``scale`` the Euclidean norm of the centred vector, so that
    ``c == scale * tau + centroid``.
    """
    c = as_contour(c)
    centroid = complex(c.mean())
    centred = c - centroid
    scale = float(np.linalg.norm(centred))
    if scale == 0.0:
        raise DegenerateContour("all contour points are identical")
    return centred / scale, centroid, scale


def geodesic_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Shape-space distance ``arccos |<a, b>|`` between two preshapes.

    Both arguments must be preshapes of equal length.  The value lies in
    ``[0, pi/2]`` and is invariant to rotating either argument.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise LengthMismatch(f"preshape lengths differ: {a.size} vs {b.size}")
    inner = abs(np.vdot(a, b))
    return float(np.arccos(min(inner, 1.0)))


def read_contour(path: str | Path) -> Contour:
    """Read a contour from a ``.csv`` (``x,y`` rows) or ``.json`` file."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return _read_json(path)
    return _read_csv(path)


def write_contour(
    c: Contour,
    path: str | Path,
    *,
    name: str | None = None,
    pixel_size_mm: float | None = None,
) -> None:
    """Write a contour; the format follows the file extension.

    JSON files carry the optional ``name`` and ``pixel_size_mm`` metadata,
    CSV files hold bare ``x,y`` rows at full double precision.
    """
    c = as_contour(c)
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc: dict = {"name": name if name is not None else path.stem}
        if pixel_size_mm is not None:
            doc["pixel_size_mm"] = float(pixel_size_mm)
        doc["points"] = [[float(p.real), float(p.imag)] for p in c]
        path.write_text(json.dumps(doc, indent=2) + "\n")
    else:
        rows = [f"{float(p.real)!r},{float(p.imag)!r}" for p in c]
        path.write_text("\n".join(rows) + "\n")


def _read_csv(path: Path) -> Contour:
    points = []
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise MalformedRow(
                f"expected 2 comma-separated values, got {len(fields)}", line=lineno
            )
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError as exc:
            raise ParseError(f"non-numeric coordinate in {fields!r}", line=lineno) from exc
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(f"non-finite coordinate in {fields!r}", line=lineno)
        points.append(complex(x, y))
    if len(points) < 2:
        raise ParseError(f"{path} holds {len(points)} points; a contour needs at least 2")
    return np.array(points, dtype=np.complex128)


def _read_json(path: Path) -> Contour:
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict) or "points" not in doc:
        raise ParseError(f"{path} lacks a 'points' array")
    pts = doc["points"]
    if not isinstance(pts, list) or any(
        not isinstance(p, list) or len(p) != 2 for p in pts
    ):
        raise ParseError(f"{path}: 'points' must be a list of [x, y] pairs")
    try:
        return as_contour(np.array(pts, dtype=float))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
