"""Target-curve ingestion: normalization, arc-length resampling, curvature.

A target enters as an ordered planar point list (file or analytic family),
is normalized into a unit bounding box, resampled to uniform arc length on
a cubic-spline interpolant, and reduced to the signed curvature profile
kappa(s) that the inverse-design losses consume.

Conventions: counterclockwise traversal gives positive curvature (matching
the mechanism's curvature sign). Arc length is measured on a dense spline
polyline, so ``total_length`` approximates the true curve length far below
the resampling resolution. Closed curves wrap the difference stencils; open
curves use one-sided stencils at the ends. All functions here are plain
float/numpy preprocessing (no gradients flow into the target).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError

__all__ = [
    "TargetCurve",
    "ArcLengthProfile",
    "normalize_bbox",
    "arclength_parameterize",
    "curvature_profile",
    "analytic_targets",
    "load_points",
]

# Fine-polyline resolution used to measure arc length along the spline.
_FINE_MIN = 4096
_FINE_PER_SEGMENT = 32


def _set(obj, field, value):
    object.__setattr__(obj, field, value)


# ===== Domain types =====


@dataclass(frozen=True)
class TargetCurve:
    """An ordered planar point list; ``closed`` marks a loop (no duplicate
    endpoint is stored)."""

    points: tuple
    closed: bool = False

    def __post_init__(self):
        _set(self, "points", tuple((float(x), float(y))
                                   for x, y in self.points))
        if len(self.points) < 4:
            raise DomainError(f"target needs >= 4 points, got {len(self.points)}")
        for i in range(1, len(self.points)):
            if self.points[i] == self.points[i - 1]:
                raise DomainError(f"consecutive duplicate point at index {i}")


@dataclass(frozen=True)
class ArcLengthProfile:
    """A curve resampled at uniform arc length with its curvature profile.

    ``s_grid`` holds m+1 uniform values in [0, total_length]; ``nodes`` the
    resampled positions; ``kappa`` the signed (smoothed) curvature at each
    node; ``initial_tangent`` the tangent direction angle at s = 0.
    """

    s_grid: tuple
    kappa: tuple
    nodes: tuple
    total_length: float
    initial_tangent: float
    closed: bool = False

    def __post_init__(self):
        _set(self, "s_grid", tuple(float(s) for s in self.s_grid))
        _set(self, "kappa", tuple(float(k) for k in self.kappa))
        _set(self, "nodes", tuple((float(x), float(y)) for x, y in self.nodes))
        n = len(self.s_grid)
        if len(self.kappa) != n or len(self.nodes) != n:
            raise DomainError("s_grid, kappa and nodes must have equal length")
        if n < 2 or not self.total_length > 0.0:
            raise DomainError("profile needs >= 2 nodes and positive length")
        ds = self.total_length / (n - 1)
        for j, s in enumerate(self.s_grid):
            if abs(s - j * ds) > 1e-9 * self.total_length:
                raise DomainError(f"s_grid is not uniform at index {j}")

    @property
    def ds(self) -> float:
        return self.total_length / (len(self.s_grid) - 1)


# ===== Normalization and resampling =====


def normalize_bbox(curve: TargetCurve) -> TargetCurve:
    """Scale isotropically and translate into the unit bounding box.

    The longer bounding-box side maps to [0, 1]; aspect ratio is preserved.
    """
    pts = np.asarray(curve.points)
    lo = pts.min(axis=0)
    extent = pts.max(axis=0) - lo
    span = float(extent.max())
    if span <= 0.0:
        raise DomainError("degenerate target: zero bounding-box extent")
    out = (pts - lo) / span
    return TargetCurve(points=tuple(map(tuple, out)), closed=curve.closed)


def _spline(curve: TargetCurve):
    """Cubic splines x(u), y(u) on the cumulative chord-length parameter."""
    pts = np.asarray(curve.points)
    if curve.closed:
        pts = np.vstack([pts, pts[:1]])
    chord = np.hypot(*np.diff(pts, axis=0).T)
    u = np.concatenate([[0.0], np.cumsum(chord)])
    bc = "periodic" if curve.closed else "not-a-knot"
    cs_x = CubicSpline(u, pts[:, 0], bc_type=bc)
    cs_y = CubicSpline(u, pts[:, 1], bc_type=bc)
    return cs_x, cs_y, float(u[-1])


def arclength_parameterize(curve: TargetCurve, m: int,
                           smoothing: float | None = None) -> ArcLengthProfile:
    """Resample the curve at m+1 nodes of uniform arc length.

    Arc length is measured on a dense polyline along the spline, then
    inverted to place nodes at s = j L/m. ``smoothing`` is the Gaussian
    bandwidth (arc-length units) applied to the curvature profile; None
    selects the default of two grid spacings, 0 disables smoothing.
    """
    if not isinstance(m, int) or m < 3:
        raise DomainError(f"m must be an integer >= 3, got {m}")
    cs_x, cs_y, u_end = _spline(curve)

    fine = max(_FINE_MIN, _FINE_PER_SEGMENT * m)
    u_fine = np.linspace(0.0, u_end, fine + 1)
    xf = cs_x(u_fine)
    yf = cs_y(u_fine)
    s_fine = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(xf),
                                                       np.diff(yf)))])
    total = float(s_fine[-1])
    if total <= 0.0:
        raise DomainError("degenerate target: zero arc length")

    s_grid = np.linspace(0.0, total, m + 1)
    u_nodes = np.interp(s_grid, s_fine, u_fine)
    nodes = np.column_stack([cs_x(u_nodes), cs_y(u_nodes)])

    ds = total / m
    if smoothing is None:
        smoothing = 2.0 * ds
    kappa = curvature_profile(tuple(map(tuple, nodes)), ds,
                              closed=curve.closed, smoothing=smoothing)

    tangent = math.atan2(float(cs_y(0.0, 1)), float(cs_x(0.0, 1)))
    return ArcLengthProfile(s_grid=tuple(s_grid), kappa=kappa,
                            nodes=tuple(map(tuple, nodes)),
                            total_length=total, initial_tangent=tangent,
                            closed=curve.closed)


# ===== Curvature extraction =====


def _stencil_derivatives(f: np.ndarray, ds: float, closed: bool):
    """First and second derivatives on a uniform grid.

    Central differences inside; closed curves wrap (the duplicate endpoint
    is treated as one node), open curves use one-sided quadratic stencils
    at the two ends.
    """
    n = len(f)
    d1 = np.empty(n)
    d2 = np.empty(n)
    d1[1:-1] = (f[2:] - f[:-2]) / (2.0 * ds)
    d2[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (ds * ds)
    if closed:
        # nodes 0 and n-1 coincide; neighbors are f[1] and f[-2]
        d1[0] = d1[-1] = (f[1] - f[-2]) / (2.0 * ds)
        d2[0] = d2[-1] = (f[1] - 2.0 * f[0] + f[-2]) / (ds * ds)
    else:
        d1[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * ds)
        d1[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * ds)
        d2[0] = (f[0] - 2.0 * f[1] + f[2]) / (ds * ds)
        d2[-1] = (f[-1] - 2.0 * f[-2] + f[-3]) / (ds * ds)
    return d1, d2


def _gaussian_smooth(values: np.ndarray, ds: float, bandwidth: float,
                     closed: bool) -> np.ndarray:
    """Symmetric Gaussian kernel in arc length, truncated at three sigmas.

    Closed profiles convolve circularly; open profiles renormalize the
    kernel over the valid window near the ends (no phantom padding).
    """
    radius = int(math.ceil(3.0 * bandwidth / ds))
    if radius < 1:
        return values
    offs = np.arange(-radius, radius + 1)
    w = np.exp(-0.5 * (offs * ds / bandwidth) ** 2)
    n = len(values)
    out = np.empty(n)
    if closed:
        period = n - 1  # duplicate endpoint
        wn = w / w.sum()
        core = values[:period]
        for i in range(period):
            out[i] = float(wn @ core[(i + offs) % period])
        out[-1] = out[0]
    else:
        for i in range(n):
            lo = max(0, i - radius)
            hi = min(n, i + radius + 1)
            ww = w[lo - i + radius:hi - i + radius]
            out[i] = float(ww @ values[lo:hi]) / float(ww.sum())
    return out


def curvature_profile(nodes, ds: float | None = None, closed: bool = False,
                      smoothing: float = 0.0) -> tuple:
    """Signed curvature at each node of a uniform arc-length polyline.

    ``nodes`` may also be an ArcLengthProfile, in which case its grid
    spacing and closedness are used. Curvature is the standard
    (x'y'' - y'x'') / (x'^2 + y'^2)^(3/2) evaluated by finite differences
    on the s-grid, optionally smoothed by a Gaussian kernel of the given
    arc-length bandwidth.
    """
    if isinstance(nodes, ArcLengthProfile):
        ds = nodes.ds
        closed = nodes.closed
        nodes = nodes.nodes
    if ds is None or not ds > 0.0:
        raise DomainError("ds must be a positive grid spacing")
    pts = np.asarray(nodes, dtype=float)
    if len(pts) < 5:
        raise DomainError(f"curvature needs >= 5 nodes, got {len(pts)}")
    x1, x2 = _stencil_derivatives(pts[:, 0], ds, closed)
    y1, y2 = _stencil_derivatives(pts[:, 1], ds, closed)
    speed2 = x1 * x1 + y1 * y1
    kappa = (x1 * y2 - y1 * x2) / np.power(speed2, 1.5)
    if smoothing > 0.0:
        kappa = _gaussian_smooth(kappa, ds, smoothing, closed)
    return tuple(float(k) for k in kappa)


# ===== Analytic families and file input =====


def _integrate_heading(s: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Positions of a unit-speed curve from its tangent angle (trapezoid)."""
    cx = np.cos(theta)
    cy = np.sin(theta)
    ds = np.diff(s)
    x = np.concatenate([[0.0], np.cumsum(0.5 * ds * (cx[1:] + cx[:-1]))])
    y = np.concatenate([[0.0], np.cumsum(0.5 * ds * (cy[1:] + cy[:-1]))])
    return np.column_stack([x, y])


def analytic_targets(name: str, params: dict | None = None) -> TargetCurve:
    """Densely sampled curves from named analytic families.

    Families: ``line`` (length), ``circle`` (r), ``spiral`` (linearly
    increasing curvature: rate, length), ``sine`` (sinusoidal curvature:
    amp, cycles, length), ``flower3`` (three-petaled rose: a). ``n`` sets
    the sample count (default 1000). Curvature-profile families integrate
    the tangent-angle relation theta' = kappa exactly where possible.
    """
    p = dict(params or {})
    n = int(p.pop("n", 1000))
    if n < 8:
        raise DomainError(f"need n >= 8 samples, got {n}")
    if name == "line":
        length = float(p.pop("length", 1.0))
        xs = np.linspace(0.0, length, n)
        pts = np.column_stack([xs, np.zeros(n)])
        closed = False
    elif name == "circle":
        r = float(p.pop("r", 1.0))
        if r <= 0.0:
            raise DomainError(f"circle radius must be positive, got {r}")
        th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        closed = True
    elif name == "spiral":
        rate = float(p.pop("rate", 4.0))
        length = float(p.pop("length", 1.0))
        s = np.linspace(0.0, length, n)
        theta = 0.5 * rate * s * s
        pts = _integrate_heading(s, theta)
        closed = False
    elif name == "sine":
        amp = float(p.pop("amp", 3.0))
        cycles = float(p.pop("cycles", 1.0))
        length = float(p.pop("length", 1.0))
        s = np.linspace(0.0, length, n)
        w = 2.0 * math.pi * cycles / length
        theta = (amp / w) * (1.0 - np.cos(w * s))
        pts = _integrate_heading(s, theta)
        closed = False
    elif name == "flower3":
        a = float(p.pop("a", 1.0))
        th = np.linspace(0.0, math.pi, n, endpoint=False)
        r = a * np.cos(3.0 * th)
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        closed = True
    else:
        raise DomainError(f"unknown analytic target {name!r}")
    if p:
        raise DomainError(f"unknown parameters for {name!r}: {sorted(p)}")
    return TargetCurve(points=tuple(map(tuple, pts)), closed=closed)


def _looks_numeric(row) -> bool:
    try:
        [float(v) for v in row]
        return True
    except (TypeError, ValueError):
        return False


def load_points(path: str) -> TargetCurve:
    """Read a point list from CSV (x,y per line, optional header) or JSON.

    A curve whose endpoints coincide (within 1e-9 of the bounding-box
    diagonal) is treated as closed and the duplicate endpoint is dropped.
    """
    try:
        if str(path).lower().endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
            pts = [(float(x), float(y)) for x, y in raw]
        else:
            pts = []
            with open(path, "r", encoding="utf-8", newline="") as fh:
                for row in csv.reader(fh):
                    row = [v for v in row if v.strip() != ""]
                    if not row:
                        continue
                    if not _looks_numeric(row):
                        if pts:
                            raise DomainError(
                                f"non-numeric row after data in {path}")
                        continue  # header
                    if len(row) != 2:
                        raise DomainError(
                            f"expected 2 columns in {path}, got {len(row)}")
                    pts.append((float(row[0]), float(row[1])))
    except OSError as exc:
        raise DomainError(f"cannot read target file {path}: {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise DomainError(f"malformed target file {path}: {exc}") from exc
    if len(pts) < 4:
        raise DomainError(f"target file {path} has fewer than 4 points")
    arr = np.asarray(pts)
    diag = float(np.hypot(*(arr.max(axis=0) - arr.min(axis=0))))
    closed = (diag > 0.0
              and math.hypot(pts[0][0] - pts[-1][0],
                             pts[0][1] - pts[-1][1]) < 1e-9 * diag)
    if closed:
        pts = pts[:-1]
    return TargetCurve(points=tuple(pts), closed=closed)
