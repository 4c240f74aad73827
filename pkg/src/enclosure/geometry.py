"""Polygon primitives, support functions and convex-hull utilities.

Points are plain ``numpy`` arrays of shape ``(2,)``; polygons store their
vertices counterclockwise as an ``(n, 2)`` array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CollinearInput,
    DegenerateCone,
    DegeneratePolygon,
    EmptyIntersection,
    GeometryError,
    InsufficientDirections,
    NonRegularDirection,
)

DEFAULT_MARGIN = 1e-9
_UNIT_TOL = 1e-12


def _cross(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = _cross(p2 - p1, q1 - p1)
    d2 = _cross(p2 - p1, q2 - p1)
    d3 = _cross(q2 - q1, p1 - q1)
    d4 = _cross(q2 - q1, p2 - q1)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


@dataclass(frozen=True)
class Direction:
    """Probe frame: unit ``omega`` and ``omega_perp`` = omega rotated by +90 degrees."""

    omega: np.ndarray
    omega_perp: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        wp = np.asarray(self.omega_perp, dtype=float)
        if abs(np.hypot(*w) - 1.0) > _UNIT_TOL or abs(float(w @ wp)) > _UNIT_TOL:
            raise GeometryError("direction frame must be orthonormal")
        if np.max(np.abs(wp - np.array([-w[1], w[0]]))) > 1e-10:
            raise GeometryError("omega_perp must be omega rotated by +90 degrees")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "omega_perp", wp)

    @classmethod
    def from_angle(cls, theta: float) -> "Direction":
        c, s = math.cos(theta), math.sin(theta)
        return cls(np.array([c, s]), np.array([-s, c]))

    @classmethod
    def from_degrees(cls, deg: float) -> "Direction":
        return cls.from_angle(math.radians(deg))

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, dtype=float)
        return cls.from_angle(math.atan2(v[1], v[0]))

    @property
    def angle(self) -> float:
        return math.atan2(self.omega[1], self.omega[0])

    @property
    def degrees(self) -> float:
        return math.degrees(self.angle) % 360.0


@dataclass(frozen=True)
class PolygonDomain:
    """Simple polygon with counterclockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DegeneratePolygon("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise DegeneratePolygon("vertices must be finite")
        if signed_area(v) <= 0:
            raise DegeneratePolygon("vertices must be ordered counterclockwise with positive area")
        n = len(v)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                    raise DegeneratePolygon("polygon is self-intersecting")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def edges(self) -> list[tuple[np.ndarray, np.ndarray]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    @property
    def perimeter(self) -> float:
        d = np.roll(self.vertices, -1, axis=0) - self.vertices
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    def bounding_box(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def contains(self, x, closed: bool = True) -> bool:
        """Point-in-polygon by winding; boundary points count when ``closed``."""
        x = np.asarray(x, dtype=float)
        if self.distance_to_boundary(x) < 1e-14:
            return closed
        inside = False
        v = self.vertices
        n = len(v)
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            if (a[1] > x[1]) != (b[1] > x[1]):
                xc = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
                if xc > x[0]:
                    inside = not inside
        return inside

    def distance_to_boundary(self, x) -> float:
        return float(np.min(point_segment_distances(np.asarray(x, float), self.vertices)))

    def distance(self, x) -> float:
        """Distance from x to the closed polygon (zero inside)."""
        x = np.asarray(x, dtype=float)
        d = self.distance_to_boundary(x)
        if d == 0.0:
            return 0.0
        return 0.0 if self.contains(x) else d

    def translated(self, shift) -> "PolygonDomain":
        return PolygonDomain(self.vertices + np.asarray(shift, float))

    def rotated(self, theta: float, center=(0.0, 0.0)) -> "PolygonDomain":
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, -s], [s, c]])
        center = np.asarray(center, float)
        return PolygonDomain((self.vertices - center) @ rot.T + center)

    def to_json(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in self.vertices]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[float]]) -> "PolygonDomain":
        return cls(np.asarray(data, dtype=float))


@dataclass(frozen=True)
class DiskDomain:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("disk radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    def distance(self, x) -> float:
        return max(0.0, float(np.hypot(*(np.asarray(x, float) - self.center))) - self.radius)

    def bounding_box(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        r = self.radius
        return cx - r, cy - r, cx + r, cy + r


@dataclass(frozen=True)
class RegularityResult:
    regular: bool
    vertex: np.ndarray | None = None
    gap: float = 0.0


@dataclass(frozen=True)
class VertexData:
    """Cone at the extremal vertex in the frame ``s = h - x.omega``, ``y = x.omega_perp``."""

    p: np.ndarray
    f_slope: float
    g_slope: float
    A: complex


def point_segment_distances(x: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Distances from x to every edge of the closed chain ``vertices``."""
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", x - a, ab) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(*(x - proj).T)


def support_function(D, w: Direction) -> float:
    """``sup_{x in D} x . omega`` for a polygon or disk."""
    if isinstance(D, DiskDomain):
        return float(D.center @ w.omega) + D.radius
    return float(np.max(D.vertices @ w.omega))


def regularity_check(D: PolygonDomain, w: Direction, margin: float = DEFAULT_MARGIN) -> RegularityResult:
    """A direction is regular when a single vertex beats all others by more than ``margin``."""
    if not margin > 0:
        raise ValueError("margin must be positive")
    proj = D.vertices @ w.omega
    order = np.argsort(proj)[::-1]
    gap = float(proj[order[0]] - proj[order[1]])
    if gap > margin:
        return RegularityResult(True, D.vertices[order[0]].copy(), gap)
    return RegularityResult(False, None, gap)


def cone_constant(f_slope: float, g_slope: float) -> complex:
    """Leading vertex constant ``(f - g) / ((1 - i f)(1 - i g))``."""
    if not f_slope - g_slope > 0:
        raise DegenerateCone(f"cone opening f'-g' = {f_slope - g_slope} is not positive")
    return (f_slope - g_slope) / ((1 - 1j * f_slope) * (1 - 1j * g_slope))


def vertex_data(D: PolygonDomain, w: Direction, margin: float = DEFAULT_MARGIN) -> VertexData:
    reg = regularity_check(D, w, margin)
    if not reg.regular:
        raise NonRegularDirection(f"direction {w.degrees:.6f} deg is not regular (gap {reg.gap:.3e})")
    v = D.vertices
    n = len(v)
    i = int(np.argmax(v @ w.omega))
    p = v[i]
    slopes = []
    for q in (v[(i - 1) % n], v[(i + 1) % n]):
        ds = float((p - q) @ w.omega)
        dy = float((q - p) @ w.omega_perp)
        slopes.append(dy / ds)
    f, g = max(slopes), min(slopes)
    return VertexData(p.copy(), f, g, cone_constant(f, g))


def convex_hull(points: Iterable) -> PolygonDomain:
    """Counterclockwise hull by Andrew's monotone chain; collinear points are dropped."""
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) < 3:
        raise CollinearInput("need at least 3 distinct points")

    def half(seq):
        chain: list[tuple[float, float]] = []
        for p in seq:
            while len(chain) >= 2 and _cross(np.subtract(chain[-1], chain[-2]),
                                             np.subtract(p, chain[-2])) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise CollinearInput("points are collinear")
    arr = np.array(hull)
    if signed_area(arr) <= 1e-300:
        raise CollinearInput("points are collinear")
    return PolygonDomain(arr)


def _clip(poly: np.ndarray, normal: np.ndarray, h: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by ``x . normal <= h``."""
    if len(poly) == 0:
        return poly
    out = []
    vals = poly @ normal - h
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        fa, fb = vals[i], vals[(i + 1) % n]
        if fa <= 0:
            out.append(a)
        if (fa < 0 < fb) or (fb < 0 < fa):
            out.append(a + (fa / (fa - fb)) * (b - a))
    return np.array(out).reshape(-1, 2)


def _max_angular_gap(angles: np.ndarray) -> float:
    a = np.sort(np.mod(angles, 2 * np.pi))
    gaps = np.diff(np.concatenate([a, [a[0] + 2 * np.pi]]))
    return float(np.max(gaps))


def halfplane_hull(samples: Sequence[tuple[Direction, float]],
                   bbox: tuple[float, float, float, float] | None = None) -> PolygonDomain:
    """Intersection of the half-planes ``x . omega <= h`` clipped to ``bbox``.

    Without ``bbox`` a box large enough to contain the bounded intersection is used.
    """
    if len(samples) < 3:
        raise InsufficientDirections("need at least 3 directions")
    angles = np.array([d.angle for d, _ in samples])
    gap = _max_angular_gap(angles)
    if gap >= np.pi - 1e-12:
        raise InsufficientDirections("directions do not span the circle")
    if bbox is None:
        hmax = max(abs(h) for _, h in samples)
        half = 2.0 * hmax / math.cos(0.5 * gap) + 1.0
        bbox = (-half, -half, half, half)
    x0, y0, x1, y1 = bbox
    poly = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)
    for d, h in samples:
        poly = _clip(poly, d.omega, float(h))
        if len(poly) < 3:
            raise EmptyIntersection("half-planes have empty intersection")
    # merge near-duplicate vertices produced by clipping through existing corners
    keep = [poly[0]]
    for p in poly[1:]:
        if np.hypot(*(p - keep[-1])) > 1e-12:
            keep.append(p)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= 1e-12:
        keep.pop()
    arr = np.array(keep)
    if len(arr) < 3 or signed_area(arr) <= 1e-14:
        raise EmptyIntersection("half-planes have empty intersection")
    return PolygonDomain(arr)


def _densified(vertices: np.ndarray, per_edge: int) -> np.ndarray:
    if per_edge <= 1:
        return vertices
    b = np.roll(vertices, -1, axis=0)
    s = np.arange(per_edge) / per_edge
    pts = vertices[:, None, :] + s[None, :, None] * (b - vertices)[:, None, :]
    return pts.reshape(-1, 2)


def hausdorff_distance(Apoly: PolygonDomain, Bpoly: PolygonDomain, densify: int = 16) -> float:
    """Symmetric Hausdorff distance between polygon boundaries.

    Each edge is split into ``densify`` pieces and the split points are measured
    against the other boundary's edges.
    """
    def directed(P, Q):
        pts = _densified(P.vertices, densify)
        return max(float(np.min(point_segment_distances(x, Q.vertices))) for x in pts)

    return max(directed(Apoly, Bpoly), directed(Bpoly, Apoly))


@dataclass(frozen=True)
class Circle:
    """Circular outer domain boundary."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("circle radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def perimeter(self) -> float:
        return 2 * math.pi * self.radius

    def bounding_box(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        r = self.radius
        return cx - r, cy - r, cx + r, cy + r

    def inner_clearance(self, x) -> float:
        """Signed distance from x to the circle, positive inside."""
        return self.radius - float(np.hypot(*(np.asarray(x, float) - self.center)))


def inflate_box(bbox, factor: float = 0.1) -> tuple[float, float, float, float]:
    x0, y0, x1, y1 = bbox
    dx, dy = factor * (x1 - x0), factor * (y1 - y0)
    return x0 - dx, y0 - dy, x1 + dx, y1 + dy


def offset_hull(points, delta: float, n_arc: int = 16) -> PolygonDomain:
    """Convex polygon enclosing the ``delta``-neighbourhood of the hull of ``points``.

    Each hull vertex is replaced by ``n_arc`` points on a circle of radius
    ``delta / cos(pi / n_arc)``, so every edge lies at least ``delta`` away.
    """
    if not delta > 0 or n_arc < 3:
        raise ValueError("need delta > 0 and n_arc >= 3")
    pts = np.asarray(points.vertices if isinstance(points, PolygonDomain) else points, dtype=float)
    r = delta / math.cos(math.pi / n_arc)
    th = 2 * math.pi * (np.arange(n_arc) + 0.5) / n_arc
    ring = r * np.column_stack([np.cos(th), np.sin(th)])
    return convex_hull((pts[:, None, :] + ring[None, :, :]).reshape(-1, 2))
