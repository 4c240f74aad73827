"""Quadrature over triangles, disks and the outer boundary.

The exponential integral over a triangle is evaluated in closed form through
divided differences of ``exp``: with ``w_i = z . a_i``,

    int_T exp(z . x) dx = 2 |T| exp[w_1, w_2, w_3]

and barycentric moments follow by repeating nodes (Hermite-Genocchi)::

    int_T lambda^alpha exp(z . x) dx = 2 |T| alpha! exp[w_i repeated 1 + alpha_i times]
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import roots_jacobi

from .errors import DegeneratePolygon, UnsupportedOrder
from .geometry import Circle, DiskDomain, PolygonDomain, signed_area

MAX_ORDER = 20
TAYLOR_RADIUS = 1.0
_TAYLOR_TERMS = 26
DEFAULT_OVERSAMPLE = 1.5
DEFAULT_N0 = 64
NODES_PER_WAVELENGTH = 10
_PANEL = 16


@dataclass(frozen=True)
class Triangle:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def area(self) -> float:
        return 0.5 * float((self.b[0] - self.a[0]) * (self.c[1] - self.a[1])
                           - (self.c[0] - self.a[0]) * (self.b[1] - self.a[1]))

    @property
    def vertices(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    def max_edge(self) -> float:
        v = self.vertices
        return float(max(np.hypot(*(v[i] - v[(i + 1) % 3])) for i in range(3)))


@dataclass(frozen=True)
class BoundaryRule:
    """Nodes on the outer boundary with outward unit normals and arc-length weights."""

    pos: np.ndarray
    normal: np.ndarray
    weight: np.ndarray
    tau: float | None = None
    k: float | None = None

    def __len__(self) -> int:
        return len(self.weight)

    @property
    def length(self) -> float:
        return float(np.sum(self.weight))


def triangulate(D: PolygonDomain) -> list[Triangle]:
    """Ear-clipping triangulation of a simple counterclockwise polygon."""
    verts = [np.asarray(v, float) for v in D.vertices]
    idx = list(range(len(verts)))
    tris: list[Triangle] = []
    guard = 0
    while len(idx) > 3:
        n = len(idx)
        for k in range(n):
            i0, i1, i2 = idx[(k - 1) % n], idx[k], idx[(k + 1) % n]
            a, b, c = verts[i0], verts[i1], verts[i2]
            if signed_area(np.array([a, b, c])) <= 1e-15:
                continue
            if any(_in_triangle(verts[j], a, b, c) for j in idx if j not in (i0, i1, i2)):
                continue
            tris.append(Triangle(a, b, c))
            idx.pop(k)
            break
        else:
            raise DegeneratePolygon("no ear found; polygon is degenerate")
        guard += 1
        if guard > 10 * len(verts):
            raise DegeneratePolygon("triangulation did not terminate")
    a, b, c = (verts[i] for i in idx)
    if signed_area(np.array([a, b, c])) <= 0:
        raise DegeneratePolygon("degenerate final triangle")
    tris.append(Triangle(a, b, c))
    return tris


def _in_triangle(p, a, b, c) -> bool:
    def cr(o, u, v):
        return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
    return cr(a, b, p) >= 0 and cr(b, c, p) >= 0 and cr(c, a, p) >= 0


def refine(triangles: Sequence[Triangle], max_edge: float) -> list[Triangle]:
    """Uniform midpoint subdivision until every edge is at most ``max_edge``."""
    out = list(triangles)
    while any(t.max_edge() > max_edge for t in out):
        nxt = []
        for t in out:
            if t.max_edge() <= max_edge:
                nxt.append(t)
                continue
            ab, bc, ca = 0.5 * (t.a + t.b), 0.5 * (t.b + t.c), 0.5 * (t.c + t.a)
            nxt += [Triangle(t.a, ab, ca), Triangle(ab, t.b, bc),
                    Triangle(ca, bc, t.c), Triangle(ab, bc, ca)]
        out = nxt
    return out


@lru_cache(maxsize=None)
def _reference_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on the unit triangle (0,0),(1,0),(0,1)."""
    n = order // 2 + 1
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    xl, wl = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (xj + 1.0)
    v = 0.5 * (xl + 1.0)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(0.25 * wj, 0.5 * wl)
    pts = np.column_stack([U.ravel(), (V * (1.0 - U)).ravel()])
    return pts, W.ravel()


def triangle_rule(tri: Triangle, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights exact for bivariate polynomials of total degree ``order``."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_ORDER:
        raise UnsupportedOrder(f"triangle rule order must be in 1..{MAX_ORDER}, got {order}")
    ref, w = _reference_rule(int(order))
    jac = np.column_stack([tri.b - tri.a, tri.c - tri.a])
    pts = tri.a + ref @ jac.T
    return pts, w * (2.0 * tri.area)


def composite_rule(triangles: Sequence[Triangle], order: int) -> tuple[np.ndarray, np.ndarray]:
    parts = [triangle_rule(t, order) for t in triangles]
    return np.vstack([p for p, _ in parts]), np.concatenate([w for _, w in parts])


def exp_divided_difference(nodes: Sequence[complex]) -> complex:
    """Divided difference ``exp[w_1, ..., w_n]`` for arbitrary (possibly repeated) nodes.

    Clusters of diameter at most ``TAYLOR_RADIUS`` use the expansion about the mean
    in complete homogeneous symmetric polynomials; wider sets recurse on the
    farthest pair, whose difference is then bounded away from zero.
    """
    ws = [complex(w) for w in nodes]
    n = len(ws)
    if n == 1:
        return cmath.exp(ws[0])
    best, bi, bj = -1.0, 0, 1
    for i in range(n):
        for j in range(i + 1, n):
            d = abs(ws[i] - ws[j])
            if d > best:
                best, bi, bj = d, i, j
    if best <= TAYLOR_RADIUS:
        return _dd_taylor(ws)
    without_j = ws[:bj] + ws[bj + 1:]
    without_i = ws[:bi] + ws[bi + 1:]
    return (exp_divided_difference(without_j) - exp_divided_difference(without_i)) / (ws[bi] - ws[bj])


def _dd_taylor(ws: list[complex]) -> complex:
    n = len(ws)
    c = sum(ws) / n
    h = [1.0 + 0j] + [0j] * (_TAYLOR_TERMS - 1)
    for w in ws:
        y = w - c
        for m in range(1, _TAYLOR_TERMS):
            h[m] = h[m] + y * h[m - 1]
    total = 0j
    fact = math.factorial(n - 1)
    for m in range(_TAYLOR_TERMS):
        total += h[m] / fact
        fact *= m + n
    return cmath.exp(c) * total


def _exponents(z, tri: Triangle, shift: complex) -> list[complex]:
    z = np.asarray(z, dtype=complex)
    return [complex(z[0] * p[0] + z[1] * p[1] - shift) for p in (tri.a, tri.b, tri.c)]


def integrate_exp_triangle(z, tri: Triangle, shift: complex = 0.0) -> complex:
    """``int_T exp(z . x - shift) dx`` in closed form."""
    w = _exponents(z, tri, shift)
    return 2.0 * tri.area * exp_divided_difference(w)


def exp_triangle_moments(z, tri: Triangle, shift: complex = 0.0) -> np.ndarray:
    """``int_T lambda_i exp(z . x - shift) dx`` for the three barycentric coordinates."""
    w = _exponents(z, tri, shift)
    two_a = 2.0 * tri.area
    return np.array([two_a * exp_divided_difference(w + [w[i]]) for i in range(3)])


def exp_triangle_quadratic_moments(z, tri: Triangle, shift: complex = 0.0) -> np.ndarray:
    """Integrals of the six P2 Lagrange basis functions times ``exp(z . x - shift)``.

    Ordering: vertex functions ``lambda_i (2 lambda_i - 1)`` for i = 0, 1, 2, then
    edge functions ``4 lambda_i lambda_j`` for (0,1), (1,2), (2,0).
    """
    w = _exponents(z, tri, shift)
    two_a = 2.0 * tri.area
    first = [exp_divided_difference(w + [w[i]]) for i in range(3)]
    sq = [2.0 * exp_divided_difference(w + [w[i], w[i]]) for i in range(3)]
    cross = [exp_divided_difference(w + [w[i], w[j]]) for i, j in ((0, 1), (1, 2), (2, 0))]
    out = [2.0 * sq[i] - first[i] for i in range(3)] + [4.0 * c for c in cross]
    return two_a * np.array(out)


def disk_rule(disk: DiskDomain, n_r: int = 32, n_theta: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Polar product rule: Gauss-Legendre in radius, trapezoid in angle."""
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * disk.radius * (xr + 1.0)
    wr = 0.5 * disk.radius * wr * r
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(r, th, indexing="ij")
    pts = disk.center + np.column_stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()])
    w = np.repeat(wr, n_theta) * (2 * np.pi / n_theta)
    return pts, w


def required_nodes(tau: float, k: float, perimeter: float, oversample: float = 1.0) -> int:
    """Node count giving ``NODES_PER_WAVELENGTH`` nodes per probe oscillation."""
    sigma = math.sqrt(tau * tau + k * k)
    return int(math.ceil(oversample * sigma * perimeter / (2 * math.pi) * NODES_PER_WAVELENGTH))


def boundary_rule(shape, tau: float, k: float, oversample: float = DEFAULT_OVERSAMPLE,
                  n0: int = DEFAULT_N0) -> BoundaryRule:
    """Boundary nodes resolving the probe wave at parameter ``tau``.

    Circles get the equispaced trapezoid rule, convex polygons composite
    Gauss-Legendre panels on each edge.
    """
    if tau < 0 or oversample < 1:
        raise ValueError("need tau >= 0 and oversample >= 1")
    n = max(n0, required_nodes(tau, k, shape.perimeter, oversample))
    if isinstance(shape, Circle):
        th = 2 * np.pi * np.arange(n) / n
        nrm = np.column_stack([np.cos(th), np.sin(th)])
        pos = shape.center + shape.radius * nrm
        w = np.full(n, shape.perimeter / n)
        return BoundaryRule(pos, nrm, w, float(tau), float(k))
    if isinstance(shape, PolygonDomain):
        xg, wg = np.polynomial.legendre.leggauss(_PANEL)
        pos, nrm, wts = [], [], []
        P = shape.perimeter
        for a, b in shape.edges:
            L = float(np.hypot(*(b - a)))
            panels = max(1, int(math.ceil(n * L / P / _PANEL)))
            s = np.concatenate([(j + 0.5 * (xg + 1.0)) / panels for j in range(panels)])
            ws = np.tile(0.5 * wg / panels, panels) * L
            pos.append(a + s[:, None] * (b - a))
            t = (b - a) / L
            nrm.append(np.tile([t[1], -t[0]], (len(s), 1)))
            wts.append(ws)
        return BoundaryRule(np.vstack(pos), np.vstack(nrm), np.concatenate(wts), float(tau), float(k))
    raise TypeError(f"unsupported boundary shape {type(shape).__name__}")
