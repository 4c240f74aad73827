"""Inhomogeneous medium ``Delta u + k^2 (1 + rho chi_D) u = 0`` around an incident plane wave.

The total field solves the Lippmann-Schwinger equation

    u = u_inc + k^2 int_D Phi(x - y) rho(y) u(y) dy

so outside D it is ``u_inc`` plus the volume potential of ``f = k^2 rho u``.
The incident wave is invisible to the indicator, and Green's identity gives
``I = -int_D f v``.

Discretization: an order-6 triangle rule on a refined triangulation carries the
iteration; the self-cell kernel is replaced by its integral over the disk of
equal area.  After convergence ``f`` is fitted by a quadratic on every
triangle.  Both indicator paths then work from the same piecewise quadratic:
exact exponential moments on the domain side, and on the boundary side an
edge-layer rewrite of each triangle's potential,

    int_T f Phi = int_dT (Phi d_nu g - g d_nu Phi) ds,   g = f/k^2 - (Delta f)/k^4,

valid because ``(Delta + k^2) g = f`` for quadratic f.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import ClearanceViolation, ContractionViolated, MaxIterationsExceeded
from .forward import LAYER_MIN_K, CauchyData, EquivalentSources, clearance
from .geometry import Direction, PolygonDomain, support_function
from .probe import IndicatorSample, ProbeParams, _from_complex
from .quadrature import (
    BoundaryRule,
    Triangle,
    composite_rule,
    exp_triangle_quadratic_moments,
    refine,
    triangle_rule,
    triangulate,
)
from .special_functions import disk_log_integral, radial_kernel

logger = logging.getLogger(__name__)

INTERIOR_ORDER = 6
DEFAULT_MAX_EDGE = 0.25
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50
DEFAULT_U_FLOOR = 0.1
_GL_PANEL = 16


@dataclass(frozen=True)
class RefractiveSpec:
    """Contrast ``rho`` (affine coefficients) on the polygon D, wavenumber and incident direction."""

    domain: PolygonDomain
    rho: tuple[float, float, float] = (0.1, 0.0, 0.0)
    k: float = 0.5
    incident_dir: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("k must be positive")
        d = np.asarray(self.incident_dir, dtype=float)
        if abs(np.hypot(*d) - 1.0) > 1e-12:
            raise ValueError("incident direction must be a unit vector")
        object.__setattr__(self, "rho", tuple(float(c) for c in self.rho))
        object.__setattr__(self, "incident_dir", (float(d[0]), float(d[1])))

    def rho_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c0, c1, c2 = self.rho
        return c0 + c1 * x[..., 0] + c2 * x[..., 1]

    @property
    def is_zero(self) -> bool:
        return not any(self.rho)

    def incident(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(1j * self.k * (x @ np.asarray(self.incident_dir)))

    def max_abs_rho(self) -> float:
        # affine, so the maximum sits at a vertex
        return float(np.max(np.abs(self.rho_at(self.domain.vertices))))

    def contraction_bound(self) -> float:
        """``k^2 max|rho| sup_x int_D |Phi(x - y)| dy``, bounded by the equal-area disk.

        ``|Phi|`` decreases with distance, so the disk centred at x maximizes the
        integral among sets of area ``|D|``.
        """
        a = math.sqrt(self.domain.area / math.pi)
        k = self.k

        def integrand(r):
            if r == 0.0:
                return 0.0
            phi = radial_kernel(k, np.array([r]))[0][0]
            return r * abs(phi)

        val, _ = quad(integrand, 0.0, a, limit=200)
        return k * k * self.max_abs_rho() * 2 * math.pi * val

    def to_json(self) -> dict:
        return {"domain": {"polygon": self.domain.to_json()}, "rho": list(self.rho), "k": self.k,
                "incident_dir": list(self.incident_dir)}

    @classmethod
    def from_json(cls, data: dict) -> "RefractiveSpec":
        dom = data["domain"]
        poly = dom["polygon"] if isinstance(dom, dict) else dom
        return cls(PolygonDomain.from_json(poly), tuple(data.get("rho", (0.1, 0.0, 0.0))),
                   float(data.get("k", 0.5)), tuple(data.get("incident_dir", (1.0, 0.0))))


def _p2_design(x: np.ndarray, center: np.ndarray) -> np.ndarray:
    d = x - center
    return np.column_stack([np.ones(len(d)), d[:, 0], d[:, 1], d[:, 0] ** 2, d[:, 0] * d[:, 1], d[:, 1] ** 2])


@dataclass
class InteriorField:
    """Converged total field on the interior nodes, with per-triangle quadratic fits of ``rho u``."""

    nodes: np.ndarray
    weights: np.ndarray
    u: np.ndarray
    iterations: int
    residual: float
    history: list[float] = field(default_factory=list)
    triangles: list[Triangle] = field(default_factory=list)
    owner: np.ndarray | None = None
    f_coef: np.ndarray | None = None
    u_coef: np.ndarray | None = None

    def _eval(self, coef: np.ndarray, tri_idx: int, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        c = np.mean(self.triangles[tri_idx].vertices, axis=0)
        return _p2_design(x, c) @ coef[tri_idx]

    def f_at(self, tri_idx: int, x) -> np.ndarray:
        """Quadratic fit of ``rho u`` on triangle ``tri_idx``."""
        return self._eval(self.f_coef, tri_idx, x)

    def u_near(self, p) -> complex:
        """``u`` extrapolated to p from the quadratic fit of the nearest triangle."""
        p = np.asarray(p, dtype=float)
        d = [np.min(np.hypot(*(t.vertices - p).T)) for t in self.triangles]
        return complex(self._eval(self.u_coef, int(np.argmin(d)), p)[0])

    @property
    def ratios(self) -> list[float]:
        """Observed contraction ratios of successive update norms."""
        h = self.history
        return [h[i + 1] / h[i] for i in range(len(h) - 1) if h[i] > 0]


def interior_mesh(D: PolygonDomain, max_edge: float = DEFAULT_MAX_EDGE) -> list[Triangle]:
    return refine(triangulate(D), max_edge)


def solve_lippmann_schwinger(spec: RefractiveSpec, tol: float = DEFAULT_TOL,
                             max_iter: int = DEFAULT_MAX_ITER,
                             max_edge: float = DEFAULT_MAX_EDGE) -> InteriorField:
    """Fixed-point iteration for the total field on interior nodes."""
    bound = spec.contraction_bound()
    if not bound < 1:
        raise ContractionViolated(f"contraction bound {bound:.4g} >= 1")
    tris = interior_mesh(spec.domain, max_edge)
    parts = [triangle_rule(t, INTERIOR_ORDER) for t in tris]
    nodes = np.vstack([p for p, _ in parts])
    weights = np.concatenate([w for _, w in parts])
    per = len(parts[0][1])
    owner = np.repeat(np.arange(len(tris)), per)
    u_inc = spec.incident(nodes)
    rho = spec.rho_at(nodes)
    k = spec.k

    if spec.is_zero:
        u = u_inc.copy()
        history = [0.0]
        it = 1
    else:
        same = owner[:, None] == owner[None, :]
        r = nodes[:, None, :] - nodes[None, :, :]
        R = np.hypot(r[..., 0], r[..., 1])
        K = np.zeros(R.shape, dtype=complex)
        K[~same] = radial_kernel(k, R[~same])[0]
        K *= weights[None, :]
        # self cell: Phi integrated over the disk of the same area centred at the target
        self_int = np.array([disk_log_integral(k, math.sqrt(t.area / math.pi)) for t in tris])
        K[np.arange(len(nodes)), np.arange(len(nodes))] = self_int[owner]
        K *= k * k * rho[None, :]
        u = u_inc.copy()
        history = []
        it = 0
        while True:
            it += 1
            new = u_inc + K @ u
            diff = float(np.max(np.abs(new - u)))
            history.append(diff)
            u = new
            if diff < tol:
                break
            if it >= max_iter:
                raise MaxIterationsExceeded(f"no convergence after {it} iterations (last update {diff:.3g})")
    logger.debug("Lippmann-Schwinger: %d nodes, %d iterations, bound %.3g", len(nodes), it, bound)
    fld = InteriorField(nodes, weights, u, it, history[-1], history, tris, owner)
    _fit_quadratics(fld, rho)
    return fld


def _fit_quadratics(fld: InteriorField, rho: np.ndarray) -> None:
    f_coef, u_coef = [], []
    for i, t in enumerate(fld.triangles):
        sel = fld.owner == i
        M = _p2_design(fld.nodes[sel], np.mean(t.vertices, axis=0))
        f_coef.append(np.linalg.lstsq(M, rho[sel] * fld.u[sel], rcond=None)[0])
        u_coef.append(np.linalg.lstsq(M, fld.u[sel], rcond=None)[0])
    fld.f_coef = np.array(f_coef)
    fld.u_coef = np.array(u_coef)


def _layer_sources(spec: RefractiveSpec, fld: InteriorField, panel_len: float) -> EquivalentSources:
    """Edge monopoles and dipoles reproducing ``k^2 int_T rho u Phi`` triangle by triangle."""
    k2 = spec.k ** 2
    xg, wg = np.polynomial.legendre.leggauss(_GL_PANEL)
    pos, q, m = [], [], []
    for i, t in enumerate(fld.triangles):
        c = np.mean(t.vertices, axis=0)
        a0, a1, a2, a3, a4, a5 = k2 * fld.f_coef[i]
        lap = 2 * a3 + 2 * a5
        for a, b in ((t.a, t.b), (t.b, t.c), (t.c, t.a)):
            L = float(np.hypot(*(b - a)))
            panels = max(1, int(math.ceil(L / panel_len)))
            s = np.concatenate([(j + 0.5 * (xg + 1.0)) / panels for j in range(panels)])
            w = np.tile(0.5 * wg / panels, panels) * L
            x = a + s[:, None] * (b - a)
            tan = (b - a) / L
            nu = np.array([tan[1], -tan[0]])
            d = x - c
            f = a0 + a1 * d[:, 0] + a2 * d[:, 1] + a3 * d[:, 0] ** 2 + a4 * d[:, 0] * d[:, 1] + a5 * d[:, 1] ** 2
            fx = a1 + 2 * a3 * d[:, 0] + a4 * d[:, 1]
            fy = a2 + a4 * d[:, 0] + 2 * a5 * d[:, 1]
            g = f / k2 - lap / (k2 * k2)
            dg = (fx * nu[0] + fy * nu[1]) / k2
            pos.append(x)
            q.append(w * dg)
            m.append(-(w * g)[:, None] * nu[None, :])
    return EquivalentSources(np.vstack(pos), np.concatenate(q), np.vstack(m))


def _cloud_sources(spec: RefractiveSpec, fld: InteriorField, h: float) -> EquivalentSources:
    """Point monopoles on a fine order-20 rule carrying the fitted ``k^2 rho u``."""
    pos, q = [], []
    for i, t in enumerate(fld.triangles):
        sub = refine([t], h)
        x, w = composite_rule(sub, 20)
        pos.append(x)
        q.append(spec.k ** 2 * w * fld.f_at(i, x))
    pos = np.vstack(pos)
    return EquivalentSources(pos, np.concatenate(q), np.zeros((len(pos), 2), dtype=complex))


def scattered_sources(spec: RefractiveSpec, fld: InteriorField, tau_max: float,
                      method: str = "auto") -> EquivalentSources:
    zmax = math.sqrt(2 * tau_max * tau_max + spec.k ** 2)
    if method == "auto":
        method = "layer" if spec.k >= LAYER_MIN_K else "cloud"
    if method == "layer":
        return _layer_sources(spec, fld, 6.0 / zmax)
    if method == "cloud":
        return _cloud_sources(spec, fld, 3.0 / zmax)
    raise ValueError(f"unknown method {method!r}")


def synthesize_ibvp_cauchy(spec: RefractiveSpec, fld: InteriorField, omega_shape, rule: BoundaryRule,
                           tau_max: float | None = None, method: str = "auto") -> CauchyData:
    """Total-field traces on the outer boundary: incident wave plus the scattered potential."""
    gap = clearance(spec.domain, omega_shape)
    if not gap > 0:
        raise ClearanceViolation(f"refractive domain is not inside the outer domain (clearance {gap:.3g})")
    tau_max = tau_max if tau_max is not None else (rule.tau or 60.0)
    d = np.asarray(spec.incident_dir)
    u = spec.incident(rule.pos)
    dnu = 1j * spec.k * (rule.normal @ d) * u
    if not spec.is_zero:
        es = scattered_sources(spec, fld, tau_max, method)
        us, grad = es.evaluate(spec.k, rule.pos)
        u = u + us
        dnu = dnu + np.einsum("ij,ij->i", grad, rule.normal)
    meta = {"kind": "ibvp", "k": float(spec.k), "tau_max": float(tau_max), "refractive": spec.to_json(),
            "iterations": fld.iterations, "residual": fld.residual}
    return CauchyData(float(spec.k), rule.pos, rule.normal, rule.weight, u, dnu, meta)


def ibvp_domain_indicator(spec: RefractiveSpec, fld: InteriorField, pp: ProbeParams) -> IndicatorSample:
    """``-k^2 int_D rho u v`` with the quadratic fits integrated exactly against the probe."""
    if spec.is_zero:
        return IndicatorSample(pp.tau, pp.t, -math.inf, 0.0)
    z = pp.z
    t_star = support_function(spec.domain, pp.dir)
    shift = pp.tau * t_star
    total = 0j
    for i, t in enumerate(fld.triangles):
        v = t.vertices
        lagrange = np.vstack([v, 0.5 * (v[0] + v[1]), 0.5 * (v[1] + v[2]), 0.5 * (v[2] + v[0])])
        total += complex(fld.f_at(i, lagrange) @ exp_triangle_quadratic_moments(z, t, shift))
    return _from_complex(-spec.k ** 2 * total, pp.tau, t_star, pp.t)


@dataclass(frozen=True)
class VertexCheck:
    dir: Direction
    vertex: np.ndarray
    u_abs: float
    ok: bool


def vertex_field_check(spec: RefractiveSpec, fld: InteriorField, directions: Sequence[Direction],
                       floor: float = DEFAULT_U_FLOOR) -> list[VertexCheck]:
    """``|u(p)|`` at the extremal vertex of each direction against ``floor``.

    The corner asymptotics carry a factor ``rho(p) u(p)``; a small value there
    means the support estimate in that direction should not be trusted.
    """
    out = []
    verts = spec.domain.vertices
    for w in directions:
        proj = verts @ w.omega
        # every vertex on the supporting line counts; the weakest decides
        tied = verts[proj >= proj.max() - 1e-9]
        vals = [abs(fld.u_near(p)) for p in tied]
        j = int(np.argmin(vals))
        out.append(VertexCheck(w, tied[j], float(vals[j]), vals[j] > floor))
    return out
