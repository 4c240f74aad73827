"""Forward synthesis of Cauchy data for the source problem ``(Delta + k^2) u = F``.

The solution is the volume potential ``u = -Phi * F``.  It is evaluated through
an equivalent-source representation

    u(x) = sum_j q_j Phi(x - y_j) + m_j . grad_y Phi(x - y_j)

whose terms are exact radiating Helmholtz solutions away from the nodes.  Two
node sets are available:

``layer``
    For ``k > 0`` and affine density the potential reduces to edge integrals,
    using ``k^2 Phi = -Delta_y Phi`` away from x::

        -int_D rho Phi = (1/k^2) int_dD (rho d_nu Phi - Phi d_nu rho) ds

``cloud``
    Direct triangle (or polar) quadrature of the volume integral; used for
    small ``k`` where the layer form cancels catastrophically.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ClearanceViolation, EvaluationInsideSource, GeometryError
from .geometry import Circle, DiskDomain, PolygonDomain
from .quadrature import BoundaryRule, composite_rule, disk_rule, refine, triangulate
from .special_functions import radial_kernel

logger = logging.getLogger(__name__)

LAYER_MIN_K = 0.2
DEFAULT_TAU_MAX = 60.0
_GL_PANEL = 16
_CHUNK = 400_000


@dataclass(frozen=True)
class SourceSpec:
    """Source ``rho chi_D`` (monopole) or ``div(rho chi_D a)`` (dipole).

    ``density`` holds affine coefficients ``(c0, c1, c2)`` meaning
    ``rho(x) = c0 + c1 x1 + c2 x2``; a callable is also accepted, in which case
    only the cloud representation is available.
    """

    domain: PolygonDomain | DiskDomain
    density: tuple[float, float, float] | Callable = (1.0, 0.0, 0.0)
    kind: str = "monopole"
    a: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("monopole", "dipole"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "dipole":
            a = np.asarray(self.a if self.a is not None else (0.0, 0.0), dtype=float)
            if not np.any(a != 0):
                raise ValueError("dipole vector a must be non-zero")
            object.__setattr__(self, "a", a)
        if not callable(self.density):
            object.__setattr__(self, "density", tuple(float(c) for c in self.density))
            if any(self.density) and isinstance(self.domain, PolygonDomain):
                rho_v = self.rho(self.domain.vertices)
                if np.any(np.abs(rho_v) < 1e-14):
                    warnings.warn("density vanishes at a polygon vertex; "
                                  "that corner is invisible to the indicator", stacklevel=2)

    @property
    def affine(self) -> bool:
        return not callable(self.density)

    def rho(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if callable(self.density):
            return np.asarray(self.density(x), dtype=float)
        c0, c1, c2 = self.density
        return c0 + c1 * x[..., 0] + c2 * x[..., 1]

    @property
    def grad_rho(self) -> np.ndarray:
        if callable(self.density):
            raise TypeError("gradient only available for affine densities")
        return np.array(self.density[1:])

    @property
    def is_zero(self) -> bool:
        return self.affine and not any(self.density)

    def to_json(self) -> dict:
        if callable(self.density):
            raise TypeError("callable densities cannot be serialized")
        if isinstance(self.domain, DiskDomain):
            dom = {"disk": {"center": self.domain.center.tolist(), "radius": self.domain.radius}}
        else:
            dom = {"polygon": self.domain.to_json()}
        out = {"domain": dom, "density": list(self.density), "kind": self.kind}
        if self.kind == "dipole":
            out["a"] = self.a.tolist()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SourceSpec":
        dom = data["domain"]
        if "disk" in dom:
            domain = DiskDomain(np.asarray(dom["disk"]["center"], float), float(dom["disk"]["radius"]))
        else:
            domain = PolygonDomain.from_json(dom["polygon"])
        a = data.get("a")
        return cls(domain, tuple(data.get("density", (1.0, 0.0, 0.0))), data.get("kind", "monopole"),
                   None if a is None else np.asarray(a, float))


@dataclass(frozen=True)
class EquivalentSources:
    """Point monopoles ``q`` and dipole moments ``m`` at positions ``pos``."""

    pos: np.ndarray
    q: np.ndarray
    m: np.ndarray

    def evaluate(self, k: float, X) -> tuple[np.ndarray, np.ndarray]:
        """Field and gradient at targets ``X`` (shape ``(n, 2)``)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        u = np.zeros(len(X), dtype=complex)
        grad = np.zeros((len(X), 2), dtype=complex)
        step = max(1, _CHUNK // max(1, len(self.pos)))
        for s in range(0, len(X), step):
            x = X[s:s + step]
            r = x[:, None, :] - self.pos[None, :, :]
            R = np.hypot(r[..., 0], r[..., 1])
            phi, d1, d2 = radial_kernel(k, R)
            mr = np.einsum("ijk,jk->ij", r, self.m)
            rhat_d1 = d1 / R
            u[s:s + step] = phi @ self.q - np.sum(rhat_d1 * mr, axis=1)
            # gradient of q Phi
            g = np.einsum("ij,ijk->ik", rhat_d1 * self.q[None, :], r)
            # gradient of -Phi'(R) (m . r)/R
            coef = (d2 - rhat_d1) * mr / (R * R)
            g -= np.einsum("ij,ijk->ik", coef, r)
            g -= rhat_d1 @ self.m
            grad[s:s + step] = g
        return u, grad

    def indicator(self, z, shift: float = 0.0) -> complex:
        """``F(v)`` for ``v = exp(z . x - shift)``: ``-sum (q_j + m_j . z) v(y_j)``."""
        z = np.asarray(z, dtype=complex)
        v = np.exp(self.pos @ z - shift)
        return complex(-np.sum((self.q + self.m @ z) * v))


def _edge_nodes(D: PolygonDomain, panel_len: float):
    xg, wg = np.polynomial.legendre.leggauss(_GL_PANEL)
    pos, nrm, wts = [], [], []
    for a, b in D.edges:
        L = float(np.hypot(*(b - a)))
        panels = max(1, int(math.ceil(L / panel_len)))
        s = np.concatenate([(j + 0.5 * (xg + 1.0)) / panels for j in range(panels)])
        pos.append(a + s[:, None] * (b - a))
        t = (b - a) / L
        nrm.append(np.tile([t[1], -t[0]], (len(s), 1)))
        wts.append(np.tile(0.5 * wg / panels, panels) * L)
    return np.vstack(pos), np.vstack(nrm), np.concatenate(wts)


def _circle_nodes(disk: DiskDomain, n: int):
    th = 2 * np.pi * np.arange(n) / n
    nrm = np.column_stack([np.cos(th), np.sin(th)])
    return disk.center + disk.radius * nrm, nrm, np.full(n, 2 * np.pi * disk.radius / n)


def _probe_scale(k: float, tau_max: float) -> float:
    return math.sqrt(2 * tau_max * tau_max + k * k)


def equivalent_sources(src: SourceSpec, k: float, tau_max: float = DEFAULT_TAU_MAX,
                       clearance: float = 0.1, method: str = "auto") -> EquivalentSources:
    """Build the node representation of ``-Phi * F``.

    Node spacing resolves both the probe ``exp(z . y)`` up to ``tau_max`` and
    the kernel at targets no closer than ``clearance``.
    """
    if method == "auto":
        method = "layer" if (k >= LAYER_MIN_K and src.affine) else "cloud"
    zmax = _probe_scale(k, tau_max)
    dom = src.domain
    if method == "layer":
        if k <= 0 or not src.affine:
            raise ValueError("layer representation needs k > 0 and an affine density")
        if isinstance(dom, DiskDomain):
            n = int(max(128, math.ceil(2 * math.pi * dom.radius * zmax / 2.0),
                        math.ceil(40 * dom.radius / clearance)))
            pos, nrm, w = _circle_nodes(dom, n)
        else:
            panel_len = min(6.0 / zmax, 1.5 * clearance)
            pos, nrm, w = _edge_nodes(dom, panel_len)
        rho = src.rho(pos)
        grad = src.grad_rho
        k2 = k * k
        if src.kind == "monopole":
            q = -w * (nrm @ grad) / k2
            m = (w * rho / k2)[:, None] * nrm
        else:
            an = nrm @ src.a
            q = w * rho * an
            m = (w * float(src.a @ grad) / k2)[:, None] * nrm
        return EquivalentSources(pos, q.astype(complex), m.astype(complex))
    if method != "cloud":
        raise ValueError(f"unknown method {method!r}")
    if isinstance(dom, DiskDomain):
        n_r = int(max(24, math.ceil(dom.radius * zmax * 1.2), math.ceil(6 * dom.radius / clearance)))
        n_t = int(max(64, math.ceil(2 * math.pi * dom.radius * zmax), math.ceil(30 * dom.radius / clearance)))
        pos, w = disk_rule(dom, n_r, n_t)
    else:
        h = min(3.0 / zmax, clearance)
        pos, w = composite_rule(refine(triangulate(dom), h), 20)
    rho = src.rho(pos)
    if src.kind == "monopole":
        q = -w * rho
        m = np.zeros((len(pos), 2))
    else:
        q = np.zeros(len(pos))
        m = (w * rho)[:, None] * src.a[None, :]
    return EquivalentSources(pos, q.astype(complex), np.asarray(m, dtype=complex))


def _check_outside(src: SourceSpec, X: np.ndarray) -> float:
    dmin = min(src.domain.distance(x) for x in X)
    if dmin <= 0:
        raise EvaluationInsideSource("field evaluated inside or on the source domain")
    return dmin


def field_value(src: SourceSpec, k: float, x, tau_max: float = DEFAULT_TAU_MAX,
                method: str = "auto") -> tuple[complex, np.ndarray]:
    """Field ``u`` and its gradient at a single point outside the source."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    dmin = _check_outside(src, X)
    es = equivalent_sources(src, k, tau_max, clearance=dmin, method=method)
    u, g = es.evaluate(k, X)
    return complex(u[0]), g[0]


def field_values(src: SourceSpec, k: float, X, tau_max: float = DEFAULT_TAU_MAX,
                 method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    dmin = _check_outside(src, X)
    es = equivalent_sources(src, k, tau_max, clearance=dmin, method=method)
    return es.evaluate(k, X)


@dataclass(frozen=True)
class CauchyData:
    """Boundary traces ``u`` and ``du/dnu`` at quadrature nodes of the outer boundary."""

    k: float
    pos: np.ndarray
    normal: np.ndarray
    weight: np.ndarray
    u: np.ndarray
    dnu: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.weight)

    @property
    def noise_level(self) -> float:
        return float(self.meta.get("noise", {}).get("level", 0.0))

    def to_json(self) -> dict:
        nodes = [
            {"pos": [float(p[0]), float(p[1])], "normal": [float(n[0]), float(n[1])],
             "weight": float(w), "u": [float(u.real), float(u.imag)],
             "dnu": [float(d.real), float(d.imag)]}
            for p, n, w, u, d in zip(self.pos, self.normal, self.weight, self.u, self.dnu)
        ]
        return {"k": float(self.k), "nodes": nodes, "meta": self.meta}

    @classmethod
    def from_json(cls, data: dict) -> "CauchyData":
        nodes = data["nodes"]
        pos = np.array([n["pos"] for n in nodes], dtype=float)
        nrm = np.array([n["normal"] for n in nodes], dtype=float)
        w = np.array([n["weight"] for n in nodes], dtype=float)
        u = np.array([complex(*n["u"]) for n in nodes])
        d = np.array([complex(*n["dnu"]) for n in nodes])
        return cls(float(data["k"]), pos, nrm, w, u, d, dict(data.get("meta", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "CauchyData":
        return cls.from_json(json.loads(Path(path).read_text()))


def clearance(src_domain, omega_shape) -> float:
    """Smallest distance between the source domain and the outer boundary (negative if outside)."""
    if isinstance(omega_shape, Circle):
        if isinstance(src_domain, DiskDomain):
            return omega_shape.inner_clearance(src_domain.center) - src_domain.radius
        return min(omega_shape.inner_clearance(v) for v in src_domain.vertices)
    if isinstance(omega_shape, PolygonDomain):
        if isinstance(src_domain, DiskDomain):
            pts = [src_domain.center]
            pad = src_domain.radius
        else:
            pts = list(src_domain.vertices)
            pad = 0.0
        worst = math.inf
        for p in pts:
            d = omega_shape.distance_to_boundary(p)
            if not omega_shape.contains(p, closed=False):
                d = -d
            worst = min(worst, d - pad)
        return worst
    raise GeometryError(f"unsupported outer shape {type(omega_shape).__name__}")


def synthesize_cauchy(src: SourceSpec, omega_shape, k: float, rule: BoundaryRule,
                      tau_max: float | None = None, method: str = "auto") -> CauchyData:
    """Evaluate the field on every boundary node; ``dnu = grad . normal``."""
    gap = clearance(src.domain, omega_shape)
    if not gap > 0:
        raise ClearanceViolation(f"source domain is not inside the outer domain (clearance {gap:.3g})")
    tau_max = tau_max if tau_max is not None else (rule.tau if getattr(rule, "tau", None) else DEFAULT_TAU_MAX)
    meta = {"kind": "source", "k": float(k), "tau_max": float(tau_max)}
    if src.affine:
        meta["source"] = src.to_json()
    if src.is_zero:
        zeros = np.zeros(len(rule), dtype=complex)
        return CauchyData(float(k), rule.pos, rule.normal, rule.weight, zeros, zeros.copy(), meta)
    es = equivalent_sources(src, k, tau_max, clearance=gap, method=method)
    u, grad = es.evaluate(k, rule.pos)
    dnu = np.einsum("ij,ij->i", grad, rule.normal)
    logger.debug("synthesized %d boundary nodes from %d equivalent sources", len(rule), len(es.pos))
    return CauchyData(float(k), rule.pos, rule.normal, rule.weight, u, dnu, meta)


def add_noise(data: CauchyData, level: float, seed: int) -> CauchyData:
    """Add complex Gaussian noise of relative size ``level`` to both traces.

    Each trace is perturbed by ``level * max|trace|`` times a unit-variance
    complex normal sample drawn from ``numpy.random.default_rng(seed)``.
    """
    if level < 0:
        raise ValueError("noise level must be non-negative")
    if level == 0:
        return data
    rng = np.random.default_rng(seed)
    n = len(data)

    def cnoise():
        return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)

    su = level * float(np.max(np.abs(data.u)))
    sd = level * float(np.max(np.abs(data.dnu)))
    meta = dict(data.meta)
    meta["noise"] = {"level": float(level), "seed": int(seed), "scale_u": su, "scale_dnu": sd}
    return replace(data, u=data.u + su * cnoise(), dnu=data.dnu + sd * cnoise(), meta=meta)
