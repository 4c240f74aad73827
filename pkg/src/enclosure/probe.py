"""Complex plane-wave probe and the indicator functionals built on it.

The probe is ``v(x) = exp(x . z - tau t)`` with ``z = tau omega + i sqrt(tau^2 + k^2) omega_perp``,
an exact solution of ``Delta v + k^2 v = 0`` since ``z . z = -k^2``.

Indicator values grow like ``exp(tau (h_D - t))`` and are carried as
``(log_abs, phase)``.  Every path evaluates at an internal shift that keeps
all exponents non-positive and then moves to the requested ``t`` with the exact
shift law ``log|I(t)| = log|I(s)| + tau (s - t)``.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import UnderResolvedRule, WavenumberMismatch
from .forward import CauchyData, SourceSpec
from .geometry import Direction, DiskDomain, PolygonDomain, support_function, vertex_data
from .quadrature import disk_rule, exp_triangle_moments, required_nodes, triangulate
from .special_functions import bessel

# relative accuracy assumed for noise-free synthesized traces
DATA_ROUNDOFF = 1e-14


@dataclass(frozen=True)
class ProbeParams:
    dir: Direction
    tau: float
    t: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.k < 0:
            raise ValueError("k must be non-negative")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.tau * self.tau + self.k * self.k)

    @property
    def z(self) -> np.ndarray:
        return self.tau * self.dir.omega + 1j * self.sigma * self.dir.omega_perp


@dataclass(frozen=True)
class IndicatorSample:
    """Indicator value ``exp(log_abs + i phase)`` at ``(tau, t)``.

    ``log_floor`` is the log of the estimated absolute error of the value
    (``-inf`` when the evaluation is exact up to roundoff of the closed forms).
    """

    tau: float
    t: float
    log_abs: float
    phase: float
    log_floor: float = -math.inf

    @property
    def is_zero(self) -> bool:
        return self.log_abs == -math.inf

    @property
    def resolved(self) -> bool:
        return not self.is_zero and self.log_abs > self.log_floor + math.log(10.0)

    @property
    def value(self) -> complex:
        return cmath.exp(complex(self.log_abs, self.phase)) if not self.is_zero else 0j

    def at(self, t: float) -> "IndicatorSample":
        """Move to another ``t`` by the exact shift law."""
        d = self.tau * (self.t - t)
        return replace(self, t=float(t), log_abs=self.log_abs + d, log_floor=self.log_floor + d)


def _from_complex(value: complex, tau: float, t_eval: float, t: float,
                  floor: float = 0.0) -> IndicatorSample:
    mag = abs(value)
    d = tau * (t_eval - t)
    log_abs = math.log(mag) + d if mag > 0 else -math.inf
    phase = cmath.phase(value) if mag > 0 else 0.0
    log_floor = math.log(floor) + d if floor > 0 else -math.inf
    return IndicatorSample(float(tau), float(t), log_abs, phase, log_floor)


def probe_field(pp: ProbeParams, x) -> tuple[complex, np.ndarray, float]:
    """Probe value, gradient ``z v`` and ``log|v| = tau (x . omega - t)`` at x."""
    x = np.asarray(x, dtype=float)
    z = pp.z
    v = cmath.exp(complex(x @ z) - pp.tau * pp.t)
    return v, z * v, pp.tau * (float(x @ pp.dir.omega) - pp.t)


def _check_resolution(data: CauchyData, pp: ProbeParams) -> None:
    if abs(data.k - pp.k) > 1e-12:
        raise WavenumberMismatch(f"data k={data.k} but probe k={pp.k}")
    need = required_nodes(pp.tau, pp.k, float(np.sum(data.weight)), 1.0)
    if len(data) < need:
        raise UnderResolvedRule(f"{len(data)} boundary nodes cannot resolve tau={pp.tau} (need {need})")


def _boundary_terms(data: CauchyData, pp: ProbeParams, shift_t: float):
    z = pp.z
    v = np.exp(data.pos @ z - pp.tau * shift_t)
    zn = data.normal @ z
    terms = data.weight * (data.dnu - zn * data.u) * v
    # error model: roundoff of the traces plus the recorded additive noise
    absv = data.weight * np.abs(v)
    floor = DATA_ROUNDOFF * float(np.sum(absv * (np.abs(data.dnu) + np.abs(zn) * np.abs(data.u))))
    noise = data.meta.get("noise")
    if noise:
        su, sd = noise.get("scale_u", 0.0), noise.get("scale_dnu", 0.0)
        floor += float(np.sqrt(np.sum(absv ** 2 * (sd ** 2 + np.abs(zn) ** 2 * su ** 2))))
    return terms, floor


def indicator_boundary(data: CauchyData, pp: ProbeParams) -> IndicatorSample:
    """Boundary indicator ``int (du/dnu v - dv/dnu u) dsigma`` by the data's quadrature."""
    _check_resolution(data, pp)
    t_star = float(np.max(data.pos @ pp.dir.omega))
    terms, floor = _boundary_terms(data, pp, t_star)
    return _from_complex(complex(np.sum(terms)), pp.tau, t_star, pp.t, floor)


def indicator_partial_sample(data: CauchyData, pp: ProbeParams, eps: float,
                             t: float | None = None) -> IndicatorSample:
    """``tau^2`` times the boundary indicator restricted to ``x . omega >= t - eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    _check_resolution(data, pp)
    t = pp.t if t is None else float(t)
    proj = data.pos @ pp.dir.omega
    mask = proj >= t - eps
    t_star = float(np.max(proj))
    terms, floor = _boundary_terms(data, pp, t_star)
    s = _from_complex(complex(np.sum(terms[mask])) if np.any(mask) else 0j,
                      pp.tau, t_star, t, floor)
    two_log_tau = 2.0 * math.log(pp.tau)
    return replace(s, log_abs=s.log_abs + two_log_tau, log_floor=s.log_floor + two_log_tau)


def indicator_partial(data: CauchyData, pp: ProbeParams, eps: float, t: float | None = None) -> complex:
    return indicator_partial_sample(data, pp, eps, t).value


def _density_moments(src: SourceSpec, z: np.ndarray, shift: float) -> complex:
    """``int_D rho exp(z . x - shift) dx``."""
    dom = src.domain
    if isinstance(dom, DiskDomain):
        zmag = float(np.abs(z).max()) * math.sqrt(2)
        n_r = int(max(32, math.ceil(1.5 * zmag * dom.radius) + 16))
        n_t = int(max(64, math.ceil(2.0 * zmag * dom.radius) + 32))
        pts, w = disk_rule(dom, n_r, n_t)
        return complex(np.sum(w * src.rho(pts) * np.exp(pts @ z - shift)))
    if not src.affine:
        raise TypeError("closed-form domain indicator needs an affine density")
    total = 0j
    for tri in triangulate(dom):
        rho = src.rho(tri.vertices)
        total += complex(rho @ exp_triangle_moments(z, tri, shift))
    return total


def indicator_domain(src: SourceSpec, pp: ProbeParams) -> IndicatorSample:
    """Domain-side indicator: ``int_D rho v`` or ``-int_D rho a . grad v``."""
    if src.is_zero:
        return IndicatorSample(pp.tau, pp.t, -math.inf, 0.0)
    z = pp.z
    t_star = support_function(src.domain, pp.dir)
    value = _density_moments(src, z, pp.tau * t_star)
    if src.kind == "dipole":
        value *= -complex(src.a @ z)
    return _from_complex(value, pp.tau, t_star, pp.t)


def vertex_asymptote(src: SourceSpec, w: Direction, taus: Iterable[float], k: float = 0.0) -> list[complex]:
    """Leading corner prediction ``tau^-2 rho(p) exp(i sigma p . omega_perp) A`` at ``t = h_D``."""
    vd = vertex_data(src.domain, w)
    rho_p = float(src.rho(vd.p))
    out = []
    for tau in taus:
        sigma = math.sqrt(tau * tau + k * k)
        out.append(rho_p * cmath.exp(1j * sigma * float(vd.p @ w.omega_perp)) * vd.A / (tau * tau))
    return out


def disk_radial_factor(k: float, eps: float) -> float:
    """``int_0^1 r J0(k eps r) dr``."""
    if k == 0:
        return 0.5
    ke = k * eps
    return bessel("J", 1, ke) / ke


def disk_indicator_closed_form(p, eps: float, pp: ProbeParams) -> IndicatorSample:
    """Probe integrated over the disk ``B(p, eps)``: a mean-value identity."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    p = np.asarray(p, dtype=float)
    radial = 2 * math.pi * eps * eps * disk_radial_factor(pp.k, eps)
    log_abs = math.log(abs(radial)) + pp.tau * (float(p @ pp.dir.omega) - pp.t)
    phase = pp.sigma * float(p @ pp.dir.omega_perp) + (math.pi if radial < 0 else 0.0)
    phase = math.remainder(phase, 2 * math.pi)
    return IndicatorSample(pp.tau, pp.t, log_abs, phase)


CSV_COLUMNS = ("omega_deg", "tau", "t", "log_abs", "phase")


def write_indicator_csv(path, rows: Sequence[tuple[float, IndicatorSample]]) -> None:
    """Write ``(omega_deg, sample)`` pairs as the indicator sweep CSV."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(CSV_COLUMNS)
        for deg, s in rows:
            wr.writerow([f"{deg:.10g}", repr(s.tau), repr(s.t), repr(s.log_abs), repr(s.phase)])
