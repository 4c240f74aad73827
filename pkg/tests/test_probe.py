import csv
import math

import numpy as np
import pytest

from enclosure.errors import NonRegularDirection, UnderResolvedRule, WavenumberMismatch
from enclosure.forward import SourceSpec, synthesize_cauchy
from enclosure.geometry import Circle, Direction, DiskDomain, PolygonDomain, support_function
from enclosure.probe import (
    ProbeParams,
    disk_indicator_closed_form,
    indicator_boundary,
    indicator_domain,
    indicator_partial,
    indicator_partial_sample,
    probe_field,
    vertex_asymptote,
    write_indicator_csv,
)
from enclosure.quadrature import boundary_rule, composite_rule, disk_rule, refine, triangulate

from conftest import CENTERED_SQUARE, UNIT_SQUARE

OMEGA = Circle((0.0, 0.0), 1.0)


def test_probe_modulus_on_level_line():
    w = Direction.from_degrees(37.0)
    pp = ProbeParams(w, 12.0, 0.4, 1.5)
    x = 0.4 * w.omega + 2.3 * w.omega_perp
    v, g, lv = probe_field(pp, x)
    assert abs(abs(v) - 1.0) < 1e-13 and abs(lv) < 1e-13
    assert np.allclose(g, pp.z * v)
    z = pp.z
    assert abs(z @ z + pp.k ** 2) < 1e-12


def test_probe_static_form():
    w = Direction.from_degrees(-20.0)
    pp = ProbeParams(w, 3.0, 0.2, 0.0)
    x = np.array([0.3, -0.7])
    v, _, _ = probe_field(pp, x)
    ref = np.exp(3.0 * (x @ w.omega - 0.2)) * np.exp(3.0j * (x @ w.omega_perp))
    assert abs(v - ref) < 1e-14 * abs(ref)


def test_probe_solves_helmholtz(rng):
    pp = ProbeParams(Direction.from_degrees(70.0), 3.0, 0.0, 1.0)
    for _ in range(5):
        x = rng.uniform(-1, 1, 2)
        res = []
        for h in (2e-3, 1e-3):
            st = x + h * np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]])
            v = np.array([probe_field(pp, s)[0] for s in st])
            res.append(abs((v[1:].sum() - 4 * v[0]) / h ** 2 + v[0]) / abs(v[0]))
        assert res[1] < 1e-4
        assert res[0] / res[1] == pytest.approx(4.0, rel=0.05)


def test_zero_data_gives_sentinel(centered_square):
    rule = boundary_rule(OMEGA, 10.0, 1.0)
    d = synthesize_cauchy(SourceSpec(centered_square, (0.0, 0.0, 0.0)), OMEGA, 1.0, rule)
    s = indicator_boundary(d, ProbeParams(Direction.from_degrees(10.0), 5.0, 0.0, 1.0))
    assert s.is_zero and s.log_abs == -math.inf and s.value == 0
    dom = indicator_domain(SourceSpec(centered_square, (0.0, 0.0, 0.0)), ProbeParams(Direction.from_degrees(10.0), 5.0))
    assert dom.is_zero


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0, 5.0, 10.0, 20.0])
@pytest.mark.parametrize("deg", [0.0, 30.0, 45.0, 100.0, 222.0])
def test_boundary_equals_domain(square_data, tau, deg):
    src = SourceSpec(PolygonDomain(CENTERED_SQUARE))
    pp = ProbeParams(Direction.from_degrees(deg), tau, 0.0, 1.0)
    b, d = indicator_boundary(square_data, pp), indicator_domain(src, pp)
    assert abs(b.value - d.value) / abs(d.value) < 1e-6


def test_shift_law_exact(square_data, rng):
    src = SourceSpec(PolygonDomain(CENTERED_SQUARE), (1.0, 0.2, 0.1))
    for _ in range(20):
        tau, s, t = rng.uniform(0.5, 60), rng.uniform(-2, 2), rng.uniform(-2, 2)
        w = Direction.from_angle(rng.uniform(0, 2 * math.pi))
        for f in (lambda pp: indicator_boundary(square_data, pp), lambda pp: indicator_domain(src, pp)):
            a, b = f(ProbeParams(w, tau, t, 1.0)), f(ProbeParams(w, tau, s, 1.0))
            assert abs((a.log_abs - b.log_abs) - tau * (s - t)) < 1e-12
            assert a.phase == b.phase


def test_domain_path_at_t1_and_t0(square_data):
    w = Direction.from_degrees(45.0)
    s0 = indicator_boundary(square_data, ProbeParams(w, 7.0, 0.0, 1.0))
    s1 = indicator_boundary(square_data, ProbeParams(w, 7.0, 1.0, 1.0))
    assert s0.log_abs - s1.log_abs == pytest.approx(7.0, abs=1e-12)


def test_dipole_ratio(rng):
    for _ in range(20):
        a = rng.normal(size=2)
        dens = tuple(rng.uniform(-1, 1, 3) + np.array([2.0, 0, 0]))
        dom = PolygonDomain(UNIT_SQUARE)
        w = Direction.from_angle(rng.uniform(0, 2 * math.pi))
        pp = ProbeParams(w, rng.uniform(0.5, 50), rng.uniform(-1, 1), rng.uniform(0, 3))
        m = indicator_domain(SourceSpec(dom, dens), pp).value
        d = indicator_domain(SourceSpec(dom, dens, "dipole", a), pp).value
        assert abs(d / m + a @ pp.z) < 1e-12 * abs(a @ pp.z)


def test_small_tau_limit_is_area(unit_square):
    s = indicator_domain(SourceSpec(unit_square), ProbeParams(Direction.from_degrees(0.0), 1e-9))
    assert s.value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("tau", [0.5, 3.0, 10.0])
def test_domain_against_triangle_quadrature(tau):
    D = PolygonDomain([[0.1, -0.3], [0.9, 0.0], [0.7, 0.8], [-0.2, 0.5]])
    src = SourceSpec(D, (1.0, -0.4, 0.6))
    pp = ProbeParams(Direction.from_degrees(63.0), tau, 0.3, 2.0)
    pts, wts = composite_rule(refine(triangulate(D), 0.1), 20)
    ref = np.sum(wts * src.rho(pts) * np.exp(pts @ pp.z - tau * pp.t))
    assert abs(indicator_domain(src, pp).value - ref) < 1e-10 * abs(ref)


def test_partial_full_boundary_equals_scaled_indicator(square_data):
    pp = ProbeParams(Direction.from_degrees(20.0), 9.0, 0.1, 1.0)
    full = indicator_boundary(square_data, pp).value
    assert abs(indicator_partial(square_data, pp, 5.0) - 81.0 * full) < 1e-12 * abs(81.0 * full)


def test_partial_decays_outside_grows_inside(square_data):
    w = Direction.from_degrees(30.0)
    h = support_function(PolygonDomain(CENTERED_SQUARE), w)
    taus = [10.0, 20.0, 40.0]
    out = [abs(indicator_partial(square_data, ProbeParams(w, s, h + 0.2, 1.0), 0.2)) for s in taus]
    ins = [abs(indicator_partial(square_data, ProbeParams(w, s, h - 0.2, 1.0), 0.2)) for s in taus]
    assert out[0] > out[1] > out[2]
    # geometric growth at the rate h_D - t = 0.2
    assert ins[0] < ins[1] < ins[2]
    assert ins[2] / ins[1] == pytest.approx(math.exp(0.2 * 20.0), rel=0.05)
    sample = indicator_partial_sample(square_data, ProbeParams(w, 40.0, h + 0.2, 1.0), 0.2)
    assert sample.log_abs == pytest.approx(math.log(out[2]))


def test_vertex_asymptote_modulus_and_rate(centered_square):
    src = SourceSpec(centered_square, (1.0, 0.5, 0.3))
    w = Direction.from_degrees(45.0)
    taus = [50.0, 100.0, 200.0, 400.0]
    pred = vertex_asymptote(src, w, taus)
    rho_p = 1.0 + 0.5 * 0.5 + 0.3 * 0.5
    for tau, p in zip(taus, pred):
        assert abs(p) == pytest.approx(rho_p / tau ** 2, rel=1e-14)
    h = support_function(centered_square, w)
    gaps = []
    for tau, p in zip(taus, pred):
        d = indicator_domain(src, ProbeParams(w, tau, h)).value
        gaps.append(abs(p - d) / abs(d))
    # O(1/tau): an eightfold increase of tau divides the gap by about eight
    assert 6.0 < gaps[0] / gaps[-1] < 10.0
    with pytest.raises(NonRegularDirection):
        vertex_asymptote(src, Direction.from_degrees(0.0), taus)


def test_square_vertex_example(centered_square):
    w = Direction.from_degrees(45.0)
    d = indicator_domain(SourceSpec(centered_square), ProbeParams(w, 200.0, math.sqrt(0.5)))
    assert abs(200.0 ** 2 * abs(d.value) - 1.0) < 0.1


def test_disk_closed_form():
    p, eps = np.array([0.3, -0.2]), 0.3
    w = Direction.from_degrees(30.0)
    pp = ProbeParams(w, 4.0, 0.1, 0.0)
    s = disk_indicator_closed_form(p, eps, pp)
    ref = math.pi * eps ** 2 * np.exp(p @ pp.z - 4.0 * 0.1)
    assert abs(s.value - ref) < 1e-14 * abs(ref)
    for k in (0.0, 1.0, 7.0):
        for tau in (1.0, 10.0, 30.0):
            pp = ProbeParams(w, tau, float(p @ w.omega), k)
            pts, wts = disk_rule(DiskDomain(p, eps), 48, 96)
            quad = np.sum(wts * np.exp(pts @ pp.z - tau * pp.t))
            closed = disk_indicator_closed_form(p, eps, pp).value
            assert abs(closed - quad) < 1e-9 * abs(closed)
            dom = indicator_domain(SourceSpec(DiskDomain(p, eps)), pp).value
            assert abs(closed - dom) < 1e-9 * abs(closed)


def test_disk_modulus_flat_and_decay_rate():
    p, eps, k = np.array([0.3, -0.2]), 0.3, 1.0
    w = Direction.from_degrees(30.0)
    taus = np.linspace(1, 60, 12)
    flat = [disk_indicator_closed_form(p, eps, ProbeParams(w, t, float(p @ w.omega), k)).log_abs for t in taus]
    assert np.ptp(flat) < 1e-12
    hd = float(p @ w.omega) + eps
    edge = [disk_indicator_closed_form(p, eps, ProbeParams(w, t, hd, k)).log_abs + t * eps for t in taus]
    assert np.ptp(edge) < 1e-6


def test_indicator_csv(tmp_path, square_data):
    rows = []
    for deg in (0.0, 45.0):
        for tau in (5.0, 10.0):
            rows.append((deg, indicator_boundary(square_data, ProbeParams(Direction.from_degrees(deg), tau, 0.0, 1.0))))
    path = tmp_path / "ind.csv"
    write_indicator_csv(path, rows)
    with open(path) as fh:
        got = list(csv.DictReader(fh))
    assert list(got[0]) == ["omega_deg", "tau", "t", "log_abs", "phase"]
    assert [float(r["log_abs"]) for r in got] == [s.log_abs for _, s in rows]
    assert [float(r["phase"]) for r in got] == [s.phase for _, s in rows]


def test_boundary_errors(square_data):
    w = Direction.from_degrees(0.0)
    with pytest.raises(WavenumberMismatch):
        indicator_boundary(square_data, ProbeParams(w, 5.0, 0.0, 2.0))
    coarse = synthesize_cauchy(SourceSpec(PolygonDomain(CENTERED_SQUARE)), OMEGA, 1.0, boundary_rule(OMEGA, 5.0, 1.0))
    with pytest.raises(UnderResolvedRule):
        indicator_boundary(coarse, ProbeParams(w, 60.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        ProbeParams(w, 0.0)
