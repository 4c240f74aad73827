"""Command-line front end for batch experiments.

Every command reads one JSON config (a path or a bundled scenario name) merged
over the bundled defaults and writes its artifacts into ``--out``.

Exit codes: 0 ok, 2 invalid config, 3 numerical failure, 4 missing input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .errors import ConfigInvalid, EnclosureError, MissingInput
from .forward import CauchyData, SourceSpec, add_noise, synthesize_cauchy
from .geometry import Direction, DiskDomain, support_function
from .ibvp import (
    ibvp_domain_indicator,
    solve_lippmann_schwinger,
    synthesize_ibvp_cauchy,
    vertex_field_check,
)
from .probe import (
    ProbeParams,
    disk_indicator_closed_form,
    indicator_boundary,
    indicator_domain,
    write_indicator_csv,
)
from .quadrature import boundary_rule
from .reconstruct import (
    HullResult,
    bbox_for,
    enclose,
    side_test,
    sweep,
    sweep_directions,
)

logger = logging.getLogger("enclosure")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_MISSING = 0, 2, 3, 4
COMMANDS = ("synthesize", "indicate", "reconstruct", "side-test", "disk-demo", "ibvp", "report")
ESTIMATE_COLUMNS = ("omega_deg", "h", "h_true", "error", "slope_b", "residual", "regular_hint",
                    "n_samples", "tau_max")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _rule(cfg):
    r = cfg.raw["rule"]
    return boundary_rule(cfg.omega, float(r["tau"]), cfg.k, float(r["oversample"]))


def _synthesize(cfg, seed: int) -> CauchyData:
    if cfg.scenario == "ibvp":
        ib = cfg.raw["ibvp"]
        fld = solve_lippmann_schwinger(cfg.refractive, float(ib["tol"]), int(ib["max_iter"]), float(ib["max_edge"]))
        data = synthesize_ibvp_cauchy(cfg.refractive, fld, cfg.omega, _rule(cfg))
    elif cfg.scenario == "source":
        data = synthesize_cauchy(cfg.source, cfg.omega, cfg.k, _rule(cfg))
    else:
        raise ConfigInvalid(f"scenario {cfg.scenario!r} has no boundary data")
    return add_noise(data, float(cfg.noise["level"]), seed)


def _data(cfg, args) -> CauchyData:
    if args.data:
        path = Path(args.data)
        if not path.is_file():
            raise MissingInput(f"Cauchy data file {path} not found")
        data = CauchyData.load(path)
        if abs(data.k - cfg.k) > 1e-12:
            raise ConfigInvalid(f"data k={data.k} differs from config k={cfg.k}")
        return data
    return _synthesize(cfg, args.seed)


def _sweep(cfg, data, threads):
    p, f = cfg.probe, cfg.fit
    return sweep(data, int(p["n_dirs"]), cfg.tau_grid, float(p["t"]), cfg.source.kind if cfg.source else "monopole",
                 threads, float(p["offset_deg"]), float(f["residual_threshold"]), float(f["dip_tol"]),
                 float(f["snr_margin"]))


def _estimate_rows(estimates, truth):
    rows = []
    for e in estimates:
        ht = support_function(truth, e.dir) if truth is not None else math.nan
        rows.append((e.dir.degrees, e.h, ht, e.h - ht, e.slope_b, e.residual, e.regular_hint,
                     e.n_samples, e.tau_max))
    return rows


def _reconstruct(cfg, data, out: Path, threads: int) -> HullResult:
    ests = _sweep(cfg, data, threads)
    truth = cfg.truth
    res = enclose(ests, truth, bbox_for(cfg.omega))
    res.save(out / "hull.json")
    _write_csv(out / "estimates.csv", ESTIMATE_COLUMNS, _estimate_rows(ests, truth))
    return res


def cmd_synthesize(cfg, args, out: Path) -> str:
    data = _synthesize(cfg, args.seed)
    data.save(out / "cauchy.json")
    return f"wrote {len(data)} boundary nodes to {out / 'cauchy.json'}"


def cmd_indicate(cfg, args, out: Path) -> str:
    data = _data(cfg, args)
    rows = []
    for w in sweep_directions(int(cfg.probe["n_dirs"]), float(cfg.probe["offset_deg"])):
        for tau in cfg.tau_grid:
            rows.append((w.degrees, indicator_boundary(data, ProbeParams(w, float(tau), float(cfg.probe["t"]), data.k))))
    write_indicator_csv(out / "indicators.csv", rows)
    return f"wrote {len(rows)} indicator samples to {out / 'indicators.csv'}"


def cmd_reconstruct(cfg, args, out: Path) -> str:
    data = _data(cfg, args)
    res = _reconstruct(cfg, data, out, args.threads)
    return summarize(res)


def cmd_side_test(cfg, args, out: Path) -> str:
    data = _data(cfg, args)
    truth = cfg.truth
    if truth is None:
        raise ConfigInvalid("side-test needs a polygonal source to place the test lines")
    p = cfg.probe
    rows, lines = [], []
    for w in sweep_directions(int(p["side_dirs"]), float(p["offset_deg"])):
        h = support_function(truth, w)
        for off in p["side_offsets"]:
            r = side_test(data, w, h + float(off), float(p["eps"]), cfg.tau_grid)
            rows.append((w.degrees, h + float(off), float(off), r.verdict, r.slope, len(r.trace)))
            lines.append(f"{w.degrees:8.2f}  t = h_D {float(off):+.3f}  {r.verdict}")
    with open(out / "side_test.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(("omega_deg", "t", "offset", "verdict", "slope", "n_samples"))
        for row in rows:
            wr.writerow([_fmt(row[0]), _fmt(row[1]), _fmt(row[2]), row[3], _fmt(row[4]), _fmt(row[5])])
    return "\n".join(lines)


def disk_demo_rows(center, eps: float, k: float, w: Direction, taus):
    """Closed form vs polar quadrature at ``t = p . omega`` and the decay at ``t = h_D``."""
    p = np.asarray(center, dtype=float)
    src = SourceSpec(DiskDomain(p, eps))
    t_center = float(p @ w.omega)
    t_edge = t_center + eps
    rows = []
    for tau in taus:
        pp = ProbeParams(w, float(tau), t_center, k)
        closed = disk_indicator_closed_form(p, eps, pp)
        quad = indicator_domain(src, pp)
        rel = abs(closed.value - quad.value) / abs(closed.value)
        edge = indicator_domain(src, ProbeParams(w, float(tau), t_edge, k))
        rows.append([float(tau), closed.log_abs, quad.log_abs, rel, edge.log_abs])
    taus = np.array([r[0] for r in rows])
    rate = -float(np.polyfit(taus, [r[4] for r in rows], 1)[0])
    for r in rows:
        r.append(rate)
    return rows


def cmd_disk_demo(cfg, args, out: Path) -> str:
    d = cfg.raw["disk"]
    w = Direction.from_degrees(float(d["dir_deg"]))
    eps = float(d["eps"])
    rows = disk_demo_rows(d["center"], eps, cfg.k, w, cfg.tau_grid)
    _write_csv(out / "disk_demo.csv", ("tau", "closed_log_abs", "quad_log_abs", "rel_diff",
                                       "edge_log_abs", "decay_rate"), rows)
    spread = max(r[1] for r in rows) - min(r[1] for r in rows)
    return (f"eps = {eps}  fitted decay rate = {rows[0][5]:.6f}  "
            f"max closed/quadrature rel diff = {max(r[3] for r in rows):.2e}  "
            f"log_abs spread at t = p.omega: {spread:.2e}")


def cmd_ibvp(cfg, args, out: Path) -> str:
    ib = cfg.raw["ibvp"]
    spec = cfg.refractive
    fld = solve_lippmann_schwinger(spec, float(ib["tol"]), int(ib["max_iter"]), float(ib["max_edge"]))
    _write_csv(out / "ls_trace.csv", ("iteration", "update_norm"),
               [(i + 1, v) for i, v in enumerate(fld.history)])
    data = add_noise(synthesize_ibvp_cauchy(spec, fld, cfg.omega, _rule(cfg)), float(cfg.noise["level"]), args.seed)
    res = _reconstruct(cfg, data, out, args.threads)
    dirs = [e.dir for e in res.estimates]
    checks = vertex_field_check(spec, fld, dirs, float(ib["u_floor"]))
    _write_csv(out / "vertex_check.csv", ("omega_deg", "vertex_x", "vertex_y", "u_abs", "ok"),
               [(c.dir.degrees, c.vertex[0], c.vertex[1], c.u_abs, c.ok) for c in checks])
    # two-sided check of the indicator identity at the first grid value
    w0 = dirs[0]
    dom = ibvp_domain_indicator(spec, fld, ProbeParams(w0, float(cfg.tau_grid[0]), 0.0, spec.k))
    bnd = indicator_boundary(data, ProbeParams(w0, float(cfg.tau_grid[0]), 0.0, spec.k))
    head = (f"contraction bound {spec.contraction_bound():.4g}, {fld.iterations} iterations, "
            f"residual {fld.residual:.3g}\n"
            f"min |u(p)| over extremal vertices {min(c.u_abs for c in checks):.4f}\n"
            f"boundary/domain indicator rel gap at tau={cfg.tau_grid[0]:g}: "
            f"{abs(bnd.value - dom.value) / abs(dom.value):.2e}")
    return head + "\n" + summarize(res)


def summarize(res: HullResult) -> str:
    """Per-direction table with fit diagnostics and the Hausdorff line when a truth is known."""
    if not res.estimates:
        raise MissingInput("no support estimates to report")
    lines = [f"{'omega_deg':>10} {'h':>10} {'slope_b':>8} {'residual':>9} regular"]
    for e in res.estimates:
        lines.append(f"{e.dir.degrees:10.3f} {e.h:10.6f} {e.slope_b:8.3f} {e.residual:9.2e} "
                     f"{'yes' if e.regular_hint else 'no'}")
    bs = [e.slope_b for e in res.estimates]
    reg = [e.slope_b for e in res.estimates if e.regular_hint]
    lines.append(f"mean slope_b {np.mean(bs):.3f} (regular directions: "
                 f"{np.mean(reg) if reg else float('nan'):.3f}, {len(reg)}/{len(bs)})")
    lines.append(f"hull vertices {len(res.hull.vertices)}")
    if res.hausdorff_vs_truth is not None:
        lines.append(f"hausdorff vs truth {res.hausdorff_vs_truth:.6f}")
    return "\n".join(lines)


def cmd_report(cfg, args, out: Path) -> str:
    src = Path(args.hull) if args.hull else out / "hull.json"
    if not src.is_file():
        raise MissingInput(f"hull result {src} not found")
    res = HullResult.from_json(json.loads(src.read_text()))
    text = summarize(res)
    if res.hausdorff_vs_truth is not None:
        thr = float(args.threshold)
        text += f"\nhausdorff < {thr:g}: {'PASS' if res.hausdorff_vs_truth < thr else 'FAIL'}"
    (out / "summary.txt").write_text(text + "\n")
    _write_csv(out / "report.csv", ("omega_deg", "h", "slope_b", "residual", "regular_hint"),
               [(e.dir.degrees, e.h, e.slope_b, e.residual, e.regular_hint) for e in res.estimates])
    return text


HANDLERS = {
    "synthesize": cmd_synthesize,
    "indicate": cmd_indicate,
    "reconstruct": cmd_reconstruct,
    "side-test": cmd_side_test,
    "disk-demo": cmd_disk_demo,
    "ibvp": cmd_ibvp,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="enclosure", description="Support-function reconstruction experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=False, help="config JSON path or bundled scenario name "
                    f"({', '.join(cfgmod.SCENARIOS)})")
    ap.add_argument("--out", default=".", help="output directory (created if needed)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=None, help="noise seed; overrides the config")
    ap.add_argument("--data", default=None, help="read Cauchy data JSON instead of synthesizing")
    ap.add_argument("--hull", default=None, help="HullResult JSON for report (default OUT/hull.json)")
    ap.add_argument("--threshold", type=float, default=0.05, help="Hausdorff pass threshold for report")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report" and args.config is None:
            cfg = None
        else:
            if args.config is None:
                raise ConfigInvalid("--config is required")
            cfg = cfgmod.load_config(args.config)
            if args.seed is None:
                args.seed = int(cfg.noise["seed"])
            if args.command in ("synthesize", "indicate", "reconstruct", "side-test") and cfg.scenario == "disk-demo":
                raise ConfigInvalid(f"{args.command} needs a source or ibvp scenario")
            if args.command == "ibvp" and cfg.scenario != "ibvp":
                raise ConfigInvalid("ibvp command needs scenario 'ibvp'")
        if args.threads < 1:
            raise ConfigInvalid("--threads must be positive")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        text = HANDLERS[args.command](cfg, args, out)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingInput as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (EnclosureError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
