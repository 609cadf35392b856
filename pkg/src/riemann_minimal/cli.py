"""Command-line frontend: ``riemann-minimal {gen, verify, kdv}``.

gen     sample the fundamental piece, run the reflection/translation
        extension, write OBJ/PLY meshes and a JSON report.
verify  run the cross-module verification suite (periods, symmetries,
        Shiffman, circle fits, registration, Enneper, minimality) and emit
        a machine-readable report; exit 1 if any check fails.
kdv     print the hierarchy polynomials and/or run the algebro-geometric
        least-squares measurement on the curve potential.

Exit codes: 0 success, 1 failed verification, 2 bad configuration,
3 numeric failure.  Reports are deterministic for a fixed config and seed
except for the timestamp and timings fields.  Set MINSURF_LOG=DEBUG|INFO|...
to control logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, checks, classical, curve, mesh, shiffkdv

log = logging.getLogger("riemann_minimal")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


@dataclass
class RunConfig:
    command: str
    sigma: float
    lam: float | None
    e: float = 0.1
    nr: int = 40
    nt: int = 60
    copies: int = 1
    seed: int = 7
    tolerances: dict = field(default_factory=dict)
    out_dir: str | None = None
    fmt: str = "obj"
    json_path: str | None = None
    n_level: int = 1
    samples: int = 60
    print_p: int | None = None


def _parse_grid(text):
    try:
        nr, nt = text.lower().split("x")
        return int(nr), int(nt)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 40x60, got {text!r}")


def _parse_tol(pairs):
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise argparse.ArgumentTypeError(f"--tol expects name=value, got {p!r}")
        name, val = p.split("=", 1)
        v = float(val)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"tolerance {name} must be positive")
        out[name] = v
    return out


def build_parser():
    ap = argparse.ArgumentParser(
        prog="riemann-minimal",
        description="Construct and verify Riemann's minimal examples.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_grid=False):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--sigma", type=float, help="curve parameter sigma > 0")
        g.add_argument("--lambda", dest="lam", type=float,
                       help="classical parameter lambda (sigma derived)")
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                       help="threshold override (repeatable)")
        p.add_argument("--json", dest="json_path", default=None,
                       help="write the JSON report here instead of stdout")
        if with_grid:
            p.add_argument("--e", type=float, default=0.1,
                           help="end-truncation parameter in (0,1)")
            p.add_argument("--grid", type=_parse_grid, default=(40, 60),
                           metavar="NRxNT")
            p.add_argument("--copies", type=int, default=1)

    pg = sub.add_parser("gen", help="generate and export meshes")
    common(pg, with_grid=True)
    pg.add_argument("-o", "--out", dest="out_dir", default="out")
    pg.add_argument("--format", dest="fmt", choices=["obj", "ply", "both"],
                    default="obj")

    pv = sub.add_parser("verify", help="run the verification suite")
    common(pv, with_grid=True)

    pk = sub.add_parser("kdv", help="KdV hierarchy printing and measurement")
    gk = pk.add_mutually_exclusive_group(required=False)
    gk.add_argument("--sigma", type=float)
    gk.add_argument("--lambda", dest="lam", type=float)
    pk.add_argument("--print-p", dest="print_p", type=int, default=None,
                    metavar="N", help="print P_0..P_N in canonical text")
    pk.add_argument("--n", dest="n_level", type=int, default=1,
                    help="hierarchy level for the least-squares fit")
    pk.add_argument("--samples", type=int, default=60)
    pk.add_argument("--seed", type=int, default=7)
    pk.add_argument("--json", dest="json_path", default=None)
    return ap


def _config_from_args(args) -> RunConfig:
    lam = getattr(args, "lam", None)
    sigma = getattr(args, "sigma", None)
    if sigma is None and lam is not None:
        sigma = classical.sigma_of_lambda(lam)
    if sigma is not None and not sigma > 0:
        raise ValueError("sigma must be positive")
    nr, nt = getattr(args, "grid", (40, 60))
    cfg = RunConfig(
        command=args.command,
        sigma=sigma if sigma is not None else 0.0,
        lam=lam,
        e=getattr(args, "e", 0.1),
        nr=nr, nt=nt,
        copies=getattr(args, "copies", 1),
        seed=getattr(args, "seed", 7),
        tolerances=_parse_tol(getattr(args, "tol", None)),
        out_dir=getattr(args, "out_dir", None),
        fmt=getattr(args, "fmt", "obj"),
        json_path=getattr(args, "json_path", None),
        n_level=getattr(args, "n_level", 1),
        samples=getattr(args, "samples", 60),
        print_p=getattr(args, "print_p", None),
    )
    if cfg.command in ("gen", "verify"):
        if not 0.0 < cfg.e < 1.0:
            raise ValueError("e must lie in (0,1)")
        if cfg.nr < 2 or cfg.nt < 2:
            raise ValueError("grid must be at least 2x2")
        if cfg.copies < 0:
            raise ValueError("copies must be >= 0")
    if cfg.command == "kdv":
        if cfg.print_p is None and not cfg.sigma:
            raise ValueError("kdv needs --print-p and/or --sigma/--lambda")
        if cfg.print_p is not None and cfg.print_p > shiffkdv.MAX_HIERARCHY_LEVEL:
            raise ValueError(
                f"hierarchy level {cfg.print_p} above max "
                f"{shiffkdv.MAX_HIERARCHY_LEVEL}")
        if not 1 <= cfg.n_level <= shiffkdv.MAX_HIERARCHY_LEVEL - 1:
            raise ValueError("kdv fit level n must be in [1, 5]")
    return cfg


def _report_skeleton(cfg: RunConfig) -> dict:
    return {
        "schema": 1,
        "command": cfg.command,
        "config": {
            "sigma": cfg.sigma,
            "lambda": cfg.lam,
            "e": cfg.e,
            "grid": [cfg.nr, cfg.nt],
            "copies": cfg.copies,
            "seed": cfg.seed,
            "tolerance_overrides": dict(sorted(cfg.tolerances.items())),
        },
        "checks": [],
        "pass": True,
        "environment": {
            "package_version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "seed": cfg.seed,
        },
        "timestamp": "",
        "timings": {},
    }


def _emit_report(report: dict, cfg: RunConfig, t_start: float):
    report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    report["timings"]["total_s"] = round(time.time() - t_start, 3)
    text = json.dumps(report, indent=2)
    if cfg.json_path:
        with open(cfg.json_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    elif cfg.command == "gen" and cfg.out_dir:
        with open(os.path.join(cfg.out_dir, "report.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


class _Suite:
    def __init__(self, report, overrides):
        self.report = report
        self.overrides = overrides

    def record(self, name, value, threshold):
        threshold = self.overrides.get(name, threshold)
        ok = bool(value < threshold)
        self.report["checks"].append({
            "name": name,
            "value": float(value),
            "threshold": float(threshold),
            "pass": ok,
        })
        if not ok:
            self.report["pass"] = False
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: value={value:.3e} threshold={threshold:.3e}",
              file=sys.stderr)


def cmd_gen(cfg: RunConfig) -> int:
    t_start = time.time()
    report = _report_skeleton(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    surf = mesh.FundamentalSurface(cfg.sigma)
    log.info("sampling fundamental piece (%dx%d)", cfg.nr, cfg.nt)
    fund = mesh.sample_fundamental(cfg.sigma, cfg.e, cfg.nr, cfg.nt,
                                   surface=surf)
    ops = mesh.extension_ops(cfg.sigma, surface=surf)
    ext = mesh.extend(fund, ops, copies=cfg.copies)
    files = {}
    formats = ("obj", "ply") if cfg.fmt == "both" else (cfg.fmt,)
    for fmt in formats:
        writer = mesh.export_obj if fmt == "obj" else mesh.export_ply
        for name, mm in (("fundamental", fund), ("extended", ext)):
            path = os.path.join(cfg.out_dir, f"{name}.{fmt}")
            files[f"{name}.{fmt}"] = writer(mm, path)
    x3 = fund.vertices[:, 2]
    report["result"] = {
        "fundamental_vertices": fund.vertex_count,
        "extended_vertices": ext.vertex_count,
        "fundamental_faces": fund.face_count,
        "extended_faces": ext.face_count,
        "slab_height": float(x3.max() - x3.min()),
        "translation": [float(v) for v in ops[3].offset],
        "files": files,
    }
    _emit_report(report, cfg, t_start)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    t_start = time.time()
    report = _report_skeleton(cfg)
    suite = _Suite(report, cfg.tolerances)
    rng = np.random.default_rng(cfg.seed)
    params = curve.CurveParams(cfg.sigma)

    per1 = curve.period(params, curve.gamma1_loop(params))
    suite.record("period_gamma1_re", float(np.max(np.abs(per1.real))), 1e-7)
    per2 = curve.period(params, curve.gamma2_loop(params))
    suite.record("period_gamma2_re_x2", abs(per2.real[1]), 1e-7)
    fl = curve.flux(params, curve.end_loop(params))
    suite.record("flux_end_loop", float(np.max(np.abs(fl))), 1e-7)

    pts = curve.random_regular_points(params, 50, rng)
    for which in ("S1", "S2", "S3"):
        suite.record(f"symmetry_{which.lower()}",
                     curve.verify_symmetry_action(params, which, pts), 1e-9)
    suite.record("gauss_ode",
                 max(curve.gauss_ode_residual(params, p) for p in pts), 1e-9)

    pts_s = curve.random_regular_points(params, 1000, rng)
    smax = max(abs(shiffkdv.shiffman(shiffkdv.msigma_jet(params, p, 3)))
               for p in pts_s)
    suite.record("shiffman", smax, 1e-9)

    canonical = classical.FoliationData(r=1.0, r_p=0.0, r_pp=0.0, kappa=1.0,
                                        kappa_p=0.0, tau=0.0, alpha=0.0,
                                        beta=0.0, delta=1.0)
    suite.record("enneper_fourier",
                 classical.enneper_fourier_check(canonical), 1e-4)

    lam = cfg.lam
    if lam is None:
        # invert sigma(lambda): sigma = 1/q1^2 gives lambda = (sigma-1)/sqrt(sigma)
        lam = (cfg.sigma - 1.0) / math.sqrt(cfg.sigma)
    if lam == 0.0:
        suite.record("catenoid_closed_form", checks.catenoid_residual(), 1e-8)

    rp = classical.RiemannParams.from_lambda(lam)
    slice_pts = np.array([classical.parameterize(rp, rp.q1 + 0.7, v)
                          for v in np.linspace(0, 2 * math.pi, 24,
                                               endpoint=False)])
    fit = mesh.level_circle_fit(slice_pts)
    suite.record("classical_circle_fit", fit.residual, 1e-10)

    H_cl, _, _ = checks.classical_fd_grid(lam, nq=10, nv=10)
    suite.record("minimality_classical", H_cl, 1e-3)
    H_w, conf_w, orth_w = checks.weierstrass_fd_grid(cfg.sigma, n_side=6)
    suite.record("minimality_weierstrass", H_w, 1e-3)
    suite.record("conformality_weierstrass", max(conf_w, orth_w), 1e-5)

    reg = checks.registration_error(lam, nr=24, nt=32, n_heights=6)
    suite.record("registration_radius", reg.max_radius_rel_err, 1e-3)
    suite.record("registration_spacing", reg.spacing_rel_err, 1e-3)

    rels, kinds = checks.foliation_residuals(
        cfg.sigma, heights=None, nr=20, nt=28, copies=0)
    suite.record("circle_foliation", float(np.max(rels)), 1e-5)
    suite.record("line_heights_classify",
                 0.0 if all(k == "line" for k in kinds) else 1.0, 0.5)

    _emit_report(report, cfg, t_start)
    return EXIT_OK if report["pass"] else EXIT_CHECK_FAILED


def cmd_kdv(cfg: RunConfig) -> int:
    t_start = time.time()
    report = _report_skeleton(cfg)
    if cfg.print_p is not None:
        lines = [f"P{k} = {shiffkdv.hierarchy_P(k)}"
                 for k in range(cfg.print_p + 1)]
        print("\n".join(lines))
        report["result"] = {"polynomials": lines}
    if cfg.sigma:
        params = curve.CurveParams(cfg.sigma)
        rng = np.random.default_rng(cfg.seed)
        pts = curve.random_regular_points(params, cfg.samples, rng)
        fit = shiffkdv.algebro_geometric_residual(params, cfg.n_level, pts)
        result = {
            "n": cfg.n_level,
            "samples": cfg.samples,
            "coefficients": [[c.real, c.imag] for c in fit.coefficients],
            "residual": fit.residual,
            "rank_deficient": bool(fit.rank_deficient),
        }
        report.setdefault("result", {}).update(result)
        _emit_report(report, cfg, t_start)
    elif cfg.json_path:
        _emit_report(report, cfg, t_start)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("MINSURF_LOG", "WARNING").upper())
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = _config_from_args(args)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.command == "gen":
            return cmd_gen(cfg)
        if cfg.command == "verify":
            return cmd_verify(cfg)
        return cmd_kdv(cfg)
    except Exception as exc:  # numeric failures from any module
        log.debug("numeric failure", exc_info=True)
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
