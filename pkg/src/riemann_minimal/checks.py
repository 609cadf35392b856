"""Finite-difference oracles and cross-construction checks.

These are the independent verification routines shared by the CLI
``verify`` command and the test suite.  They deliberately avoid the
analytic derivative formulas of the modules they check: mean curvature and
conformality come from central finite differences of sampled immersion
values only, and the classical/Weierstrass comparison is a rigid-motion
plus single-scale registration of measured circle radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, least_squares

from . import classical, curve, mesh
from .quad import ComplexPath, QuadSettings

__all__ = [
    "fd_surface_checks", "classical_fd_grid", "weierstrass_fd_grid",
    "weierstrass_laplacian_grid", "RegistrationResult", "registration_error",
    "classical_radius_at_height", "foliation_residuals", "catenoid_residual",
]


def fd_surface_checks(sample, h):
    """Second-order FD fundamental forms from a 3x3 stencil of positions.

    ``sample(i, j)`` must return the surface point at
    (u0 + i*h, v0 + j*h).  Returns (|H|, conformal defect, orthogonality
    defect), the defects relative to |Xu|^2.
    """
    X00 = sample(0, 0)
    Xp0, Xm0 = sample(1, 0), sample(-1, 0)
    X0p, X0m = sample(0, 1), sample(0, -1)
    Xpp, Xpm = sample(1, 1), sample(1, -1)
    Xmp, Xmm = sample(-1, 1), sample(-1, -1)
    Xu = (Xp0 - Xm0) / (2 * h)
    Xv = (X0p - X0m) / (2 * h)
    Xuu = (Xp0 - 2 * X00 + Xm0) / (h * h)
    Xvv = (X0p - 2 * X00 + X0m) / (h * h)
    Xuv = (Xpp - Xpm - Xmp + Xmm) / (4 * h * h)
    E = float(Xu @ Xu)
    F = float(Xu @ Xv)
    G = float(Xv @ Xv)
    n = np.cross(Xu, Xv)
    n /= np.linalg.norm(n)
    e = float(Xuu @ n)
    f = float(Xuv @ n)
    g = float(Xvv @ n)
    H = (e * G - 2 * f * F + g * E) / (2 * (E * G - F * F))
    return abs(H), abs(E - G) / E, abs(F) / E


def classical_fd_grid(lam, nq=20, nv=20, h=1e-4,
                      settings: QuadSettings | None = None):
    """Max FD |H| and conformality defects of the classical parameterization.

    The stencil q-values share one base evaluation of the height/center
    integrals plus short incremental integrals over [q, q+h]; subtracting
    two full quadratures would put their independent error terms over h^2
    and swamp the second differences.
    """
    from .quad import _adaptive

    params = classical.RiemannParams.from_lambda(lam, settings)
    q1 = params.q1
    qs = np.linspace(q1 * 1.05 + 0.02, q1 + 3.0, nq)
    vs = np.linspace(0.0, 2 * math.pi, nv, endpoint=False)
    worst_H = worst_conf = worst_orth = 0.0
    for q in qs:
        f0 = classical.center_offset(params, q, settings)
        z0 = classical.height(params, q, settings)

        def increment(a, b):
            df, _ = _adaptive(
                lambda u: -0.5 * u / np.sqrt(classical.radicand(lam, u)),
                [(a, b)], settings)
            dz, _ = _adaptive(
                lambda u: 0.5 / np.sqrt(classical.radicand(lam, u)),
                [(a, b)], settings)
            return float(np.real(df)), float(np.real(dz))

        dfp, dzp = increment(q, q + h)
        dfm, dzm = increment(q - h, q)
        fz = {-1: (f0 - dfm, z0 - dzm), 0: (f0, z0), 1: (f0 + dfp, z0 + dzp)}
        for v in vs:
            def sample(i, j, q=q, v=v):
                fq, zq = fz[i]
                rq = math.sqrt(q + i * h)
                return np.array([fq + rq * math.cos(v + j * h),
                                 rq * math.sin(v + j * h), zq])
            H, conf, orth = fd_surface_checks(sample, h)
            worst_H = max(worst_H, H)
            worst_conf = max(worst_conf, conf)
            worst_orth = max(worst_orth, orth)
    return worst_H, worst_conf, worst_orth


def _weierstrass_chart_points(sigma, n_side, settings):
    """Sampled (z, w, X) anchors over an interior patch of Omega_sigma."""
    surf = mesh.FundamentalSurface(sigma, settings)
    m = mesh.sample_fundamental(sigma, 0.35, n_side + 2, n_side + 2,
                                surface=surf)
    anchors = []
    nrfull = n_side + 2
    for j in range(1, nrfull - 1):
        for k in range(1, nrfull - 1):
            idx = j * nrfull + k
            anchors.append((m.domain_z[idx], m.domain_w[idx],
                            m.fundamental_xyz[idx]))
    return surf, anchors


def weierstrass_fd_grid(sigma, n_side=10, h=1e-4,
                        settings: QuadSettings | None = None):
    """Max FD |H| and conformality defects of the curve immersion.

    z = u + iv is itself a conformal chart, so the stencil offsets are
    taken directly in z and reached by short branch-continued integrations
    from the sampled anchor points.
    """
    surf, anchors = _weierstrass_chart_points(sigma, n_side, settings)
    params = surf.params
    worst_H = worst_conf = worst_orth = 0.0
    for z0, w0, X0 in anchors:
        cache = {(0, 0): np.asarray(X0)}

        def sample(i, j, z0=z0, w0=w0, X0=X0, cache=cache):
            if (i, j) not in cache:
                z = z0 + complex(i * h, j * h)
                pos, _ = curve.immerse(params, ComplexPath([z0, z]), w0, X0,
                                       settings)
                cache[(i, j)] = pos
            return cache[(i, j)]

        H, conf, orth = fd_surface_checks(sample, h)
        worst_H = max(worst_H, H)
        worst_conf = max(worst_conf, conf)
        worst_orth = max(worst_orth, orth)
    return worst_H, worst_conf, worst_orth


def weierstrass_laplacian_grid(sigma, n_side=6, h=1e-3,
                               settings: QuadSettings | None = None):
    """Max |five-point Laplacian of X| over interior anchors (harmonicity)."""
    surf, anchors = _weierstrass_chart_points(sigma, n_side, settings)
    params = surf.params
    worst = 0.0
    for z0, w0, X0 in anchors:
        vals = []
        for dz in (h, -h, 1j * h, -1j * h):
            pos, _ = curve.immerse(params, ComplexPath([z0, z0 + dz]), w0,
                                   np.asarray(X0), settings)
            vals.append(pos)
        lap = (sum(vals) - 4.0 * np.asarray(X0)) / (h * h)
        worst = max(worst, float(np.max(np.abs(lap))))
    return worst


# ---------------------------------------------------------------------------
# classical <-> Weierstrass registration


def classical_radius_at_height(params: classical.RiemannParams, z_target,
                               settings: QuadSettings | None = None):
    """sqrt(q) of the circle at height z_target in [0, zeta)."""
    if not 0.0 <= z_target < params.zeta:
        raise classical.DomainError(
            f"height {z_target} outside [0, zeta={params.zeta})")
    if z_target == 0.0:
        return math.sqrt(params.q1)
    q_hi = params.q1 + 1.0
    while classical.height(params, q_hi, settings) < z_target:
        q_hi *= 4.0
        if q_hi > 1e14:
            raise classical.ConvergenceError("height inversion bracket blew up")
    q = brentq(lambda q: classical.height(params, q, settings) - z_target,
               params.q1, q_hi, xtol=1e-13, rtol=1e-13)
    return math.sqrt(q)


@dataclass(frozen=True)
class RegistrationResult:
    scale: float
    height_offset: float
    max_radius_rel_err: float
    spacing_rel_err: float
    radii: np.ndarray
    heights: np.ndarray


def registration_error(lam, nr=30, nt=40, n_heights=8,
                       settings: QuadSettings | None = None) -> RegistrationResult:
    """Register the classical surface R_lambda against M_sigma(lambda).

    Measures level-circle radii of the Weierstrass fundamental piece at
    exact heights (refined slices), then fits a vertical offset plus a
    single scale carrying the classical radius-vs-height profile onto the
    measured one.  Returns the worst relative radius error and the relative
    mismatch of the vertical line spacings (|t0_3| against 2 s zeta).
    """
    sigma = classical.sigma_of_lambda(lam)
    cl = classical.RiemannParams.from_lambda(lam, settings)
    surf = mesh.FundamentalSurface(sigma, settings)
    m = mesh.sample_fundamental(sigma, 0.1, nr, nt, surface=surf)
    t0 = surf.translation_half()
    span = t0[2]
    # keep only heights the truncated fundamental piece covers with enough
    # mesh edges for a stable refined fit (extreme sigma pushes part of the
    # slab beyond the end truncation)
    candidates = (0.14 + 0.72 * np.arange(2 * n_heights)
                  / max(2 * n_heights - 1, 1)) * span
    hs = [h for h in candidates
          if len(mesh.slice_mesh(m, float(h))[1]) >= 8][:n_heights]
    if len(hs) < 4:
        raise RuntimeError(
            "too few well-covered heights; refine the grid or lower e")
    hs = np.array(hs)
    radii = []
    for h in hs:
        pts = mesh.refine_slice(m, float(h), surf, max_points=24)
        fit = mesh.level_circle_fit(pts)
        if fit.kind != "circle":
            raise RuntimeError(f"slice at {h} did not fit a circle")
        radii.append(fit.radius)
    radii = np.array(radii)
    neck_height = 0.5 * span  # the S1 fixed point sits midway between lines

    def model(x):
        s, h0 = x
        out = np.empty_like(radii)
        for i, h in enumerate(hs):
            zc = abs(h - h0) / s
            zc = min(zc, 0.999 * cl.zeta)
            out[i] = s * classical_radius_at_height(cl, zc, settings)
        return out - radii

    s0 = abs(span) / (2.0 * cl.zeta)
    sol = least_squares(model, x0=[s0, neck_height], xtol=1e-14, ftol=1e-14)
    s, h0 = sol.x
    rel = np.max(np.abs(model(sol.x)) / radii)
    spacing_rel = abs(abs(span) - 2.0 * s * cl.zeta) / (2.0 * s * cl.zeta)
    return RegistrationResult(float(s), float(h0), float(rel),
                              float(spacing_rel), radii, hs)


def foliation_residuals(sigma, heights=None, nr=30, nt=40, copies=1,
                        settings: QuadSettings | None = None):
    """Relative circle-fit residuals of refined slices of the extended mesh.

    Returns (relative residuals at generic heights, line classifications at
    the two line heights 0 and t0_3).
    """
    surf = mesh.FundamentalSurface(sigma, settings)
    m = mesh.sample_fundamental(sigma, 0.1, nr, nt, surface=surf)
    ops = mesh.extension_ops(sigma, surface=surf)
    ext = mesh.extend(m, ops, copies=copies)
    span = surf.translation_half()[2]
    if heights is None:
        heights = (0.13 + 0.74 * np.arange(10) / 9.0) * span
    rels = []
    for h in heights:
        pts = mesh.refine_slice(ext, float(h), surf, max_points=28)
        fit = mesh.level_circle_fit(pts)
        if fit.kind != "circle":
            raise RuntimeError(f"slice at height {h} did not fit a circle")
        rels.append(fit.residual / fit.radius)
    # line heights: the slice at the height of a boundary line consists of
    # the (exactly coplanar, exactly collinear) line vertices themselves
    line_kinds = []
    for h in (0.0, span):
        sel = np.abs(ext.vertices[:, 2] - h) <= 1e-9 * max(1.0, abs(h))
        fit = mesh.level_circle_fit(ext.vertices[sel])
        line_kinds.append(fit.kind)
    return np.array(rels), line_kinds


def catenoid_residual(lams=(0.5, 1.0, 2.0), n_q=20,
                      settings: QuadSettings | None = None) -> float:
    """Max |closed form - quadrature| for the catenoid height integral.

    The a = 0 radicand is lambda u^2 - u with its simple zero at the neck
    q = 1/lambda, so the same sqrt-singular substitution applies.
    """
    from .quad import integrate_sqrt_singular

    worst = 0.0
    for lam in lams:
        q_neck = 1.0 / lam
        for q in np.linspace(q_neck, q_neck + 6.0, n_q)[1:]:
            f = lambda u: 0.5 / np.sqrt(lam * u * u - u)
            quad_val = integrate_sqrt_singular(f, q_neck, q, settings)
            worst = max(worst, abs(quad_val - classical.catenoid_height(lam, q)))
    return worst
