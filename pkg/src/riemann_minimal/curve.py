"""The elliptic curve w^2 = z(z-1)(z+sigma) and its Weierstrass data.

The stereographically projected Gauss map is g(z, w) = z/sqrt(sigma) and the
height differential is phi3 = dz/w, which fixes the other two forms:

    phi1 = (1/2)(1/g - g) phi3,      phi2 = (i/2)(1/g + g) phi3.

The surface is recovered by X(p) = X(p0) + Re int (phi1, phi2, phi3) along
any path, provided w is continued as a single continuous branch of
sqrt(z(z-1)(z+sigma)).  Branch tracking is done by adaptive stepping with a
45-degree rotation budget per step, which makes the nearest-sign choice
unambiguous at every query point in between.

Conventions fixed here (see README):

* base point z = 1 + 1e-2 with w real and positive;
* gamma1 = round loop enclosing the branch points {0, 1};
* gamma2 = round loop enclosing {-sigma, 0} (a circle cannot enclose 1 and
  -sigma without swallowing 0, so this homologous representative is used);
* end loops around z = 0 are traversed twice so the lift closes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quad import (ComplexPath, QuadSettings, _adaptive,
                   _point_segment_distance)

__all__ = [
    "CurveError", "BranchAmbiguity", "ClearanceViolation", "PoleOfGaussMap",
    "CurveParams", "CurvePoint", "WeierstrassForms", "HomologyLoop",
    "curve_poly", "branch_points", "default_clearance", "basepoint",
    "make_point", "on_curve_residual", "continue_w", "immerse",
    "weierstrass_at", "gauss_map", "gaussian_curvature",
    "gamma1_loop", "gamma2_loop", "end_loop", "period", "flux",
    "apply_symmetry", "verify_symmetry_action", "gauss_ode_residual",
    "gauss_derivatives", "random_regular_points",
]

BASEPOINT_OFFSET = 1e-2


class CurveError(Exception):
    pass


class BranchAmbiguity(CurveError):
    """Adaptive stepping could not disambiguate the square-root sign."""


class ClearanceViolation(CurveError):
    """A path came closer to a branch point than its clearance allows."""


class PoleOfGaussMap(CurveError):
    """Operation undefined where g is 0 or infinite."""


@dataclass(frozen=True)
class CurveParams:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class CurvePoint:
    z: complex
    w: complex


@dataclass(frozen=True)
class WeierstrassForms:
    """Values of g and the three 1-form densities (with respect to dz)."""

    g: complex
    phi1_density: complex
    phi2_density: complex
    phi3_density: complex

    @classmethod
    def from_g(cls, g, phi3_density=1.0):
        g = complex(g)
        if g == 0 or not np.isfinite(g):
            raise PoleOfGaussMap(f"g = {g}")
        p3 = complex(phi3_density)
        return cls(g, 0.5 * (1.0 / g - g) * p3, 0.5j * (1.0 / g + g) * p3, p3)


def curve_poly(params: CurveParams, z):
    return z * (z - 1.0) * (z + params.sigma)


def branch_points(params: CurveParams):
    return (0.0 + 0.0j, 1.0 + 0.0j, complex(-params.sigma))


def default_clearance(params: CurveParams) -> float:
    return 1e-3 * (1.0 + params.sigma)


def on_curve_residual(params: CurveParams, pt: CurvePoint) -> float:
    return abs(pt.w ** 2 - curve_poly(params, pt.z)) / (1.0 + abs(pt.z) ** 3)


def make_point(params: CurveParams, z, w, tol=1e-9) -> CurvePoint:
    pt = CurvePoint(complex(z), complex(w))
    if on_curve_residual(params, pt) > tol:
        raise ValueError(f"({z}, {w}) is not on the curve (sigma={params.sigma})")
    return pt


def basepoint(params: CurveParams) -> CurvePoint:
    """Fixed regular base point: z = 1 + 1e-2, w real and positive."""
    z = 1.0 + BASEPOINT_OFFSET
    w = math.sqrt(z * (z - 1.0) * (z + params.sigma))
    return CurvePoint(complex(z), complex(w))


def _path_clearance_check(params, path: ComplexPath, skip_endpoint=None):
    """Raise ClearanceViolation if the path crowds a branch point.

    ``skip_endpoint`` exempts one branch point that the path legitimately
    terminates at (reparameterized singular-end integration).
    """
    clear = path.clearance if path.clearance > 0 else default_clearance(params)
    for bp in branch_points(params):
        if skip_endpoint is not None and abs(bp - skip_endpoint) == 0.0:
            continue
        d = path.min_distance_to([bp])
        if d < clear:
            raise ClearanceViolation(
                f"path at distance {d:.3e} < clearance {clear:.3e} "
                f"from branch point {bp}")


class _SegmentBranch:
    """Continuous branch of w along one straight segment a -> b.

    Checkpoints are spaced so w rotates < 45 degrees between consecutive
    ones; a query point's sign is then matched against the nearest earlier
    checkpoint, which is unambiguous (the wrong sign sits > 90 deg away).
    """

    __slots__ = ("a", "b", "ts", "ws", "w_end")

    def __init__(self, params, a, b, w0, terminal_zero=False):
        self.a = complex(a)
        self.b = complex(b)
        if w0 == 0:
            raise BranchAmbiguity(
                "cannot continue a branch starting from w = 0 (branch point)")
        ts = [0.0]
        ws = [complex(w0)]
        t, w, dt = 0.0, complex(w0), 0.25
        while t < 1.0:
            step = min(dt, 1.0 - t)
            while True:
                tn = t + step
                z = self.a + (self.b - self.a) * tn
                c = np.sqrt(complex(curve_poly(params, z)))
                if abs(c - w) > abs(c + w):
                    c = -c
                if abs(c) == 0.0:
                    if terminal_zero and tn == 1.0:
                        break
                    raise BranchAmbiguity(f"w vanished mid-path at z={z}")
                cosang = (c * w.conjugate()).real / (abs(c) * abs(w))
                if cosang > math.cos(math.pi / 4):
                    break
                step *= 0.5
                if step < 1e-12:
                    raise BranchAmbiguity(
                        f"cannot track branch near z={z} (step underflow)")
            t += step
            w = c
            ts.append(t)
            ws.append(w)
            dt = min(0.25, step * 2.0)
        self.ts = np.array(ts)
        self.ws = np.array(ws)
        self.w_end = ws[-1]

def _branch_values(params, zs, wref):
    cand = np.sqrt(zs * (zs - 1.0) * (zs + params.sigma))
    flip = np.abs(cand - wref) > np.abs(cand + wref)
    cand[flip] = -cand[flip]
    return cand


def continue_w(params: CurveParams, path: ComplexPath, w_start) -> complex:
    """Continuous branch of sqrt(z(z-1)(z+sigma)) at the end of ``path``."""
    w0 = complex(w_start)
    z0 = path.nodes[0]
    if abs(w0 ** 2 - curve_poly(params, z0)) > 1e-6 * (1.0 + abs(z0) ** 3):
        raise ValueError("w_start inconsistent with the curve at the path start")
    _path_clearance_check(params, path)
    w = w0
    for a, b in path.segments:
        w = _SegmentBranch(params, a, b, w).w_end
    return w


def _phi_vector(params, zs, ws):
    """Densities (phi1, phi2, phi3) with respect to dz, stacked (n, 3)."""
    rs = math.sqrt(params.sigma)
    g = zs / rs
    p3 = 1.0 / ws
    return np.stack([0.5 * (1.0 / g - g) * p3,
                     0.5j * (1.0 / g + g) * p3,
                     p3], axis=-1)


def _integrate_segment_regular(params, a, b, w0, settings):
    br = _SegmentBranch(params, a, b, w0)
    d = b - a

    def f(zs):
        t = np.clip(((zs - a) / d).real, 0.0, 1.0)
        idx = np.clip(np.searchsorted(br.ts, t, side="right") - 1,
                      0, len(br.ts) - 1)
        ws = _branch_values(params, zs, br.ws[idx])
        return _phi_vector(params, zs, ws)

    total, _ = _adaptive(f, [(a, b)], settings)
    return total, br.w_end


def _integrate_segment_to_branch(params, a, bp, w0, settings):
    """Segment ending exactly at a branch point, via z = bp + (a-bp)(1-s)^2.

    The substitution cancels the 1/sqrt blow-up of the densities, so the
    reparameterized integrand is smooth on [0, 1].  Only the branch points
    1 and -sigma are allowed (z = 0 is a pole of 1/g as well).
    """
    if abs(bp) < 1e-12:
        raise PoleOfGaussMap("cannot integrate into the end at z = 0")
    br = _SegmentBranch(params, a, bp, w0, terminal_zero=True)
    d = a - bp

    def f(ss):
        one_minus = 1.0 - ss
        zs = bp + d * one_minus ** 2
        t = np.clip(1.0 - one_minus ** 2, 0.0, 1.0 - 1e-300)
        idx = np.clip(np.searchsorted(br.ts, t.real, side="right") - 1,
                      0, len(br.ts) - 1)
        ws = _branch_values(params, zs, br.ws[idx])
        dz = -2.0 * d * one_minus
        return _phi_vector(params, zs, ws) * dz[:, None]

    total, _ = _adaptive(f, [(0.0, 1.0)], settings)
    return total


def immerse(params: CurveParams, path: ComplexPath, w_start,
            base_position=(0.0, 0.0, 0.0),
            settings: QuadSettings | None = None):
    """Integrate the Weierstrass forms along ``path``.

    Returns (position, end_point): ``base_position + Re int (phi1,phi2,phi3)``
    and the curve point at the path end with the continued branch of w.  A
    path whose final node is the branch point 1 or -sigma is handled by an
    exact reparameterization (the end point then carries w = 0); all other
    nodes must keep the path clearance.
    """
    pos = np.asarray(base_position, dtype=float).copy()
    if len(path.nodes) < 2:
        return pos, CurvePoint(path.nodes[0] if path.nodes else 0j,
                               complex(w_start))
    bps = branch_points(params)
    z_end = path.nodes[-1]
    terminal_bp = None
    for bp in bps:
        if abs(z_end - bp) < 1e-12 * (1.0 + params.sigma):
            terminal_bp = bp
            break
    _path_clearance_check(params, path, skip_endpoint=terminal_bp)
    w = complex(w_start)
    acc = np.zeros(3, dtype=complex)
    segs = path.segments
    for i, (a, b) in enumerate(segs):
        if terminal_bp is not None and i == len(segs) - 1:
            acc += _integrate_segment_to_branch(params, a, terminal_bp, w, settings)
            w = 0.0 + 0.0j
        else:
            part, w = _integrate_segment_regular(params, a, b, w, settings)
            acc += part
    return pos + acc.real, CurvePoint(complex(z_end), w)


def weierstrass_at(params: CurveParams, pt: CurvePoint) -> WeierstrassForms:
    rs = math.sqrt(params.sigma)
    g = pt.z / rs
    if g == 0 or not np.isfinite(g):
        raise PoleOfGaussMap(f"g = {g}")
    if pt.w == 0:
        raise PoleOfGaussMap("phi3 density 1/w undefined at a branch point")
    return WeierstrassForms.from_g(g, 1.0 / pt.w)


def gauss_map(forms: WeierstrassForms) -> np.ndarray:
    """Unit normal N from the stereographic projection of g."""
    g = forms.g
    if g == 0 or not np.isfinite(g):
        raise PoleOfGaussMap(f"g = {g}")
    a2 = abs(g) ** 2
    return np.array([2.0 * g.real, 2.0 * g.imag, a2 - 1.0]) / (1.0 + a2)


def gaussian_curvature(forms: WeierstrassForms, g_prime) -> float:
    """K in the conformal coordinate with phi3 = d(xi).

    K = -( 4|g'/g| / (|g| + 1/|g|)^2 )^2 <= 0.
    """
    g = forms.g
    if g == 0 or not np.isfinite(g):
        raise PoleOfGaussMap(f"g = {g}")
    ag = abs(g)
    return -float((4.0 * abs(complex(g_prime) / g) / (ag + 1.0 / ag) ** 2) ** 2)


# ---------------------------------------------------------------------------
# homology loops, periods, flux


@dataclass(frozen=True)
class HomologyLoop:
    kind: str
    base: CurvePoint
    geometry: ComplexPath


def _circle_nodes(center, radius, n, turns=1):
    ang = np.linspace(0.0, 2.0 * math.pi * turns, n * turns + 1)
    return tuple(center + radius * np.exp(1j * ang))


def _make_loop(params, kind, center, radius, n, turns=1):
    nodes = _circle_nodes(center, radius, n, turns)
    clear = min(default_clearance(params),
                0.5 * min(_point_segment_distance(bp, a, b)
                          for bp in branch_points(params)
                          for a, b in zip(nodes[:-1], nodes[1:])))
    path = ComplexPath(nodes, clearance=clear)
    z0 = nodes[0]
    w0 = np.sqrt(complex(curve_poly(params, z0)))
    w_end = continue_w(params, path, w0)
    if abs(w_end - w0) > 1e-8 * abs(w0):
        raise BranchAmbiguity(
            f"loop {kind} does not close on the curve: |dw|/|w| = "
            f"{abs(w_end - w0) / abs(w0):.3e}")
    return HomologyLoop(kind, CurvePoint(z0, w0), path)


def gamma1_loop(params: CurveParams, n=64) -> HomologyLoop:
    """Round loop enclosing the branch points {0, 1} only.

    Re of its period vanishes (the closed-circle class of the surface).
    """
    gap = (0.5 + params.sigma) - 0.5
    return _make_loop(params, "gamma1", 0.5, 0.5 + 0.1 * gap, n)


def gamma2_loop(params: CurveParams, n=64) -> HomologyLoop:
    """Round loop enclosing {-sigma, 0} only (translation class).

    Re of its period is the translation vector 2*t0, which lies in the
    symmetry plane {x2 = 0}.
    """
    s = params.sigma
    r_in = 0.5 * s
    r_out = 1.0 + 0.5 * s
    return _make_loop(params, "gamma2", -0.5 * s, r_in + 0.1 * (r_out - r_in), n)


def end_loop(params: CurveParams, n=64, which: str = "zero") -> HomologyLoop:
    """Double round loop around an end: z = 0 or z = infinity.

    Both ends sit over branch points (the cubic has odd degree, so infinity
    branches too); a single turn flips the sign of w and two turns close
    the lift.  The infinity loop is a large double circle enclosing all
    three finite branch points.
    """
    if which == "zero":
        radius = 0.3 * min(1.0, params.sigma)
        return _make_loop(params, "end_loop", 0.0, radius, n, turns=2)
    if which == "infinity":
        radius = 3.0 * (1.0 + params.sigma)
        return _make_loop(params, "end_loop", 0.0, radius, n, turns=2)
    raise ValueError(f"unknown end {which!r}")


def period(params: CurveParams, loop: HomologyLoop,
           settings: QuadSettings | None = None) -> np.ndarray:
    """The three loop integrals (int phi1, int phi2, int phi3)."""
    w = complex(loop.base.w)
    acc = np.zeros(3, dtype=complex)
    for a, b in loop.geometry.segments:
        part, w = _integrate_segment_regular(params, a, b, w, settings)
        acc += part
    return acc


def flux(params: CurveParams, loop: HomologyLoop,
         settings: QuadSettings | None = None) -> np.ndarray:
    """F(gamma) = Im int (phi1, phi2, phi3), a homology invariant."""
    return period(params, loop, settings).imag


# ---------------------------------------------------------------------------
# symmetries


def apply_symmetry(params: CurveParams, which: str, pt: CurvePoint) -> CurvePoint:
    """S1(z,w) = (-sigma/z, -sigma w/z^2); S2 = (conj z, -conj w); S3 = conj."""
    z, w = pt.z, pt.w
    s = params.sigma
    if which == "S1":
        if z == 0:
            raise PoleOfGaussMap("S1 undefined at z = 0")
        return CurvePoint(-s / z, -s * w / z ** 2)
    if which == "S2":
        return CurvePoint(np.conj(z), -np.conj(w))
    if which == "S3":
        return CurvePoint(np.conj(z), np.conj(w))
    raise ValueError(f"unknown symmetry {which!r}")


def verify_symmetry_action(params: CurveParams, which: str, samples) -> float:
    """Max defect of the g-relation and phi3-pullback relation at the samples.

    S1: g o S1 = -1/g          S1* phi3 = -phi3
    S2: g o S2 = conj g        S2* phi3 = -conj phi3
    S3: g o S3 = conj g        S3* phi3 = +conj phi3
    """
    rs = math.sqrt(params.sigma)
    worst = 0.0
    for pt in samples:
        img = apply_symmetry(params, which, pt)
        g = pt.z / rs
        g_img = img.z / rs
        if which == "S1":
            res_g = abs(g_img + 1.0 / g)
            # pullback density: (1/w') * d(-sigma/z)/dz = -1/w
            res_p = abs((1.0 / img.w) * (params.sigma / pt.z ** 2) + 1.0 / pt.w)
        elif which == "S2":
            res_g = abs(g_img - np.conj(g))
            res_p = abs(1.0 / img.w + np.conj(1.0 / pt.w))
        elif which == "S3":
            res_g = abs(g_img - np.conj(g))
            res_p = abs(1.0 / img.w - np.conj(1.0 / pt.w))
        else:
            raise ValueError(f"unknown symmetry {which!r}")
        res_c = on_curve_residual(params, img)
        worst = max(worst, res_g, res_p, res_c)
    return worst


def gauss_ode_residual(params: CurveParams, pt: CurvePoint) -> float:
    """Defect of (g')^2 = g(sqrt(s)+g)(sqrt(s) g - 1) and the g'' relation.

    With phi3 = d(xi), the curve data gives g = z/sqrt(s), g' = w/sqrt(s)
    and g'' = p'(z)/(2 sqrt(s)); both displayed relations are algebraic
    consequences, so the residual measures how exactly (z, w) sits on the
    curve.
    """
    s = params.sigma
    rs = math.sqrt(s)
    g = pt.z / rs
    gp = pt.w / rs
    res1 = abs(gp ** 2 - g * (rs + g) * (rs * g - 1.0))
    z = pt.z
    gpp_curve = (3.0 * z ** 2 + 2.0 * (s - 1.0) * z - s) / (2.0 * rs)
    gpp_formula = -rs / 2.0 + (s - 1.0) * g + 1.5 * rs * g ** 2
    res2 = abs(gpp_curve - gpp_formula)
    return max(res1, res2)


def gauss_derivatives(params: CurveParams, pt: CurvePoint, order: int) -> np.ndarray:
    """(g, g', ..., g^(order)) at a regular point, in the phi3 = d(xi) chart.

    g'' = -sqrt(s)/2 + (s-1) g + (3 sqrt(s)/2) g^2 is differentiated
    repeatedly through the jet, so every entry is an exact polynomial in
    (g, g'); no finite differences.
    """
    s = params.sigma
    rs = math.sqrt(s)
    if pt.w == 0 or pt.z == 0:
        raise PoleOfGaussMap("jet needs a regular point")
    vals = np.zeros(order + 1, dtype=complex)
    vals[0] = pt.z / rs
    if order >= 1:
        vals[1] = pt.w / rs
    binom = [[math.comb(m, i) for i in range(m + 1)] for m in range(order + 1)]
    for k in range(2, order + 1):
        m = k - 2
        sq_m = sum(binom[m][i] * vals[i] * vals[m - i] for i in range(m + 1))
        vals[k] = (s - 1.0) * vals[m] + 1.5 * rs * sq_m
        if m == 0:
            vals[k] += -rs / 2.0
    return vals


def random_regular_points(params: CurveParams, n: int, rng,
                          r_min=None, r_max=None):
    """Seeded sample of regular curve points away from the branch points.

    z is drawn from an annulus around the branch set and both square-root
    sheets are used; rejection keeps 2x the default clearance from
    {0, 1, -sigma}.
    """
    scale = 0.5 * (1.0 + params.sigma)
    r_lo = 0.15 * scale if r_min is None else r_min
    r_hi = 1.6 * scale if r_max is None else r_max
    clear = 2.0 * default_clearance(params)
    pts = []
    bps = branch_points(params)
    while len(pts) < n:
        r = rng.uniform(r_lo, r_hi)
        th = rng.uniform(0.0, 2.0 * math.pi)
        z = r * np.exp(1j * th)
        if min(abs(z - bp) for bp in bps) < clear:
            continue
        w = np.sqrt(complex(curve_poly(params, z)))
        if rng.integers(0, 2):
            w = -w
        pts.append(CurvePoint(complex(z), complex(w)))
    return pts
