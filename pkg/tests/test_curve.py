import math

import numpy as np
import pytest

from riemann_minimal import checks, curve
from riemann_minimal.curve import (BranchAmbiguity, ClearanceViolation,
                                   CurveParams, CurvePoint, PoleOfGaussMap,
                                   WeierstrassForms)
from riemann_minimal.quad import ComplexPath


def dense_track(params, nodes, w0, steps=100000):
    """Brute-force sign tracking oracle for continue_w."""
    w = complex(w0)
    nodes = [complex(n) for n in nodes]
    for a, b in zip(nodes[:-1], nodes[1:]):
        for t in np.linspace(0.0, 1.0, steps)[1:]:
            z = a + (b - a) * t
            c = np.sqrt(complex(curve.curve_poly(params, z)))
            if abs(c - w) > abs(c + w):
                c = -c
            w = c
    return w


def circle(c, r, n=48, turns=1):
    ang = np.linspace(0, 2 * np.pi * turns, n * turns + 1)
    return list(c + r * np.exp(1j * ang))


def test_continue_straight_segment_against_dense_oracle():
    params = CurveParams(1.0)
    w = curve.continue_w(params, ComplexPath([2, 3]), math.sqrt(6.0))
    assert abs(w - math.sqrt(24.0)) < 1e-12
    oracle = dense_track(params, [2, 3], math.sqrt(6.0))
    assert abs(w - oracle) < 1e-10


def test_monodromy_single_and_double():
    params = CurveParams(1.0)
    w0 = np.sqrt(complex(curve.curve_poly(params, 1.5 + 0j)))
    # loop around z=1 only: sign flips
    w1 = curve.continue_w(params, ComplexPath(circle(1.0, 0.5 + 0j, 64)),
                          np.sqrt(complex(curve.curve_poly(params, 1.5))))
    assert abs(w1 + np.sqrt(complex(curve.curve_poly(params, 1.5)))) < 1e-9
    # loop around both 0 and 1: two flips cancel (radius clears -sigma = -1)
    start = 0.5 + 1.2
    w_start = np.sqrt(complex(curve.curve_poly(params, start)))
    w2 = curve.continue_w(params, ComplexPath(circle(0.5, 1.2, 96)), w_start)
    assert abs(w2 - w_start) < 1e-9


def test_branch_round_trip_identity():
    params = CurveParams(2.0)
    nodes = [2.0, 1.5 + 1.2j, -0.5 + 1.5j, 0.4 + 0.4j]
    path = ComplexPath(nodes + nodes[-2::-1])
    w0 = math.sqrt(2.0 * 1.0 * 4.0)  # p(2) with sigma = 2
    w = curve.continue_w(params, path, w0)
    assert abs(w - w0) < 1e-10 * abs(w0)


def test_clearance_violation():
    params = CurveParams(2.0)
    with pytest.raises(ClearanceViolation):
        curve.continue_w(params, ComplexPath([2.0, 1.0001, 2.0 + 1j]),
                         math.sqrt(8.0))


def test_branch_ambiguity_on_zero_crossing():
    # the clearance gate protects the public entry points, so exercise the
    # stepper directly on a segment that crosses w = 0
    params = CurveParams(2.0)
    w0 = np.sqrt(complex(curve.curve_poly(params, 0.5)))
    with pytest.raises(BranchAmbiguity):
        curve._SegmentBranch(params, 0.5, 1.5, w0)
    with pytest.raises(BranchAmbiguity):
        curve._SegmentBranch(params, 1.0, 2.0, 0.0)  # starting at w = 0


def test_nonclosing_loop_rejected():
    # a single circle around one branch point flips w: not a closed lift
    params = CurveParams(2.0)
    with pytest.raises(BranchAmbiguity):
        curve._make_loop(params, "bogus", 1.0, 0.4, 48, turns=1)


def test_immerse_identity_and_round_trip():
    params = CurveParams(2.0)
    base = curve.basepoint(params)
    pos, end = curve.immerse(params, ComplexPath([base.z]), base.w,
                             (1.0, 2.0, 3.0))
    assert np.allclose(pos, [1, 2, 3])
    nodes = [base.z, 1.5 + 0.8j, 0.3 + 1.1j]
    path = ComplexPath(nodes + nodes[-2::-1])
    pos, end = curve.immerse(params, path, base.w, (0.0, 0.0, 0.0))
    assert np.max(np.abs(pos)) < 1e-8
    assert abs(end.w - base.w) < 1e-9


def test_immerse_line_property_on_unit_segment():
    # sigma = 2: points of (0,1) all map to a line parallel to the x2-axis
    params = CurveParams(2.0)
    base = curve.basepoint(params)
    rho = curve.BASEPOINT_OFFSET
    arc = [1.0 + rho * np.exp(1j * th) for th in np.linspace(0, np.pi, 7)]
    imgs = []
    for target in (0.8, 0.55, 0.3, 0.12):
        pos, _ = curve.immerse(params, ComplexPath(arc + [target]), base.w)
        imgs.append(pos)
    imgs = np.array(imgs)
    assert np.ptp(imgs[:, 0]) < 1e-6
    assert np.ptp(imgs[:, 2]) < 1e-6
    assert np.ptp(imgs[:, 1]) > 0.1


def test_gauss_map_values():
    assert np.allclose(curve.gauss_map(WeierstrassForms.from_g(1.0)),
                       [1, 0, 0], atol=1e-14)
    assert np.allclose(curve.gauss_map(WeierstrassForms.from_g(1j)),
                       [0, 1, 0], atol=1e-14)
    # sigma = 4 at the branch point (1, 0): g = 1/2
    n = curve.gauss_map(WeierstrassForms.from_g(0.5))
    assert np.allclose(n, [0.8, 0.0, -0.6], atol=1e-14)
    assert abs(np.linalg.norm(n) - 1.0) < 1e-12
    with pytest.raises(PoleOfGaussMap):
        WeierstrassForms.from_g(0.0)


def test_gaussian_curvature_values_and_catenoid_oracle():
    forms = WeierstrassForms.from_g(1.0)
    assert curve.gaussian_curvature(forms, 0.0) == 0.0
    # catenoid neck normalization g = e^xi, phi3 = d(xi): K(0) = -1
    assert abs(curve.gaussian_curvature(forms, 1.0) + 1.0) < 1e-14
    # oracle: FD fundamental forms of the catenoid immersion built from the
    # Weierstrass integrals with g = e^xi
    def X(xi):
        # X = Re int (phi1, phi2, phi3) d xi from 0, closed forms:
        # phi1 = (e^-xi - e^xi)/2 = -sinh xi, phi2 = i cosh xi, phi3 = 1
        return np.array([(-np.cosh(xi) + 1).real,
                         (1j * np.sinh(xi)).real, xi.real])

    h = 1e-5

    def sample(i, j):
        return X(complex(i * h, j * h))

    H, conf, orth = checks.fd_surface_checks(sample, h)
    # second fundamental form based curvature: K = (eg - f^2)/(EG - F^2)
    Xc = sample(0, 0)
    Xu = (sample(1, 0) - sample(-1, 0)) / (2 * h)
    Xv = (sample(0, 1) - sample(0, -1)) / (2 * h)
    Xuu = (sample(1, 0) - 2 * Xc + sample(-1, 0)) / h ** 2
    Xvv = (sample(0, 1) - 2 * Xc + sample(0, -1)) / h ** 2
    Xuv = (sample(1, 1) - sample(1, -1) - sample(-1, 1) + sample(-1, -1)) / (4 * h ** 2)
    nrm = np.cross(Xu, Xv)
    nrm /= np.linalg.norm(nrm)
    E, F, G = Xu @ Xu, Xu @ Xv, Xv @ Xv
    e, f, g = Xuu @ nrm, Xuv @ nrm, Xvv @ nrm
    K_fd = (e * g - f * f) / (E * G - F * F)
    assert abs(K_fd + 1.0) < 1e-4
    # asymptotic flatness
    assert abs(curve.gaussian_curvature(WeierstrassForms.from_g(1e8), 1e8)) < 1e-15


def test_periods_and_flux_sigma2():
    params = CurveParams(2.0)
    g1 = curve.gamma1_loop(params)
    p1 = curve.period(params, g1)
    assert np.max(np.abs(p1.real)) < 1e-7
    # frozen regression baseline for the gamma1 flux (= Im of the period)
    f1 = curve.flux(params, g1)
    assert np.allclose(f1, [-1.34413627, 0.0, 4.00430952], atol=1e-6)
    g2 = curve.gamma2_loop(params)
    p2 = curve.period(params, g2)
    assert abs(p2.real[1]) < 1e-7
    assert np.allclose(p2.real, [2.86524775, 0.0, 4.68568034], atol=1e-6)
    # flux of the translation class vanishes (period is purely real)
    assert np.max(np.abs(curve.flux(params, g2))) < 1e-7


def test_period_double_traversal_scales():
    params = CurveParams(0.8)
    loop = curve.gamma1_loop(params)
    double = curve.HomologyLoop("gamma1", loop.base, ComplexPath(
        loop.geometry.nodes + loop.geometry.nodes[1:],
        clearance=loop.geometry.clearance))
    p1 = curve.period(params, loop)
    p2 = curve.period(params, double)
    assert np.max(np.abs(p2 - 2 * p1)) < 1e-8


def test_flux_end_loop_and_reversal():
    params = CurveParams(2.0)
    el = curve.end_loop(params)
    assert np.max(np.abs(curve.flux(params, el))) < 1e-7
    # the other planar end (z = infinity) carries nothing either
    el_inf = curve.end_loop(params, which="infinity")
    assert np.max(np.abs(curve.period(params, el_inf))) < 1e-7
    g1 = curve.gamma1_loop(params)
    rev = curve.HomologyLoop("gamma1", curve.CurvePoint(
        g1.geometry.nodes[-1], g1.base.w), g1.geometry.reversed())
    assert np.max(np.abs(curve.flux(params, rev)
                         + curve.flux(params, g1))) < 1e-8


def test_apply_symmetry():
    params = CurveParams(1.0)
    pt = curve.make_point(params, 2.0, math.sqrt(6.0))
    s2 = curve.apply_symmetry(params, "S2", pt)
    assert s2.z == 2.0 and abs(s2.w + math.sqrt(6.0)) < 1e-15
    twice = curve.apply_symmetry(params, "S1",
                                 curve.apply_symmetry(params, "S1", pt))
    assert abs(twice.z - pt.z) < 1e-12 and abs(twice.w - pt.w) < 1e-12
    # S1 fixes z = i sqrt(sigma)
    sig = 3.0
    params3 = CurveParams(sig)
    zfix = 1j * math.sqrt(sig)
    pfix = CurvePoint(zfix, np.sqrt(complex(curve.curve_poly(params3, zfix))))
    img = curve.apply_symmetry(params3, "S1", pfix)
    assert abs(img.z - zfix) < 1e-14


@pytest.mark.parametrize("which", ["S1", "S2", "S3"])
def test_symmetry_action_residuals(which):
    params = CurveParams(3.0)
    rng = np.random.default_rng(11)
    pts = curve.random_regular_points(params, 50, rng)
    assert curve.verify_symmetry_action(params, which, pts) < 1e-9


def test_gauss_ode_residual():
    params = CurveParams(1.0)
    pt = curve.make_point(params, 2.0, math.sqrt(6.0))
    assert curve.gauss_ode_residual(params, pt) < 1e-12
    params2 = CurveParams(2.0)
    rng = np.random.default_rng(5)
    pts = curve.random_regular_points(params2, 100, rng)
    assert max(curve.gauss_ode_residual(params2, p) for p in pts) < 1e-9
    bp = CurvePoint(1.0 + 0.0j, 0.0 + 0.0j)
    assert curve.gauss_ode_residual(params2, bp) < 1e-15


def test_conformality_and_harmonicity():
    H, conf, orth = checks.weierstrass_fd_grid(2.0, n_side=4, h=1e-4)
    assert conf < 1e-5 and orth < 1e-5
    lap = checks.weierstrass_laplacian_grid(2.0, n_side=3, h=1e-3)
    assert lap < 1e-4


def test_double_zero_of_g_at_end():
    # local expansion of g at (0,0) in the local coordinate w has vanishing
    # constant and linear coefficients
    params = CurveParams(2.0)
    rho = 1e-2
    nodes = circle(0.0, rho, 48, turns=2)
    w = np.sqrt(complex(curve.curve_poly(params, nodes[0])))
    taus, gs = [], []
    for a, b in zip(nodes[:-1], nodes[1:]):
        w = curve.continue_w(params, ComplexPath([a, b], clearance=rho / 2), w)
        taus.append(w)
        gs.append(b / math.sqrt(params.sigma))
    A = np.column_stack([np.ones(len(taus)), taus, np.square(taus)])
    coef, *_ = np.linalg.lstsq(A, np.array(gs), rcond=None)
    scale = abs(coef[2]) * rho  # comparable magnitude of the quadratic term
    assert abs(coef[0]) < 1e-6 * scale
    assert abs(coef[1]) < 1e-6 * scale


def test_make_point_validation():
    params = CurveParams(2.0)
    with pytest.raises(ValueError):
        curve.make_point(params, 2.0, 1.0)
    with pytest.raises(PoleOfGaussMap):
        curve.weierstrass_at(params, CurvePoint(1.0 + 0j, 0.0 + 0j))


def test_weierstrass_forms_null_quadric():
    # phi1^2 + phi2^2 + phi3^2 = 0 at random regular points
    params = CurveParams(3.0)
    rng = np.random.default_rng(8)
    for pt in curve.random_regular_points(params, 30, rng):
        f = curve.weierstrass_at(params, pt)
        s = f.phi1_density ** 2 + f.phi2_density ** 2 + f.phi3_density ** 2
        assert abs(s) < 1e-9 * abs(f.phi3_density) ** 2
