import math

import numpy as np
import pytest

from riemann_minimal import curve, mesh
from riemann_minimal.mesh import (Degenerate, DomainMap,
                                  FundamentalSurface, IsometryOp, TriMesh,
                                  extend, extension_ops, export_obj,
                                  export_ply, level_circle_fit, parse_obj,
                                  parse_ply, refine_slice, sample_fundamental,
                                  slice_mesh, weld)


@pytest.fixture(scope="module")
def surf2():
    return FundamentalSurface(2.0)


@pytest.fixture(scope="module")
def fund2(surf2):
    return sample_fundamental(2.0, 0.1, 14, 20, surface=surf2)


@pytest.fixture(scope="module")
def ops2(surf2):
    return extension_ops(2.0, surface=surf2)


# --- Moebius domain map validation (the formula is checked, not trusted) ----


@pytest.mark.parametrize("sigma,e", [(2.0, 0.1), (0.5, 0.2), (5.0, 0.05)])
def test_domain_map_boundary_arcs(sigma, e):
    dm = DomainMap(sigma, e)
    th = np.linspace(0, math.pi, 33)
    # outer half circle onto the boundary circle of Omega_sigma
    outer = dm.map(np.exp(1j * th))
    assert np.max(np.abs(np.abs(outer - (1 - sigma) / 2) - (1 + sigma) / 2)) < 1e-9
    assert abs(dm.map(1.0) - 1.0) < 1e-12
    assert abs(dm.map(-1.0) + sigma) < 1e-11 * (1 + sigma)
    # radial segments onto the real segments [0,1] and [-sigma, 0]
    rr = np.linspace(e, 1.0, 17)
    right = dm.map(rr)
    left = dm.map(-rr)
    assert np.max(np.abs(right.imag)) < 1e-12
    assert np.all((right.real > 0) & (right.real <= 1 + 1e-12))
    assert np.max(np.abs(left.imag)) < 1e-12
    assert np.all((left.real < 0) & (left.real >= -sigma - 1e-9))
    # inner half circle onto a circle centered exactly at the origin
    inner = dm.map(e * np.exp(1j * th))
    r0 = dm.end_radius()
    assert np.max(np.abs(np.abs(inner) - r0)) < 1e-9
    assert 0.0 < r0 < 1.0
    # upper half plane preserved, inverse round-trips
    zz = 0.3 * np.exp(1j * np.linspace(0.2, 2.8, 9)) + 0.2
    assert np.all(dm.map(zz).imag > 0)
    assert np.max(np.abs(dm.inverse(dm.map(zz)) - zz)) < 1e-10


def test_domain_map_validation():
    with pytest.raises(ValueError):
        DomainMap(2.0, 1.5)
    with pytest.raises(ValueError):
        DomainMap(-1.0, 0.1)


# --- fundamental sampling -----------------------------------------------------


def test_fundamental_grid_basics(fund2, surf2):
    nr, nt = 14, 20
    assert fund2.vertex_count == nr * nt
    assert fund2.face_count == (nr - 1) * (nt - 1) * 2
    # the grid corner on z = 1 maps to the origin by construction
    corner = fund2.vertices[(nr - 1) * nt + 0]
    assert np.allclose(corner, 0.0)
    # the t = 0 column is the straight line: x1 and x3 frozen, x2 sweeping
    col = fund2.vertices[[j * nt for j in range(nr)]]
    assert np.ptp(col[:, 0]) < 1e-6
    assert np.ptp(col[:, 2]) < 1e-6
    assert np.ptp(col[:, 1]) > 0.05
    # the t = 1 column is the planar geodesic in {x2 = 0}
    geo = fund2.vertices[[j * nt + (nt - 1) for j in range(nr)]]
    assert np.max(np.abs(geo[:, 1])) < 1e-7
    # normals are unit and consistent with face orientation
    assert np.max(np.abs(np.linalg.norm(fund2.normals, axis=1) - 1)) < 1e-12
    v = fund2.vertices
    for f in fund2.faces[::7]:
        fn = np.cross(v[f[1]] - v[f[0]], v[f[2]] - v[f[0]])
        nfn = np.linalg.norm(fn)
        if nfn < 1e-12:
            continue
        assert fn @ fund2.normals[f[0]] > 0


def test_fundamental_slab_confinement(fund2, surf2):
    t0 = surf2.translation_half()
    x3 = fund2.vertices[:, 2]
    assert abs((x3.max() - x3.min()) - abs(t0[2])) < 1e-8


def test_extension_ops_structure(surf2, ops2):
    op1, op2, op3, op4 = ops2
    # involutions and the translation
    assert np.allclose(op1.linear @ op1.linear, np.eye(3))
    assert np.allclose(op1.apply(op1.apply(np.array([[0.3, 1.2, -0.7]]))),
                       [[0.3, 1.2, -0.7]], atol=1e-12)
    c = surf2.psi_fixed_point()
    # op1 fixes the fixed point and the x2-line through it
    assert np.max(np.abs(op1.apply(c[None, :]) - c)) < 1e-12
    probe = c + np.array([0.0, 3.7, 0.0])
    assert np.max(np.abs(op1.apply(probe[None, :]) - probe)) < 1e-12
    assert np.allclose(op2.linear, np.diag([1.0, -1.0, 1.0]))
    assert np.allclose(op3.linear, np.diag([-1.0, 1.0, -1.0]))
    t0 = surf2.translation_half()
    assert np.allclose(op4.offset, 2 * t0)
    assert np.allclose(op4.linear, np.eye(3))
    # the fixed point sits at half the translation
    assert np.allclose(c[[0, 2]], t0[[0, 2]] / 2.0, atol=1e-9)
    assert abs(t0[1]) < 1e-9


def test_translation_matches_gamma2_period(surf2, ops2):
    params = curve.CurveParams(2.0)
    per = curve.period(params, curve.gamma2_loop(params))
    assert np.max(np.abs(ops2[3].offset - per.real)) < 1e-8


def test_t0_sqrt_epsilon_extrapolation(surf2):
    # psi approaches its boundary value like sqrt(eps); two evaluations near
    # -sigma extrapolate to the exact singular-end quadrature value
    t0 = surf2.translation_half()
    x1 = surf2.psi_left(-2.0 + 1e-5)
    x2 = surf2.psi_left(-2.0 + 1e-6)
    s1, s2 = math.sqrt(1e-5), math.sqrt(1e-6)
    extrap = x2 - (x1 - x2) * s2 / (s1 - s2)
    assert np.max(np.abs(x1 - x2)) > 5e-4   # raw values are NOT stable
    assert np.max(np.abs(extrap - t0)) < 1e-4


def test_extend_counts_and_isometry(fund2, ops2):
    ext0 = extend(fund2, ops2, copies=0)
    assert ext0.vertex_count == fund2.vertex_count * 8
    ext1 = extend(fund2, ops2, copies=1)
    assert ext1.vertex_count == fund2.vertex_count * 16
    # distances preserved by every op
    rng = np.random.default_rng(3)
    idx = rng.integers(0, fund2.vertex_count, size=(20, 2))
    for op in ops2:
        a = op.apply(fund2.vertices)
        for i, j in idx:
            d0 = np.linalg.norm(fund2.vertices[i] - fund2.vertices[j])
            d1 = np.linalg.norm(a[i] - a[j])
            assert abs(d1 - d0) <= 1e-10 * max(d0, 1.0)


def test_extend_shared_boundary_and_periodicity(fund2, ops2, surf2):
    nt = 20
    # step-2 mirror: the plane geodesic column lies in {x2=0}, so mirrored
    # copies coincide there
    m1 = extend(fund2, ops2[:1], copies=0)  # only op1 doubling
    geo_idx = [j * nt + (nt - 1) for j in range(14)]
    geo = fund2.vertices[geo_idx]
    mirrored = ops2[1].apply(geo)
    assert np.max(np.abs(mirrored - geo)) < 1e-7
    # translated copy sits exactly at vertex + 2 t0 (bitwise construction)
    ext1 = extend(fund2, ops2, copies=1)
    n8 = fund2.vertex_count * 8
    expect = ext1.vertices[:n8] + ops2[3].offset
    assert np.array_equal(ext1.vertices[n8:], expect)


def test_extended_slab_growth(fund2, ops2):
    span = abs(ops2[3].offset[2]) / 2.0
    m3 = extend(fund2, ops2, copies=0)
    x3 = m3.vertices[:, 2]
    assert abs((x3.max() - x3.min()) - 2 * span) < 1e-8


# --- circle fitting -----------------------------------------------------------


def test_circle_fit_exact_circle():
    th = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    pts = np.stack([1.3 + 2.0 * np.cos(th), -0.4 + 2.0 * np.sin(th),
                    np.full_like(th, 0.7)], axis=1)
    fit = level_circle_fit(pts)
    assert fit.kind == "circle"
    assert abs(fit.radius - 2.0) < 1e-12
    assert np.allclose(fit.center, [1.3, -0.4], atol=1e-12)
    assert fit.residual < 1e-12


def test_circle_fit_line_and_degenerate():
    t = np.linspace(-1, 1, 9)
    pts = np.stack([0.5 + t, 2.0 * t, np.zeros_like(t)], axis=1)
    fit = level_circle_fit(pts)
    assert fit.kind == "line"
    assert fit.residual < 1e-12
    with pytest.raises(Degenerate):
        level_circle_fit(np.tile([1.0, 2.0, 0.0], (6, 1)))
    with pytest.raises(ValueError):
        level_circle_fit(pts[:4])
    bad = pts.copy()
    bad[0, 2] = 0.5
    with pytest.raises(ValueError):
        level_circle_fit(bad)


def test_classical_slice_fits_circle():
    from riemann_minimal import classical
    p = classical.RiemannParams.from_lambda(1.0)
    q = p.q1 + 0.9
    pts = np.array([classical.parameterize(p, q, v)
                    for v in np.linspace(0, 2 * np.pi, 16, endpoint=False)])
    fit = level_circle_fit(pts)
    assert fit.kind == "circle"
    assert abs(fit.radius - math.sqrt(q)) < 1e-9
    assert fit.residual < 1e-10


def test_refined_slice_is_exact_circle(fund2, ops2, surf2):
    ext = extend(fund2, ops2, copies=0)
    h = 0.45 * surf2.translation_half()[2]
    coarse, _ = slice_mesh(ext, h)
    assert len(coarse) >= 5
    fit_c = level_circle_fit(coarse)
    pts = refine_slice(ext, h, surf2, max_points=24)
    fit = level_circle_fit(pts)
    assert fit.kind == "circle"
    assert fit.residual < 1e-5 * fit.radius
    # the coarse fit agrees at mesh-chord accuracy
    assert abs(fit_c.radius - fit.radius) < 5e-2 * fit.radius


# --- export -------------------------------------------------------------------


def tiny_mesh():
    return TriMesh(
        vertices=np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1.0, 0]]),
        normals=np.array([[0.0, 0, 1], [0.0, 0, 1], [0.0, 0, 1]]),
        faces=np.array([[0, 1, 2]], dtype=np.int32),
    )


def test_export_obj_structure(tmp_path):
    p = tmp_path / "m.obj"
    n = export_obj(tiny_mesh(), p)
    text = p.read_text().splitlines()
    assert n == len(p.read_bytes())
    assert sum(1 for l in text if l.startswith("v ")) == 3
    assert sum(1 for l in text if l.startswith("vn ")) == 3
    assert sum(1 for l in text if l.startswith("f ")) == 1
    assert text[-1] == "f 1//1 2//2 3//3"


def test_export_round_trip_and_determinism(tmp_path, fund2):
    p1 = tmp_path / "a.obj"
    p2 = tmp_path / "b.obj"
    export_obj(fund2, p1)
    export_obj(fund2, p2)
    assert p1.read_bytes() == p2.read_bytes()
    back = parse_obj(p1)
    scale = np.max(np.abs(fund2.vertices))
    assert np.max(np.abs(back.vertices - fund2.vertices)) < 1e-8 * max(scale, 1)
    assert np.array_equal(back.faces, fund2.faces)
    q1 = tmp_path / "a.ply"
    q2 = tmp_path / "b.ply"
    export_ply(fund2, q1)
    export_ply(fund2, q2)
    assert q1.read_bytes() == q2.read_bytes()
    back = parse_ply(q1)
    assert np.max(np.abs(back.vertices - fund2.vertices)) < 1e-6 * max(scale, 1)
    assert np.array_equal(back.faces, fund2.faces)


def test_weld_merges_duplicates():
    m = tiny_mesh()
    doubled = TriMesh(
        vertices=np.vstack([m.vertices, m.vertices + 1e-12]),
        normals=np.vstack([m.normals, m.normals]),
        faces=np.array([[0, 1, 2], [3, 4, 5]], dtype=np.int32),
    )
    w = weld(doubled, tol=1e-8)
    assert w.vertex_count == 3
    assert w.face_count == 2


def test_isometry_validation():
    with pytest.raises(ValueError):
        IsometryOp(np.diag([2.0, 1.0, 1.0]), np.zeros(3))


def test_grid_warp_exponent(surf2):
    # the near-end remedy for extreme sigma: warping the angular grid keeps
    # the construction valid (corner still pinned to the origin)
    m = sample_fundamental(2.0, 0.1, 8, 12, warp=1.4, surface=surf2)
    nr, nt = 8, 12
    assert np.allclose(m.vertices[(nr - 1) * nt], 0.0)
    assert m.vertex_count == nr * nt
