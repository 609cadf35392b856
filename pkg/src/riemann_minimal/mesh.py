"""Fundamental-piece sampling, reflection extension, and mesh export.

The half-annulus {e <= |zeta| <= 1, Im zeta >= 0} is carried by an explicit
Moebius map onto the fundamental domain

    Omega_sigma = { |z - (1-sigma)/2| <= (1+sigma)/2, Im z >= 0 }

minus a round neighborhood of the end z = 0 (the image of |zeta| = e is a
circle exactly centered at the origin; the smaller e, the more of the end
is kept).  The immersion is evaluated by branch-continuous path integration
that marches the grid row by row from a single base point, so the whole
patch lives on one sheet.  The two grid corners that land on the branch
points z = 1 and z = -sigma are integrated with an exact quadratic
reparameterization of the final segment.

The surface is then grown by the four-step symmetry pipeline: 180-degree
rotation about the horizontal line through psi(i sqrt(sigma)), reflection
in {x2 = 0}, 180-degree rotation about the x2-axis, and translation by
multiples of 2*t0 with t0 = psi(-sigma).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import curve as _curve
from .curve import BASEPOINT_OFFSET, CurveParams, CurvePoint
from .quad import ComplexPath, QuadSettings

__all__ = [
    "DegenerateCell", "Degenerate", "DomainMap", "TriMesh", "IsometryOp",
    "FundamentalSurface", "sample_fundamental", "extension_ops", "extend",
    "CircleFit", "level_circle_fit", "slice_mesh", "refine_slice",
    "export_obj", "export_ply", "parse_obj", "parse_ply", "weld",
]


class DegenerateCell(Exception):
    """Adjacent grid samples coincide."""


class Degenerate(Exception):
    """Point set spans fewer than two dimensions."""


@dataclass(frozen=True)
class DomainMap:
    """Moebius map of the half-annulus onto Omega_sigma minus the end disk.

    The rational-coefficient formula below was validated against the
    boundary arcs rather than trusted: it sends |zeta|=1 onto the circle
    |z-(1-sigma)/2| = (1+sigma)/2 with f(1)=1 and f(-1)=-sigma, the real
    segments [e,1] and [-1,-e] into [0,1] and [-sigma,0], and |zeta|=e onto
    a circle centered exactly at the origin (see tests).
    """

    sigma: float
    e: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.e < 1.0:
            raise ValueError("e must lie in (0, 1)")

    def _R(self):
        a, e = self.sigma, self.e
        return math.sqrt(4.0 * (a - 1.0) ** 2 * e ** 2
                         + (1.0 + a) ** 2 * (e ** 2 - 1.0) ** 2)

    def map(self, zeta):
        a, e = self.sigma, self.e
        R = self._R()
        zeta = np.asarray(zeta, dtype=complex)
        num = (-a * a * (1 + e * e) * (zeta - 1.0) - 2.0 * a * (e * e - 3.0) * zeta
               - (1 + e * e) * (1.0 + zeta) + R * (1.0 + a * (zeta - 1.0) + zeta))
        den = 2.0 * R - 2.0 * ((1.0 + a) * (e * e - 1.0) - 2.0 * (a - 1.0) * zeta)
        return num / den

    def inverse(self, z):
        a, e = self.sigma, self.e
        R = self._R()
        z = np.asarray(z, dtype=complex)
        # invert the linear-fractional map (A zeta + B)/(C zeta + D)
        A = -a * a * (1 + e * e) - 2.0 * a * (e * e - 3.0) - (1 + e * e) + R * (1.0 + a)
        B = a * a * (1 + e * e) - (1 + e * e) + R * (1.0 - a)
        C = 4.0 * (a - 1.0)
        D = 2.0 * R - 2.0 * (1.0 + a) * (e * e - 1.0)
        return (D * z - B) / (A - C * z)

    def end_radius(self) -> float:
        """Radius of the image of |zeta| = e (the end-truncation circle)."""
        return float(abs(self.map(self.e)))


@dataclass(frozen=True)
class IsometryOp:
    """Affine isometry v -> linear @ v + offset with orthogonal linear part."""

    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.linear, dtype=float)
        b = np.asarray(self.offset, dtype=float)
        if L.shape != (3, 3) or b.shape != (3,):
            raise ValueError("linear must be 3x3 and offset length 3")
        if np.max(np.abs(L @ L.T - np.eye(3))) > 1e-12:
            raise ValueError("linear part is not orthogonal to 1e-12")
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "offset", b)

    def apply(self, pts):
        return np.asarray(pts) @ self.linear.T + self.offset

    def apply_normals(self, normals):
        return float(np.linalg.det(self.linear)) * (np.asarray(normals)
                                                    @ self.linear.T)

    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    def compose(self, other: "IsometryOp") -> "IsometryOp":
        """self after other: v -> self(other(v))."""
        return IsometryOp(self.linear @ other.linear,
                          self.linear @ other.offset + self.offset)


def identity_op() -> IsometryOp:
    return IsometryOp(np.eye(3), np.zeros(3))


@dataclass
class TriMesh:
    """Oriented triangle mesh with per-vertex normals.

    Besides the geometric payload, each vertex remembers the domain
    parameter z it was sampled at, the branch value w there, its exact
    position on the fundamental piece, and which composed isometry (index
    into ``op_catalog``) produced it.  That provenance is what makes exact
    slice refinement possible after extension.
    """

    vertices: np.ndarray
    normals: np.ndarray
    faces: np.ndarray
    provenance: list = field(default_factory=list)
    domain_z: np.ndarray | None = None
    domain_w: np.ndarray | None = None
    fundamental_xyz: np.ndarray | None = None
    op_index: np.ndarray | None = None
    op_catalog: list = field(default_factory=lambda: [identity_op()])

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)


def _transform(mesh: TriMesh, op: IsometryOp, tag: str) -> TriMesh:
    flip = op.det() < 0
    faces = mesh.faces[:, ::-1].copy() if flip else mesh.faces.copy()
    return TriMesh(
        vertices=op.apply(mesh.vertices),
        normals=op.apply_normals(mesh.normals),
        faces=faces,
        provenance=[(s, f"{p}*{tag}") for (s, p) in mesh.provenance],
        domain_z=None if mesh.domain_z is None else mesh.domain_z.copy(),
        domain_w=None if mesh.domain_w is None else mesh.domain_w.copy(),
        fundamental_xyz=(None if mesh.fundamental_xyz is None
                         else mesh.fundamental_xyz.copy()),
        op_index=None if mesh.op_index is None else mesh.op_index.copy(),
        op_catalog=[op.compose(a) for a in mesh.op_catalog],
    )


def _concat(a: TriMesh, b: TriMesh) -> TriMesh:
    off = a.vertex_count
    cat_off = len(a.op_catalog)
    aux = {}
    for name in ("domain_z", "domain_w", "fundamental_xyz"):
        va, vb = getattr(a, name), getattr(b, name)
        aux[name] = None if va is None or vb is None else np.concatenate([va, vb])
    if a.op_index is None or b.op_index is None:
        opi = None
    else:
        opi = np.concatenate([a.op_index, b.op_index + cat_off])
    return TriMesh(
        vertices=np.vstack([a.vertices, b.vertices]),
        normals=np.vstack([a.normals, b.normals]),
        faces=np.vstack([a.faces, b.faces + off]),
        provenance=a.provenance + b.provenance,
        domain_z=aux["domain_z"],
        domain_w=aux["domain_w"],
        fundamental_xyz=aux["fundamental_xyz"],
        op_index=opi,
        op_catalog=a.op_catalog + b.op_catalog,
    )


# ---------------------------------------------------------------------------
# fundamental piece


def _marching_path(params, nodes):
    """Path for an internal marching chord; its clearance is whatever the
    chord actually achieves (the grid legitimately approaches the corner
    branch points), capped by the module default."""
    pth = ComplexPath(nodes)
    d = pth.min_distance_to(_curve.branch_points(params))
    clear = min(_curve.default_clearance(params), 0.45 * d) if d > 0 else 0.0
    return ComplexPath(nodes, clearance=max(clear, 0.0))


class FundamentalSurface:
    """Immersion machinery anchored at the shared base point.

    All paths start from the curve base point (1 + 1e-2 with w > 0), enter
    the domain through a small arc over the branch point z = 1, and land at
    ``entry`` = 1 - 1e-2 on the real axis; everything else is reached from
    there, so the whole construction lives on a single branch sheet.
    """

    def __init__(self, sigma: float, settings: QuadSettings | None = None):
        self.params = CurveParams(sigma)
        self.settings = settings or QuadSettings()
        base = _curve.basepoint(self.params)
        rho = BASEPOINT_OFFSET
        arc = [1.0 + rho * np.exp(1j * th)
               for th in np.linspace(0.0, math.pi, 7)]
        pos, pt = _curve.immerse(self.params, _marching_path(self.params, arc),
                                 base.w, (0.0, 0.0, 0.0), self.settings)
        self.entry_pos = pos
        self.entry_pt = pt  # z = 1 - rho, continued w

    def _immerse_from(self, start_pos, start_pt, nodes):
        path = _marching_path(self.params, [start_pt.z] + list(nodes))
        return _curve.immerse(self.params, path, start_pt.w, start_pos,
                              self.settings)

    def psi_fixed_point(self):
        """X(i sqrt(sigma)) - X(1); the S1 fixed point, relative to the
        line point at the origin."""
        target = 1j * math.sqrt(self.params.sigma)
        pos, _ = self._immerse_from(self.entry_pos, self.entry_pt, [target])
        return pos - self.x_at_one()

    def psi_left(self, x: float):
        """psi on the left real boundary, x in (-sigma, -end-ish]; the path
        hops over the end at 0 through the upper half plane."""
        s = self.params.sigma
        if not (-s <= x < 0):
            raise ValueError("psi_left expects x in [-sigma, 0)")
        r0 = 0.3 * min(1.0, s)
        arc = [r0 * np.exp(1j * th) for th in np.linspace(0.0, math.pi, 9)]
        nodes = [0.5 + 0.0j] + arc
        if abs(x - arc[-1]) > 0:
            nodes.append(x + 0.0j)
        pos, pt = self._immerse_from(self.entry_pos, self.entry_pt, nodes)
        return pos - self.x_at_one()

    def x_at_one(self):
        """X at the branch point z = 1 (singular-end integration), cached."""
        if not hasattr(self, "_x_one"):
            pos, _ = self._immerse_from(self.entry_pos, self.entry_pt,
                                        [1.0 + 0.0j])
            self._x_one = pos
        return self._x_one

    def translation_half(self):
        """t0 = psi(-sigma) = X(-sigma) - X(1), via exact singular-end
        quadrature at both branch points."""
        return self.psi_left(-self.params.sigma)


def sample_fundamental(sigma: float, e: float, nr: int, nt: int,
                       warp: float = 1.0,
                       settings: QuadSettings | None = None,
                       surface: FundamentalSurface | None = None) -> TriMesh:
    """Sample psi = X - X(1) on the image of an nr x nt polar grid.

    Grid: r in linspace(e, 1, nr), t in linspace(0, 1, nt), z through the
    Moebius map of r*exp(i pi t^warp).  The warp exponent is the remedy for
    inhomogeneous meshes at extreme sigma (default 1).  Marching order: the
    t = 0 column is walked down the real axis from the entry point, each
    row is walked in t, the outer row is reached radially, and the two
    corner vertices on the branch points use exact singular-end segments.
    """
    if surface is None:
        surface = FundamentalSurface(sigma, settings)
    params = surface.params
    dm = DomainMap(sigma, e)
    if nr < 2 or nt < 2:
        raise ValueError("need nr, nt >= 2")

    rr = np.linspace(e, 1.0, nr)
    tt = np.linspace(0.0, 1.0, nt)
    zeta = rr[:, None] * np.exp(1j * math.pi * tt[None, :] ** warp)
    Z = dm.map(zeta)
    # exact corner values (the Moebius formula is exact there up to roundoff)
    Z[nr - 1, 0] = 1.0
    Z[nr - 1, nt - 1] = -sigma

    if (np.min(np.abs(np.diff(Z, axis=1))) == 0.0
            or np.min(np.abs(np.diff(Z, axis=0))) == 0.0):
        raise DegenerateCell("adjacent grid samples coincide")

    X = np.zeros((nr, nt, 3))
    W = np.zeros((nr, nt), dtype=complex)

    # t = 0 column (real axis, descending from the entry point)
    order = np.argsort(-Z[:nr - 1, 0].real)
    pos, pt = surface.entry_pos, surface.entry_pt
    for j in order:
        pos, end = surface._immerse_from(pos, pt, [Z[j, 0]])
        pt = end
        X[j, 0] = pos
        W[j, 0] = end.w

    # interior rows
    for j in range(nr - 1):
        pos = X[j, 0].copy()
        pt = CurvePoint(Z[j, 0], W[j, 0])
        for k in range(1, nt):
            pos, pt = surface._immerse_from(pos, pt, [Z[j, k]])
            X[j, k] = pos
            W[j, k] = pt.w

    # outer row, radially from the row below
    for k in range(1, nt - 1):
        pos, pt = surface._immerse_from(
            X[nr - 2, k], CurvePoint(Z[nr - 2, k], W[nr - 2, k]),
            [Z[nr - 1, k]])
        X[nr - 1, k] = pos
        W[nr - 1, k] = pt.w

    # corners on the branch points (exact reparameterized quadrature)
    pos, pt = surface._immerse_from(
        X[nr - 1, 1], CurvePoint(Z[nr - 1, 1], W[nr - 1, 1]), [1.0 + 0.0j])
    X[nr - 1, 0] = pos
    W[nr - 1, 0] = 0.0
    pos, pt = surface._immerse_from(
        X[nr - 1, nt - 2], CurvePoint(Z[nr - 1, nt - 2], W[nr - 1, nt - 2]),
        [complex(-sigma)])
    X[nr - 1, nt - 1] = pos
    W[nr - 1, nt - 1] = 0.0

    v0 = X[nr - 1, 0].copy()
    verts = (X - v0).reshape(-1, 3)

    rs = math.sqrt(sigma)
    g = (Z / rs).reshape(-1)
    a2 = np.abs(g) ** 2
    normals = np.stack([2.0 * g.real, 2.0 * g.imag, a2 - 1.0],
                       axis=-1) / (1.0 + a2)[:, None]

    faces = []
    for j in range(nr - 1):
        for k in range(nt - 1):
            v00 = j * nt + k
            v10 = (j + 1) * nt + k
            v11 = (j + 1) * nt + k + 1
            v01 = j * nt + k + 1
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))

    return TriMesh(
        vertices=verts,
        normals=normals,
        faces=np.array(faces, dtype=np.int32),
        provenance=[(sigma, "fundamental")],
        domain_z=Z.reshape(-1).copy(),
        domain_w=W.reshape(-1).copy(),
        fundamental_xyz=verts.copy(),
        op_index=np.zeros(len(verts), dtype=np.int32),
    )


# ---------------------------------------------------------------------------
# extension pipeline


def extension_ops(sigma: float, settings: QuadSettings | None = None,
                  surface: FundamentalSurface | None = None):
    """The four extension operations of the reflection pipeline.

    1. 180-degree rotation diag(-1,1,-1) with offset (2c1, 0, 2c3), where
       c = psi(i sqrt(sigma)) is the fixed point of the first symmetry;
    2. reflection diag(1,-1,1) in the plane {x2 = 0};
    3. 180-degree rotation diag(-1,1,-1) about the x2-axis;
    4. translation by 2 t0 with t0 = psi(-sigma).
    """
    if surface is None:
        surface = FundamentalSurface(sigma, settings)
    c = surface.psi_fixed_point()
    t0 = surface.translation_half()
    rot = np.diag([-1.0, 1.0, -1.0])
    return [
        IsometryOp(rot, np.array([2.0 * c[0], 0.0, 2.0 * c[2]])),
        IsometryOp(np.diag([1.0, -1.0, 1.0]), np.zeros(3)),
        IsometryOp(rot, np.zeros(3)),
        IsometryOp(np.eye(3), 2.0 * t0),
    ]


def extend(mesh: TriMesh, ops, copies: int = 0) -> TriMesh:
    """Apply the pipeline: double the mesh at each of the first three ops,
    then append ``copies`` translated copies of the result.

    Vertex count grows exactly by 2^3 * (copies + 1).
    """
    if copies < 0:
        raise ValueError("copies must be >= 0")
    m = mesh
    for i, op in enumerate(ops[:3]):
        m = _concat(m, _transform(m, op, f"op{i + 1}"))
    out = m
    cur = m
    for k in range(copies):
        cur = _transform(cur, ops[3], "op4")
        out = _concat(out, cur)
    return out


# ---------------------------------------------------------------------------
# level slices and circle fitting


@dataclass(frozen=True)
class CircleFit:
    kind: str          # "circle" or "line"
    center: np.ndarray  # (2,) for circles; a point on the line for lines
    radius: float       # inf for lines
    residual: float
    direction: np.ndarray | None = None  # line direction for kind == "line"


LINE_RADIUS_FACTOR = 1e6


def level_circle_fit(points, height_tol: float = 1e-9) -> CircleFit:
    """Algebraic least-squares circle through coplanar horizontal points.

    Requires >= 5 points at a common height (to ``height_tol``).  If the
    fitted radius exceeds 1e6 times the point spread the data is classified
    as a line (total-least-squares fit) instead.  Raises Degenerate when
    the points do not even span one dimension.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be (n, 3)")
    if len(pts) < 5:
        raise ValueError("need at least 5 points")
    h = pts[:, 2]
    if h.max() - h.min() > height_tol * max(1.0, abs(float(np.mean(h)))):
        raise ValueError("points do not share a common height")
    xy = pts[:, :2]
    centroid = xy.mean(axis=0)
    u = xy - centroid
    spread = float(np.max(np.linalg.norm(u, axis=1)))
    if spread == 0.0:
        raise Degenerate("all points coincide")
    # principal components decide 1-d (line) vs 2-d data
    sv = np.linalg.svd(u, compute_uv=False)
    if sv[1] <= 1e-12 * sv[0]:
        direction = np.linalg.svd(u, compute_uv=True)[2][0]
        resid = float(np.max(np.abs(u[:, 0] * direction[1]
                                    - u[:, 1] * direction[0])))
        return CircleFit("line", centroid, math.inf, resid, direction)
    A = np.column_stack([2.0 * u[:, 0], 2.0 * u[:, 1], np.ones(len(u))])
    b = (u ** 2).sum(axis=1)
    (cx, cy, c0), *_ = np.linalg.lstsq(A, b, rcond=None)
    radius = math.sqrt(max(c0 + cx * cx + cy * cy, 0.0))
    if radius > LINE_RADIUS_FACTOR * spread:
        direction = np.linalg.svd(u, compute_uv=True)[2][0]
        resid = float(np.max(np.abs(u[:, 0] * direction[1]
                                    - u[:, 1] * direction[0])))
        return CircleFit("line", centroid, math.inf, resid, direction)
    center = centroid + np.array([cx, cy])
    dist = np.linalg.norm(xy - center, axis=1)
    resid = float(np.max(np.abs(dist - radius)))
    return CircleFit("circle", center, float(radius), resid)


def slice_mesh(mesh: TriMesh, height: float):
    """Intersect the mesh with {x3 = height}.

    Returns (points, crossings): edge-interpolated intersection points and
    the crossing records (ia, ib, s) for refinement.
    """
    x3 = mesh.vertices[:, 2]
    edges = set()
    for (a, b, c) in mesh.faces:
        for i, j in ((a, b), (b, c), (c, a)):
            edges.add((min(i, j), max(i, j)))
    pts = []
    crossings = []
    for (i, j) in sorted(edges):
        fa, fb = x3[i] - height, x3[j] - height
        if fa == 0.0 or fb == 0.0 or fa * fb > 0.0:
            continue
        s = fa / (fa - fb)
        pts.append(mesh.vertices[i] + s * (mesh.vertices[j] - mesh.vertices[i]))
        crossings.append((int(i), int(j), float(s)))
    return np.asarray(pts, dtype=float).reshape(-1, 3), crossings


def refine_slice(mesh: TriMesh, height: float, surface: FundamentalSurface,
                 max_points: int = 32):
    """Replace mesh-edge slice points with exact surface points at ``height``.

    Each crossing edge is root-solved in the domain parameter: the target
    is (op(psi(z)))_3 = height along the straight z-segment between the
    edge's domain points, integrating incrementally from the edge vertex.
    Only meshes built by :func:`sample_fundamental` (and extensions of
    them) carry the provenance needed here.
    """
    if mesh.domain_z is None or mesh.op_index is None:
        raise ValueError("mesh carries no domain provenance")
    _, crossings = slice_mesh(mesh, height)
    if len(crossings) > max_points:
        idx = np.linspace(0, len(crossings) - 1, max_points).astype(int)
        crossings = [crossings[i] for i in idx]
    out = []
    for (ia, ib, s_guess) in crossings:
        if mesh.op_index[ia] != mesh.op_index[ib]:
            continue
        op = mesh.op_catalog[mesh.op_index[ia]]
        # anchor at an endpoint with a usable branch value
        if mesh.domain_w[ia] != 0.0:
            i0, i1 = ia, ib
        elif mesh.domain_w[ib] != 0.0:
            i0, i1 = ib, ia
        else:
            continue
        za, zb = mesh.domain_z[i0], mesh.domain_z[i1]
        p0 = mesh.fundamental_xyz[i0].copy()
        w0 = mesh.domain_w[i0]
        ell = op.linear[2, :]
        b3 = op.offset[2]

        def shifted_height(pos):
            return float(ell @ pos + b3 - height)

        f0 = shifted_height(p0)
        f1 = shifted_height(mesh.fundamental_xyz[i1])
        if f0 == 0.0:
            out.append(op.apply(p0))
            continue
        if f0 * f1 > 0:
            continue
        s_lo, s_hi = 0.0, 1.0
        f_lo = f0
        pos_prev, w_prev, s_prev = p0, w0, 0.0
        pos_at = None
        for _ in range(60):
            s_mid = 0.5 * (s_lo + s_hi)
            z_prev = za + s_prev * (zb - za)
            z_mid = za + s_mid * (zb - za)
            if z_mid != z_prev:
                path = _marching_path(surface.params, [z_prev, z_mid])
                pos_mid, pt_mid = _curve.immerse(surface.params, path, w_prev,
                                                 pos_prev, surface.settings)
            else:
                pos_mid, pt_mid = pos_prev, CurvePoint(z_prev, w_prev)
            f_mid = shifted_height(pos_mid)
            pos_prev, w_prev, s_prev = pos_mid, pt_mid.w, s_mid
            if f_mid == 0.0 or (s_hi - s_lo) < 1e-13:
                pos_at = pos_mid
                break
            if f_lo * f_mid <= 0:
                s_hi = s_mid
            else:
                s_lo, f_lo = s_mid, f_mid
            pos_at = pos_mid
        out.append(op.apply(pos_at))
    return np.asarray(out, dtype=float).reshape(-1, 3)


# ---------------------------------------------------------------------------
# export


def export_obj(mesh: TriMesh, path) -> int:
    """ASCII OBJ (v/vn/f with 1-based i//i indices, 9 significant digits).

    Deterministic bytes for identical input.  Returns the byte count.
    """
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for n in mesh.normals:
        lines.append(f"vn {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}")
    for f in mesh.faces:
        a, b, c = (int(i) + 1 for i in f)
        lines.append(f"f {a}//{a} {b}//{b} {c}//{c}")
    data = ("\n".join(lines) + "\n").encode("ascii")
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def export_ply(mesh: TriMesh, path) -> int:
    """Binary little-endian PLY: float32 x y z nx ny nz, int32 indices."""
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {mesh.vertex_count}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property float nx\nproperty float ny\nproperty float nz\n"
        f"element face {mesh.face_count}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    ).encode("ascii")
    vdata = np.hstack([mesh.vertices, mesh.normals]).astype("<f4").tobytes()
    parts = [header, vdata]
    for f in mesh.faces:
        parts.append(struct.pack("<B3i", 3, int(f[0]), int(f[1]), int(f[2])))
    data = b"".join(parts)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def parse_obj(path) -> TriMesh:
    verts, normals, faces = [], [], []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            tok = line.split()
            if not tok:
                continue
            if tok[0] == "v":
                verts.append([float(x) for x in tok[1:4]])
            elif tok[0] == "vn":
                normals.append([float(x) for x in tok[1:4]])
            elif tok[0] == "f":
                faces.append([int(t.split("/")[0]) - 1 for t in tok[1:4]])
    return TriMesh(np.array(verts), np.array(normals),
                   np.array(faces, dtype=np.int32))


def parse_ply(path) -> TriMesh:
    with open(path, "rb") as fh:
        data = fh.read()
    head_end = data.index(b"end_header\n") + len(b"end_header\n")
    header = data[:head_end].decode("ascii").splitlines()
    nv = nf = 0
    for line in header:
        if line.startswith("element vertex"):
            nv = int(line.split()[-1])
        elif line.startswith("element face"):
            nf = int(line.split()[-1])
    vbytes = nv * 6 * 4
    varr = np.frombuffer(data[head_end:head_end + vbytes],
                         dtype="<f4").reshape(nv, 6)
    faces = np.zeros((nf, 3), dtype=np.int32)
    off = head_end + vbytes
    for i in range(nf):
        cnt = data[off]
        faces[i] = struct.unpack_from(f"<{cnt}i", data, off + 1)[:3]
        off += 1 + 4 * cnt
    return TriMesh(varr[:, :3].astype(float), varr[:, 3:].astype(float), faces)


def weld(mesh: TriMesh, tol: float = 1e-8) -> TriMesh:
    """Merge vertices closer than ``tol`` (hash-grid) for watertight export."""
    key = np.round(mesh.vertices / tol).astype(np.int64)
    seen = {}
    remap = np.zeros(mesh.vertex_count, dtype=np.int64)
    keep = []
    for i, k in enumerate(map(tuple, key)):
        if k in seen:
            remap[i] = seen[k]
        else:
            seen[k] = len(keep)
            remap[i] = len(keep)
            keep.append(i)
    keep = np.array(keep)
    faces = remap[mesh.faces]
    ok = ((faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2])
          & (faces[:, 0] != faces[:, 2]))
    return TriMesh(mesh.vertices[keep], mesh.normals[keep],
                   faces[ok].astype(np.int32), provenance=list(mesh.provenance))
