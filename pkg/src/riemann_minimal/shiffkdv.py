"""Shiffman function, Jacobi operator, and the KdV hierarchy.

In a conformal coordinate xi with height differential d(xi), the Shiffman
function of a minimal surface with Gauss map g is

    S = Im[ (3/2)(g'/g)^2 - g''/g - (g'/g)^2 / (1 + |g|^2) ],

a Jacobi function whose vanishing says the horizontal sections are circles
or lines.  Its complexification S + iS* feeds an evolution equation for g
(the Shiffman velocity), which the substitutions x = g'/g and
u = x'/2 - x^2/4 = -3(g')^2/(4g^2) + g''/(2g) carry to mKdV and KdV.

The KdV hierarchy lives here as formal differential polynomials in
u, u', u'', ... with exact rational coefficients:

    d/dz P_{n+1} = (d^3/dz^3 + 4u d/dz + 2u') P_n,     P_0 = 1/2,

the antiderivative being taken exactly (integration constants zero), so
P_1 = u and P_2 = u'' + 3u^2.  Flows are du/dt_n = -d/dz P_{n+1}(u).

Jets (value plus derivative towers) are the working representation for g
and u: on the curve w^2 = z(z-1)(z+sigma) every derivative of g is an
exact polynomial in (g, g'), so the hierarchy can be evaluated without any
finite differencing.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import curve as _curve
from .curve import CurveParams, PoleOfGaussMap, WeierstrassForms, gaussian_curvature

__all__ = [
    "GridTooSmall", "NotExactDerivative", "JetTooShort",
    "Jet", "DiffPoly", "ConformalGrid",
    "level_curvature_raw", "shiffman", "shiffman_complex", "shiffman_velocity",
    "potential_u", "miura", "kdv_flow", "mkdv_flow",
    "hierarchy_P", "flow_n", "jacobi_residual",
    "algebro_geometric_residual", "AlgebroGeometricFit", "msigma_jet",
]


class GridTooSmall(Exception):
    pass


class NotExactDerivative(Exception):
    """Formal antidifferentiation left a nonzero remainder (a bug, not math)."""


class JetTooShort(Exception):
    pass


# ---------------------------------------------------------------------------
# jets


class Jet:
    """Value-plus-derivatives tower (f, f', ..., f^(k)) at a point.

    Arithmetic is exact truncated Leibniz calculus; the order of a product
    is the smaller of the factors' orders.  ``d(m)`` shifts by m
    derivatives (dropping order by m).
    """

    __slots__ = ("values",)

    def __init__(self, values):
        self.values = np.asarray(values, dtype=complex)
        if self.values.ndim != 1 or len(self.values) == 0:
            raise ValueError("jet needs a 1-d nonempty value list")

    @classmethod
    def constant(cls, c, order):
        v = np.zeros(order + 1, dtype=complex)
        v[0] = c
        return cls(v)

    @property
    def order(self):
        return len(self.values) - 1

    def __getitem__(self, k):
        return self.values[k]

    def d(self, m=1):
        if self.order < m:
            raise JetTooShort(f"need order >= {m}, have {self.order}")
        return Jet(self.values[m:])

    def truncate(self, order):
        if order > self.order:
            raise JetTooShort(f"need order >= {order}, have {self.order}")
        return Jet(self.values[:order + 1])

    def _coerce(self, other, order):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, order)

    def __add__(self, other):
        o = self._coerce(other, self.order)
        n = min(self.order, o.order)
        return Jet(self.values[:n + 1] + o.values[:n + 1])

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.values)

    def __sub__(self, other):
        return self + (-self._coerce(other, self.order))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.values * complex(other))
        n = min(self.order, other.order)
        out = np.zeros(n + 1, dtype=complex)
        for k in range(n + 1):
            out[k] = sum(math.comb(k, i) * self.values[i] * other.values[k - i]
                         for i in range(k + 1))
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.values / complex(other))
        n = min(self.order, other.order)
        if other.values[0] == 0:
            raise ZeroDivisionError("jet division by a jet with zero value")
        out = np.zeros(n + 1, dtype=complex)
        for k in range(n + 1):
            s = self.values[k] - sum(math.comb(k, i) * out[i] * other.values[k - i]
                                     for i in range(k))
            out[k] = s / other.values[0]
        return Jet(out)

    def __rtruediv__(self, other):
        return Jet.constant(other, self.order) / self

    def scale_domain(self, c):
        """Jet of xi -> f(c xi): multiplies the k-th entry by c^k."""
        return Jet(self.values * np.power(complex(c), np.arange(len(self.values))))

    def __repr__(self):
        return f"Jet({np.array2string(self.values, precision=6)})"


# ---------------------------------------------------------------------------
# Shiffman function and friends


def _require(j: Jet, order: int, who: str):
    if j.order < order:
        raise JetTooShort(f"{who} needs a jet of order >= {order}, got {j.order}")


def _check_g(j: Jet):
    g = j[0]
    if g == 0 or not np.isfinite(g):
        raise PoleOfGaussMap(f"g = {g}")


def level_curvature_raw(j: Jet) -> float:
    """Planar curvature bracket of the horizontal level section,
    |g|/(1+|g|^2) * Re(g'/g), exactly as displayed (convention note: at a
    catenoid neck this evaluates to 1/2 while a unit circle has curvature
    1; the factor is absorbed downstream by the Shiffman formula)."""
    _require(j, 1, "level_curvature_raw")
    _check_g(j)
    g, gp = j[0], j[1]
    return float(abs(g) / (1.0 + abs(g) ** 2) * (gp / g).real)


def _bracket(j: Jet) -> complex:
    _require(j, 2, "shiffman")
    _check_g(j)
    g, gp, gpp = j[0], j[1], j[2]
    lg = gp / g
    return 1.5 * lg * lg - gpp / g - lg * lg / (1.0 + abs(g) ** 2)


def shiffman(j: Jet) -> float:
    """S = Im[...bracket...]; zero iff the horizontal sections are circular."""
    return float(_bracket(j).imag)


def shiffman_complex(j: Jet) -> complex:
    """S + i S* = -i * bracket  (so Re is S, Im is the conjugate function S*,
    which is minus the real part of the bracket)."""
    return -1j * _bracket(j)


def shiffman_velocity(j: Jet) -> complex:
    """Deformation speed of g driven by the complex Shiffman function:
    (i/2)(g''' - 3 g' g''/g + (3/2)(g')^3/g^2)."""
    _require(j, 3, "shiffman_velocity")
    _check_g(j)
    g, gp, gpp, gppp = j[0], j[1], j[2], j[3]
    return 0.5j * (gppp - 3.0 * gp * gpp / g + 1.5 * gp ** 3 / g ** 2)


def shiffman_velocity_jet(j: Jet) -> Jet:
    """Same as :func:`shiffman_velocity` but propagated through the jet."""
    _require(j, 3, "shiffman_velocity_jet")
    _check_g(j)
    g = j
    return 0.5j * (g.d(3) - 3.0 * (g.d(1) * g.d(2)) / g
                   + 1.5 * (g.d(1) * g.d(1) * g.d(1)) / (g * g))


def potential_u(j: Jet, order: int | None = None) -> Jet:
    """Schroedinger/KdV potential u = -3(g')^2/(4g^2) + g''/(2g) as a jet.

    Differentiation is exact through the jet; a g-jet of order m+2 yields a
    u-jet of order m.
    """
    _check_g(j)
    if order is not None:
        _require(j, order + 2, "potential_u")
        j = j.truncate(order + 2)
    _require(j, 2, "potential_u")
    g = j
    gp = g.d(1)
    return -0.75 * (gp * gp) / (g * g) + g.d(2) / (2.0 * g)


def miura(x: Jet) -> Jet:
    """Miura transformation u = x'/2 - x^2/4 (with x = g'/g this recovers
    :func:`potential_u` exactly)."""
    _require(x, 1, "miura")
    return 0.5 * x.d(1) - 0.25 * (x * x)


def kdv_flow(j: Jet) -> complex:
    """du/dt = -u''' - 6 u u' evaluated on a u-jet."""
    _require(j, 3, "kdv_flow")
    return complex(-j[3] - 6.0 * j[0] * j[1])


def mkdv_flow(j: Jet) -> complex:
    """dx/dt = (i/2)(x''' - (3/2) x^2 x') evaluated on an x-jet."""
    _require(j, 3, "mkdv_flow")
    return complex(0.5j * (j[3] - 1.5 * j[0] ** 2 * j[1]))


def mkdv_flow_jet(x: Jet) -> Jet:
    _require(x, 3, "mkdv_flow_jet")
    return 0.5j * (x.d(3) - 1.5 * (x * x) * x.d(1))


# ---------------------------------------------------------------------------
# formal differential polynomials


def _fmt_monomial(mono):
    if not mono:
        return ""
    parts = []
    orders = sorted(set(mono))
    for k in orders:
        count = mono.count(k)
        sym = "u" + "'" * k
        parts.append(sym if count == 1 else f"{sym}^{count}")
    return " ".join(parts)


@dataclass(frozen=True)
class DiffPoly:
    """Formal polynomial in u, u', u'', ... with exact Fraction coefficients.

    Monomials are stored as descending-sorted tuples of derivative orders,
    e.g. (2, 0, 0) is u'' u^2.  Zero coefficients are never stored.
    """

    terms: dict = field(default_factory=dict)

    @classmethod
    def from_terms(cls, terms):
        clean = {}
        for mono, c in terms.items():
            c = Fraction(c)
            if c != 0:
                key = tuple(sorted(mono, reverse=True))
                clean[key] = clean.get(key, Fraction(0)) + c
        return cls({m: c for m, c in clean.items() if c != 0})

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return DiffPoly({m: c for m, c in out.items() if c != 0})

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return DiffPoly({})
        return DiffPoly({m: c * v for m, v in self.terms.items()})

    def mul_factor(self, k):
        """Multiply by u^(k)."""
        return DiffPoly({tuple(sorted(m + (k,), reverse=True)): c
                         for m, c in self.terms.items()})

    def derivative(self):
        out = {}
        for mono, c in self.terms.items():
            for i in range(len(mono)):
                bumped = tuple(sorted(mono[:i] + (mono[i] + 1,) + mono[i + 1:],
                                      reverse=True))
                out[bumped] = out.get(bumped, Fraction(0)) + c
        return DiffPoly({m: c for m, c in out.items() if c != 0})

    def antiderivative(self):
        """Exact formal antiderivative via leading-term peeling.

        Repeatedly integrates the lexicographically greatest monomial by
        parts; raises NotExactDerivative if a remainder survives (for the
        hierarchy this would signal an implementation bug, exactness being
        a theorem).
        """
        rest = dict(self.terms)
        out = {}
        while rest:
            mono = max(rest)
            c = rest.pop(mono)
            k = mono[0]
            if k == 0 or (len(mono) > 1 and mono[1] == k):
                raise NotExactDerivative(
                    f"term {c} * {_fmt_monomial(mono)} is not an exact z-derivative")
            cand = tuple(sorted(mono[1:] + (k - 1,), reverse=True))
            mult = cand.count(k - 1)
            coeff = c / mult
            out[cand] = out.get(cand, Fraction(0)) + coeff
            for m, v in DiffPoly({cand: coeff}).derivative().terms.items():
                if m == mono:
                    continue
                nv = rest.get(m, Fraction(0)) - v
                if nv == 0:
                    rest.pop(m, None)
                else:
                    rest[m] = nv
        return DiffPoly({m: c for m, c in out.items() if c != 0})

    def evaluate(self, j: Jet) -> complex:
        total = 0.0 + 0.0j
        for mono, c in self.terms.items():
            if mono and mono[0] > j.order:
                raise JetTooShort(
                    f"monomial {_fmt_monomial(mono)} needs jet order {mono[0]}, "
                    f"got {j.order}")
            v = complex(c)
            for k in mono:
                v *= j[k]
            total += v
        return total

    def max_order(self) -> int:
        return max((m[0] for m in self.terms if m), default=0)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, reverse=True):
            c = self.terms[mono]
            mono_s = _fmt_monomial(mono)
            mag = abs(c)
            if not mono_s:
                coeff_s = str(mag)
            elif mag == 1:
                coeff_s = ""
            else:
                coeff_s = str(mag) + " "
            term = coeff_s + mono_s if mono_s else coeff_s
            if not parts:
                parts.append(("-" if c < 0 else "") + term)
            else:
                parts.append(("- " if c < 0 else "+ ") + term)
        return " ".join(parts)


_P_CACHE = [DiffPoly({(): Fraction(1, 2)})]
_P_LOCK = threading.Lock()
MAX_HIERARCHY_LEVEL = 6


def hierarchy_P(n: int, max_level: int = MAX_HIERARCHY_LEVEL) -> DiffPoly:
    """The n-th Gelfand-Dickey polynomial P_n of the KdV hierarchy.

    d/dz P_{n+1} = (d^3 + 4u d + 2u') P_n with P_0 = 1/2 and integration
    constants zero, so P_1 = u, P_2 = u'' + 3u^2, ...
    Build-once read-many memo (lock only taken while extending); levels
    above ``max_level`` are refused (desk scale).
    """
    if n < 0:
        raise ValueError("hierarchy level must be >= 0")
    if n > max_level:
        raise ValueError(f"hierarchy level {n} above configured max {max_level}")
    if len(_P_CACHE) <= n:
        with _P_LOCK:
            while len(_P_CACHE) <= n:
                p = _P_CACHE[-1]
                rhs = (p.derivative().derivative().derivative()
                       + p.derivative().mul_factor(0).scale(4)
                       + p.mul_factor(1).scale(2))
                _P_CACHE.append(rhs.antiderivative())
    return _P_CACHE[n]


def flow_n(n: int, j: Jet) -> complex:
    """du/dt_n = -d/dz P_{n+1}(u) evaluated on a u-jet of order >= 2n+1."""
    need = 2 * n + 1
    if j.order < need:
        raise JetTooShort(f"flow {n} needs jet order {need}, got {j.order}")
    return -hierarchy_P(n + 1).derivative().evaluate(j)


# ---------------------------------------------------------------------------
# conformal grids and the Jacobi operator


@dataclass
class ConformalGrid:
    """Rectangular grid in the conformal coordinate xi = x + iy, phi3 = d(xi).

    Carries a g-jet of order >= 3 per node plus the metric factor
    Lambda = (|g| + 1/|g|)/2 (from ds = Lambda |d xi|).
    """

    nx: int
    ny: int
    spacing: float
    g_jets: list  # nested [ix][iy] -> Jet
    Lambda: np.ndarray

    @classmethod
    def from_gauss_map(cls, jet_fn, x0, y0, nx, ny, spacing, order=3):
        """Build from a callable xi -> Jet of g (order >= ``order``)."""
        jets = []
        Lam = np.zeros((nx, ny))
        for ix in range(nx):
            row = []
            for iy in range(ny):
                xi = complex(x0 + ix * spacing, y0 + iy * spacing)
                j = jet_fn(xi)
                _require(j, order, "ConformalGrid")
                ag = abs(j[0])
                if ag == 0 or not np.isfinite(ag):
                    raise PoleOfGaussMap(f"grid node at {xi} hits a pole of g")
                Lam[ix, iy] = 0.5 * (ag + 1.0 / ag)
                row.append(j)
            jets.append(row)
        return cls(nx, ny, spacing, jets, Lam)


def jacobi_residual(grid: ConformalGrid, fld: np.ndarray) -> float:
    """Max over interior nodes of |Lambda^-2 (5-point Laplacian) f - 2K f|.

    Second-order stencil: the residual of a true Jacobi function is
    discretization-limited and should shrink ~4x when the spacing halves.
    """
    if grid.nx < 3 or grid.ny < 3:
        raise GridTooSmall(f"need at least 3x3, have {grid.nx}x{grid.ny}")
    fld = np.asarray(fld, dtype=float)
    if fld.shape != (grid.nx, grid.ny):
        raise ValueError("field shape does not match grid")
    if not np.all(np.isfinite(fld)):
        raise ValueError("field must be finite")
    h2 = grid.spacing ** 2
    worst = 0.0
    for ix in range(1, grid.nx - 1):
        for iy in range(1, grid.ny - 1):
            lap = (fld[ix + 1, iy] + fld[ix - 1, iy] + fld[ix, iy + 1]
                   + fld[ix, iy - 1] - 4.0 * fld[ix, iy]) / h2
            j = grid.g_jets[ix][iy]
            K = gaussian_curvature(WeierstrassForms.from_g(j[0]), j[1])
            res = abs(lap / grid.Lambda[ix, iy] ** 2 - 2.0 * K * fld[ix, iy])
            worst = max(worst, res)
    return float(worst)


# ---------------------------------------------------------------------------
# jets on the curve and the algebro-geometric test


def msigma_jet(params: CurveParams, pt, order: int) -> Jet:
    """Jet of the Gauss map of M_sigma at a regular curve point.

    Uses the exact derivative relations of the curve (g' = w/sqrt(sigma),
    the closed form for g'', and its repeated differentiation).
    """
    return Jet(_curve.gauss_derivatives(params, pt, order))


@dataclass(frozen=True)
class AlgebroGeometricFit:
    coefficients: np.ndarray
    residual: float
    rank_deficient: bool


def algebro_geometric_residual(params: CurveParams, n: int, samples) -> AlgebroGeometricFit:
    """Least-squares fit of flow_n against span{flow_0, ..., flow_{n-1}}.

    Builds u-jets from the curve's exact g-jets at the sample points,
    evaluates the hierarchy flows, and reports the fitted coefficients and
    the relative residual ||defect|| / ||flow_n||.  A potential is
    algebro-geometric when the residual vanishes.  Constant potentials
    (all flows zero) report residual 0 by convention.  Rank deficiency of
    the design matrix is reported, not raised.
    """
    if n < 1:
        raise ValueError("need n >= 1 (no lower-order flows below flow_0)")
    g_order = 2 * n + 3
    A = np.zeros((len(samples), n), dtype=complex)
    b = np.zeros(len(samples), dtype=complex)
    for i, pt in enumerate(samples):
        u = potential_u(msigma_jet(params, pt, g_order))
        for k in range(n):
            A[i, k] = flow_n(k, u)
        b[i] = flow_n(n, u)
    nb = np.linalg.norm(b)
    if nb == 0 and np.linalg.norm(A) == 0:
        return AlgebroGeometricFit(np.zeros(n), 0.0, False)
    coef, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    defect = A @ coef - b
    residual = float(np.linalg.norm(defect) / (nb if nb > 0 else 1.0))
    return AlgebroGeometricFit(coef, residual, rank < n)
