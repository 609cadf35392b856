"""Riemann's classical construction of the circle-foliated minimal surfaces.

A horizontal circle foliation with |a| = 1 reduces to the radius ODE

    2 q^3 + (q')^2 + q (2 - q'') = 0,      q(z) = r(z)^2,

whose first integral (q')^2/q^2 = 4(q - 1/q) + 4*lambda turns the surface
into explicit quadratures on q in [q1, infinity):

    z(q)  =  1/2 int_{q1}^{q} du / sqrt(u^3 - u + lambda u^2)
    f(q)  = -1/2 int_{q1}^{q} u du / sqrt(u^3 - u + lambda u^2)
    X(q, v) = f(q) (1, 0) + sqrt(q) (cos v, sin v, 0) + (0, 0, z(q))

with q1 = ( -lambda + sqrt(4 + lambda^2) ) / 2 the simple root of the
radicand.  The surface is normalized so the minimum-radius circle sits at
height zero with center at the origin.  Note the two different integrands:
the height integral carries du, the center offset carries u du (resolved
against the first integral; the printed pair that shows u du for both is a
typo in the source material).

The a = 0 branch of the same quadrature is the catenoid; its closed form is

    z(q) = arcsinh( sqrt(lambda q - 1) ) / sqrt(lambda),

the exponent on lambda being fixed by matching the quadrature (see README).

This module also carries Enneper's reduction: the seven trigonometric
coefficients a1..a7 of (eG - 2fF + Eg) |Xu x Xv| for a general circle
foliation, plus a finite-difference/DFT cross-check of the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quad import QuadSettings, _adaptive, integrate_sqrt_singular, integrate_tail

__all__ = [
    "DomainError", "ConvergenceError", "RiemannParams", "FoliationData",
    "q_min", "sigma_of_lambda", "radicand", "height", "center_offset",
    "slab_height", "parameterize", "catenoid_height", "gauss_limit",
    "enneper_coefficients", "enneper_fourier_check", "foliation_surface",
]


class DomainError(Exception):
    """Argument outside the admissible q-range."""


class ConvergenceError(Exception):
    """A numerically computed limit failed its Cauchy check."""


def q_min(lam: float) -> float:
    """q1(lambda) = (-lambda + sqrt(4 + lambda^2))/2, the minimum of q."""
    return 0.5 * (-lam + math.hypot(2.0, lam))


def sigma_of_lambda(lam: float) -> float:
    """sigma = (2 / (sqrt(lambda^2 + 4) - lambda))^2; equals 1/q1^2."""
    return (2.0 / (math.hypot(2.0, lam) - lam)) ** 2


def radicand(lam: float, u):
    """u^3 + lambda u^2 - u = u (u - q1) (u + q1 + lambda)."""
    return u * (u * u + lam * u - 1.0)


@dataclass(frozen=True)
class RiemannParams:
    """One member of the family: lambda plus its derived quantities.

    The direction of the center line is fixed to (1, 0); rotating it
    rotates the surface and is not a genuine parameter.
    """

    lam: float
    q1: float
    zeta: float
    a_direction: tuple = (1.0, 0.0)

    @classmethod
    def from_lambda(cls, lam: float,
                    settings: QuadSettings | None = None) -> "RiemannParams":
        q1 = q_min(lam)
        return cls(float(lam), q1, slab_height(lam, settings))


def _split_point(lam: float) -> float:
    return max(4.0, 2.0 * q_min(lam) + 2.0)


def height(params: RiemannParams, q: float,
           settings: QuadSettings | None = None) -> float:
    """z_lambda(q): height of the circle of radius sqrt(q).

    Zero at q1, strictly increasing, bounded above by zeta.  The sqrt
    singularity at q1 is removed by the u = q1 + s^2 substitution.
    """
    lam, q1 = params.lam, params.q1
    if q < q1 - 1e-12:
        raise DomainError(f"q = {q} below q1 = {q1}")
    q = max(q, q1)
    if q == q1:
        return 0.0
    Q = _split_point(lam)
    f = lambda u: 0.5 / np.sqrt(radicand(lam, u))
    if q <= Q:
        return integrate_sqrt_singular(f, q1, q, settings)
    head = integrate_sqrt_singular(f, q1, Q, settings)
    body, _ = _adaptive(lambda u: f(u), [(Q, q)], settings)
    return head + float(np.real(body))


def center_offset(params: RiemannParams, q: float,
                  settings: QuadSettings | None = None) -> float:
    """f_lambda(q): first coordinate of the circle center at parameter q.

    Zero at q1, strictly decreasing, diverging like -sqrt(q).
    """
    lam, q1 = params.lam, params.q1
    if q < q1 - 1e-12:
        raise DomainError(f"q = {q} below q1 = {q1}")
    q = max(q, q1)
    if q == q1:
        return 0.0
    Q = _split_point(lam)
    f = lambda u: -0.5 * u / np.sqrt(radicand(lam, u))
    if q <= Q:
        return integrate_sqrt_singular(f, q1, q, settings)
    head = integrate_sqrt_singular(f, q1, Q, settings)
    body, _ = _adaptive(lambda u: f(u), [(Q, q)], settings)
    return head + float(np.real(body))


def slab_height(lam: float, settings: QuadSettings | None = None) -> float:
    """zeta(lambda) = lim_{q->inf} z_lambda(q); finite since the tail is
    u^(-3/2)."""
    q1 = q_min(lam)
    Q = _split_point(lam)
    f = lambda u: 0.5 / np.sqrt(radicand(lam, u))
    head = integrate_sqrt_singular(f, q1, Q, settings)
    tail = integrate_tail(f, Q, 1.5, settings)
    return head + tail


def parameterize(params: RiemannParams, q: float, v: float,
                 settings: QuadSettings | None = None) -> np.ndarray:
    """X(q, v) = f(q)(1,0,0) + sqrt(q)(cos v, sin v, 0) + (0,0,z(q))."""
    fq = center_offset(params, q, settings)
    zq = height(params, q, settings)
    rq = math.sqrt(q)
    return np.array([fq + rq * math.cos(v), rq * math.sin(v), zq])


def catenoid_height(lam: float, q: float) -> float:
    """Closed form of the a = 0 (catenoid) height integral.

    z(q) = arcsinh(sqrt(lambda q - 1)) / sqrt(lambda); must agree with the
    direct quadrature of the height integral with radicand lambda u^2 - u.
    """
    if lam <= 0:
        raise DomainError("catenoid branch needs lambda > 0")
    if q < 1.0 / lam - 1e-12:
        raise DomainError(f"q = {q} below the neck 1/lambda = {1.0 / lam}")
    q = max(q, 1.0 / lam)
    return math.asinh(math.sqrt(max(lam * q - 1.0, 0.0))) / math.sqrt(lam)


def _normal(params, q, v):
    """Unit normal of the parameterization from the exact partials."""
    lam = params.lam
    rad = radicand(lam, q)
    fp = -0.5 * q / math.sqrt(rad)
    zp = 0.5 / math.sqrt(rad)
    rq = math.sqrt(q)
    xu = np.array([fp + math.cos(v) / (2 * rq), math.sin(v) / (2 * rq), zp])
    xv = np.array([-rq * math.sin(v), rq * math.cos(v), 0.0])
    n = np.cross(xu, xv)
    return n / np.linalg.norm(n)


def gauss_limit(params: RiemannParams, tol: float = 1e-4) -> float:
    """lim_{q->inf} N1(q,0)/(1 - N3(q,0)) along the symmetry plane.

    Evaluated from the parameterization's normal at q = 1e3, 1e4, 1e5.  The
    ratio converges like c/q, so the sequence is required to contract and
    its Aitken extrapolation is taken as the limit, then asserted against
    both closed forms 2/(lambda - sqrt(lambda^2+4)) and -sqrt(sigma).
    """
    vals = []
    for q in (1e3, 1e4, 1e5):
        n = _normal(params, q, 0.0)
        vals.append(n[0] / (1.0 - n[2]))
    d1, d2 = vals[1] - vals[0], vals[2] - vals[1]
    if abs(d2) >= abs(d1) or abs(d2) > tol * 10.0:
        raise ConvergenceError(f"normal ratio sequence not Cauchy: {vals}")
    limit = vals[2] - d2 * d2 / (d2 - d1)
    lam = params.lam
    closed = 2.0 / (lam - math.hypot(2.0, lam))
    if abs(limit - closed) > tol:
        raise ConvergenceError(f"limit {limit} != closed form {closed}")
    if abs(limit + math.sqrt(sigma_of_lambda(lam))) > tol:
        raise ConvergenceError(
            f"limit {limit} != -sqrt(sigma) = {-math.sqrt(sigma_of_lambda(lam))}")
    return limit


# ---------------------------------------------------------------------------
# Enneper's reduction


@dataclass(frozen=True)
class FoliationData:
    """Pointwise data of a circle foliation X = c(u) + r(u)(cos v n + sin v b).

    (alpha, beta, delta) are the components of the center velocity c' in
    the Frenet frame {t, n, b} of the directrix; primes are u-derivatives.
    kappa > 0 is required (the directrix of a genuinely tilting foliation
    has nowhere-vanishing curvature).
    """

    r: float
    r_p: float
    r_pp: float
    kappa: float
    kappa_p: float
    tau: float
    alpha: float
    beta: float
    delta: float
    alpha_p: float = 0.0
    beta_p: float = 0.0
    delta_p: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")


def enneper_coefficients(d: FoliationData) -> np.ndarray:
    """The seven closed-form coefficients of
    a1 cos 3v + a2 sin 3v + a3 cos 2v + a4 sin 2v + a5 cos v + a6 sin v + a7.
    """
    r, rp, rpp = d.r, d.r_p, d.r_pp
    k, kp, t = d.kappa, d.kappa_p, d.tau
    al, be, de = d.alpha, d.beta, d.delta
    alp, bep, dep = d.alpha_p, d.beta_p, d.delta_p
    a1 = -0.5 * r ** 3 * k * (be ** 2 - de ** 2 + r ** 2 * k ** 2)
    a2 = -r ** 3 * be * de * k
    a3 = 0.5 * r ** 3 * (-6 * be * k * rp + r * (5 * al * k ** 2 + k * bep - be * kp))
    a4 = 0.5 * r ** 3 * (r * k * dep - de * (6 * k * rp + r * kp))
    a5 = -0.5 * r ** 2 * (
        3 * r ** 3 * k ** 3 - 4 * al * be * rp
        + r * (8 * al ** 2 * k + 3 * be ** 2 * k
               + 3 * k * (de ** 2 + 2 * rp ** 2)
               - 2 * be * alp + 2 * al * (de * t + bep))
        + 2 * r ** 2 * (rp * kp - k * rpp))
    a6 = r ** 2 * (2 * al * de * rp + r ** 2 * k * t * rp
                   + r * (de * alp + al * (be * t - dep)))
    a7 = 0.5 * r ** 2 * (
        2 * al ** 3
        + r * (2 * rp * (-2 * be * k + alp) + r * (k * (2 * de * t + bep) - be * kp))
        + al * (2 * be ** 2 + 2 * de ** 2 + 5 * r ** 2 * k ** 2
                + 2 * rp ** 2 - 2 * r * rpp))
    return np.array([a1, a2, a3, a4, a5, a6, a7])


def foliation_surface(d: FoliationData, n_ode_steps: int = 64):
    """Local surface X(u, v) realizing the foliation data at u = 0.

    The Frenet frame and center curve are integrated with fixed-step RK4
    from the identity frame at u = 0; kappa and the velocity components
    vary linearly in u (their derivatives are the supplied primes), tau is
    held constant (the trig coefficients do not involve tau').  Only tiny
    |u| is meant to be used (finite differencing).

    Torsion convention: b' = +tau n (equivalently n' = -kappa t - tau b).
    This is the convention under which the closed-form coefficients
    reproduce the sampled trig polynomial; the opposite sign leaves a
    2*tau*delta-sized defect in the constant coefficient.
    """
    k0, kp = d.kappa, d.kappa_p
    t0 = d.tau

    def deriv(u, y):
        t, n, b, c = y[0:3], y[3:6], y[6:9], y[9:12]
        k = k0 + kp * u
        al = d.alpha + d.alpha_p * u
        be = d.beta + d.beta_p * u
        de = d.delta + d.delta_p * u
        dt = k * n
        dn = -k * t - t0 * b
        db = t0 * n
        dc = al * t + be * n + de * b
        return np.concatenate([dt, dn, db, dc])

    y0 = np.concatenate([np.eye(3).ravel(), np.zeros(3)])

    def frame_at(u):
        y = y0.copy()
        h = u / n_ode_steps
        x = 0.0
        for _ in range(n_ode_steps):
            k1 = deriv(x, y)
            k2 = deriv(x + h / 2, y + h / 2 * k1)
            k3 = deriv(x + h / 2, y + h / 2 * k2)
            k4 = deriv(x + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            x += h
        return y[3:6], y[6:9], y[9:12]  # n, b, c

    def X(u, v):
        n, b, c = frame_at(u)
        r = d.r + d.r_p * u + 0.5 * d.r_pp * u * u
        v = np.atleast_1d(np.asarray(v, dtype=float))
        pts = c[None, :] + r * (np.cos(v)[:, None] * n[None, :]
                                + np.sin(v)[:, None] * b[None, :])
        return pts

    def Xv(u, v):
        n, b, c = frame_at(u)
        r = d.r + d.r_p * u + 0.5 * d.r_pp * u * u
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return r * (-np.sin(v)[:, None] * n[None, :]
                    + np.cos(v)[:, None] * b[None, :])

    return X, Xv


def enneper_fourier_check(d: FoliationData, n_v: int = 256,
                          h: float = 1e-5) -> float:
    """Max |DFT coefficient - closed form| over the seven coefficients.

    Samples P(v) = G det(Xu,Xv,Xuu) - 2F det(Xu,Xv,Xuv) + E det(Xu,Xv,Xvv)
    on a uniform 256-point v-grid (P is a degree-3 trig polynomial, so the
    grid is vastly sufficient) using central finite differences in u and
    the analytic v-derivatives.
    """
    X, Xv_fn = foliation_surface(d)
    v = 2.0 * math.pi * np.arange(n_v) / n_v

    Xm1, X0, Xp1 = (X(u, v) for u in (-h, 0.0, h))
    Xu = (Xp1 - Xm1) / (2 * h)
    Xuu = (Xp1 - 2 * X0 + Xm1) / (h * h)
    Xv = Xv_fn(0.0, v)
    Xuv = (Xv_fn(h, v) - Xv_fn(-h, v)) / (2 * h)
    # X(0, v) = c + r(cos v n + sin v b) gives X_vv = c - X; the center c is
    # the exact mean of X over the uniform v-grid.
    Xvv = X0.mean(axis=0)[None, :] - X0

    E = np.einsum("ij,ij->i", Xu, Xu)
    F = np.einsum("ij,ij->i", Xu, Xv)
    G = np.einsum("ij,ij->i", Xv, Xv)

    def det3(A, B, C):
        return np.einsum("ij,ij->i", A, np.cross(B, C))

    P = (G * det3(Xu, Xv, Xuu) - 2.0 * F * det3(Xu, Xv, Xuv)
         + E * det3(Xu, Xv, Xvv))

    coeffs = np.array([
        2.0 / n_v * np.sum(P * np.cos(3 * v)),
        2.0 / n_v * np.sum(P * np.sin(3 * v)),
        2.0 / n_v * np.sum(P * np.cos(2 * v)),
        2.0 / n_v * np.sum(P * np.sin(2 * v)),
        2.0 / n_v * np.sum(P * np.cos(v)),
        2.0 / n_v * np.sum(P * np.sin(v)),
        1.0 / n_v * np.sum(P),
    ])
    return float(np.max(np.abs(coeffs - enneper_coefficients(d))))
