#!/usr/bin/env python3
"""The classical one-parameter family, from the radius ODE to numbers.

Walks the quadrature construction: the admissible radius range starts at
q1(lambda) = (-lambda + sqrt(4 + lambda^2))/2, the surface fills a slab of
height zeta(lambda), the a = 0 branch of the same integral is the catenoid
with its arcsinh closed form, and the limiting Gauss-map ratio ties lambda
to the curve parameter sigma = 1/q1^2.
"""

import numpy as np

from riemann_minimal import classical

print("lambda      q1        sigma     zeta      gauss limit  -sqrt(sigma)")
for lam in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0):
    p = classical.RiemannParams.from_lambda(lam)
    sig = classical.sigma_of_lambda(lam)
    gl = classical.gauss_limit(p)
    print(f"{lam:6.2f}  {p.q1:9.6f}  {sig:9.6f}  {p.zeta:9.6f}"
          f"  {gl:11.6f}  {-np.sqrt(sig):11.6f}")

print("\nsigma(lambda) * q1(lambda)^2 == 1:")
lams = np.linspace(-2, 4, 7)
prods = [classical.sigma_of_lambda(l) * classical.q_min(l) ** 2 for l in lams]
print("  max deviation:", max(abs(p - 1) for p in prods))

print("\ncatenoid branch (a = 0): closed form vs direct quadrature")
from riemann_minimal.quad import integrate_sqrt_singular
for lam in (0.5, 1.0, 2.0):
    q = 1.0 / lam + 2.0
    f = lambda u: 0.5 / np.sqrt(lam * u * u - u)
    quad_val = integrate_sqrt_singular(f, 1.0 / lam, q)
    closed = classical.catenoid_height(lam, q)
    print(f"  lambda={lam}: quadrature={quad_val:.12f} closed={closed:.12f}"
          f" diff={abs(quad_val - closed):.2e}")

print("\ncircle slices of X(q, v): radius sqrt(q), center on the x1-axis")
p = classical.RiemannParams.from_lambda(1.0)
for q in (p.q1, p.q1 + 0.5, p.q1 + 2.0):
    x = classical.parameterize(p, q, 0.0)
    print(f"  q={q:8.4f}: point at v=0 -> ({x[0]:+.4f}, {x[1]:+.4f}, {x[2]:+.4f}),"
          f" radius {np.sqrt(q):.4f}")
