"""Check the closed-form Gaussian identities numerically.

The convolution rule for precisions against brute-force quadrature; the
scalar-case guarantee that at least one integral direction always holds;
and the two quadratic-polynomial identities (the r-reduction and the
value at the right endpoint of the admissible twist interval).
"""

import numpy as np

from schrobridge import (
    GaussianProblem,
    gauss_convolve_precision,
    gauss_density,
    matrix_criterion,
    ceiling_quadratic_boundary,
    ceiling_quadratic,
)
from schrobridge.gaussian import d_upper_bound

rng = np.random.default_rng(0)

print("convolution identity vs quadrature (2d, random SPD factors):")
A = rng.normal(size=(2, 2))
alpha = A @ A.T + 1.5 * np.eye(2)
B = rng.normal(size=(2, 2))
c = B @ B.T + 1.5 * np.eye(2)
out = gauss_convolve_precision(c, alpha)
axis = np.linspace(-7, 7, 241)
xx, yy = np.meshgrid(axis, axis, indexing="ij")
pts = np.column_stack([xx.ravel(), yy.ravel()])
cell = (axis[1] - axis[0]) ** 2
dens_alpha = np.array([gauss_density(alpha, p) for p in pts])
probe = np.array([0.7, -0.2])
quad = float(np.sum([gauss_density(c, probe - p) for p in pts] * dens_alpha) * cell)
closed = gauss_density(out, probe)
print(f"  quadrature {quad:.8f} vs closed form {closed:.8f} "
      f"(rel diff {abs(quad - closed) / closed:.2e})")

print("\nscalar triples: one integral direction always holds")
hold_counts = [0, 0]
for _ in range(2000):
    a, b, cc = rng.uniform(0.1, 10.0, 3)
    res = matrix_criterion(GaussianProblem(a=[[a]], b=[[b]], c=[[cc]]))
    assert res.xy_holds or res.yx_holds
    hold_counts[0] += res.xy_holds
    hold_counts[1] += res.yx_holds
print(f"  2000 draws, x->y held {hold_counts[0]} times, y->x held {hold_counts[1]} times")

print("\nquadratic identities on random scalars:")
worst_b = worst_r = 0.0
for _ in range(2000):
    a, b, cc = rng.uniform(0.1, 10.0, 3)
    if abs(b - cc) <= 0.1:
        continue
    gp = GaussianProblem(a=[[a]], b=[[b]], c=[[cc]])
    ident = ceiling_quadratic_boundary(gp)
    worst_b = max(worst_b, abs(ident.lhs - ident.rhs) / max(abs(ident.rhs), 1e-300))
    d = rng.uniform(-10, 10)
    r = rng.uniform(1.0, 4.0)
    gap = ceiling_quadratic(gp, d, r) - ceiling_quadratic(gp, d, 1.0)
    expect = -(r - 1.0) * cc * cc * (a + cc + d) / b
    worst_r = max(worst_r, abs(gap - expect) / max(abs(expect), 1e-300))
print(f"  boundary identity worst rel error: {worst_b:.2e}")
print(f"  r-reduction identity worst rel error: {worst_r:.2e}")

gp = GaussianProblem(a=[[2.0]], b=[[1.0]], c=[[3.0]])
print(f"\nworked example a=2, b=1, c=3: right endpoint {d_upper_bound(gp)}, "
      f"boundary value {ceiling_quadratic_boundary(gp).lhs}")
