"""Tour of the existence criteria on easy and adversarial inputs.

Three Gaussian triples: the isotropic unit case (everything holds), a
mildly anisotropic case, and the mismatched-precision counterexample for
which *both* integral directions blow up even though a solution exists
(the radial structure still guarantees it).  Also runs the witness-based
compact-domination check and the radial profile scan on a discrete
problem.
"""

import numpy as np

from schrobridge import (
    GaussianProblem,
    check_integral_criterion,
    check_compact_domination,
    check_moment_condition,
    check_radial,
    discretize_gaussian,
    matrix_criterion,
    suggest_domination_witness,
    validate_reduction,
)

cases = {
    "unit isotropic": GaussianProblem(a=[[1.0]], b=[[1.0]], c=[[1.0]]),
    "anisotropic 2d": GaussianProblem(a=np.diag([0.5, 2.0]), b=np.diag([1.0, 1.0]),
                                      c=np.eye(2)),
    "mismatched counterexample": GaussianProblem(a=np.diag([0.1, 10.0]),
                                                 b=np.diag([10.0, 0.1]), c=np.eye(2)),
}

for name, gp in cases.items():
    mc = matrix_criterion(gp)
    pts = 201 if gp.dim == 1 else 31
    problem = validate_reduction(discretize_gaussian(gp, points_per_dim=pts))
    eq = check_integral_criterion(problem)
    print(f"{name}:")
    print(f"  matrix criterion   x->y {str(mc.xy_holds):5}  y->x {str(mc.yx_holds):5}")
    print(f"  integral criterion x->y value {eq.xy.value:10.4g} finite={eq.xy.finite}")
    print(f"                     y->x value {eq.yx.value:10.4g} finite={eq.yx.finite}")

print("\ncompact domination on the unit case (witness from the K boundary):")
problem = validate_reduction(
    discretize_gaussian(GaussianProblem(a=[[1.0]], b=[[1.0]], c=[[1.0]]),
                        points_per_dim=101)
)
K = [i for i, p in enumerate(problem.x_space.points[:, 0]) if abs(p) <= 1.0]
witness = suggest_domination_witness(problem, K_indices=K)
x_idx, coeffs = witness
res = check_compact_domination(problem, K, x_idx, coeffs)
print(f"  base points at x = {problem.x_space.points[list(x_idx), 0]}, "
      f"coefficients {np.round(coeffs, 3)} -> holds={res.holds}")

print("\nmoment condition with the all-ones ceiling, r = 2:")
h3 = check_moment_condition(problem, np.ones(problem.n_x), r=2.0)
print(f"  c = {h3.c:.4g} -> holds={h3.holds}")

print("\nradial profile scan:")
t = np.linspace(0.0, 12.0, 600)
for label, theta in [
    ("exp(-t^2/2)", np.exp(-t * t / 2)),
    ("bump at t=1", np.exp(-((t - 1.0) ** 2))),
    ("2 + sin t", 2.0 + np.sin(t)),
]:
    res = check_radial(t, theta, L_candidates=np.linspace(0.0, 6.0, 13))
    found = f"L = {res.L_found}" if res.holds else "no admissible cutoff"
    print(f"  {label:14} -> {found}")
