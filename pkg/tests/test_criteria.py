
import numpy as np
import pytest

from schrobridge import (
    DiscreteProblem,
    GaussianProblem,
    INF,
    PreconditionFailed,
    check_integral_criterion,
    check_compact_domination,
    check_moment_condition,
    check_radial,
    discretize_gaussian,
    full_report,
    kernel_matrix,
    make_radial_kernel,
    psi,
    suggest_domination_witness,
    sufficient_for_existence,
    validate_reduction,
)
from conftest import build_dense_problem, random_positive_problem


# ---------------------------------------------------------------------------
# integral criterion
# ---------------------------------------------------------------------------


def test_integral_constant_kernel():
    rng = np.random.default_rng(0)
    mu = rng.uniform(0.2, 1.0, 5)
    mu /= mu.sum()
    nu = rng.uniform(0.2, 1.0, 4)
    nu /= nu.sum()
    problem = build_dense_problem(np.ones((5, 4)), mu, nu)
    res = check_integral_criterion(problem)
    assert res.xy.finite and res.yx.finite
    assert res.xy.value == pytest.approx(1.0, abs=1e-14)
    assert res.yx.value == pytest.approx(1.0, abs=1e-14)


def test_integral_zero_column_is_inf():
    problem = build_dense_problem([[1.0, 0.0], [1.0, 0.0]], [0.5, 0.5], [0.5, 0.5])
    res = check_integral_criterion(problem)
    assert res.xy.value == INF
    assert not res.xy.finite


def test_integral_transpose_swaps_directions_exactly():
    rng = np.random.default_rng(1)
    problem = random_positive_problem(rng, 7, 9)
    res = check_integral_criterion(problem)
    res_t = check_integral_criterion(problem.transposed())
    assert res_t.xy.value == res.yx.value
    assert res_t.yx.value == res.xy.value


def test_integral_guard_flags_enormous_values():
    # one y point nearly unreachable: the inverse inner sum explodes
    problem = build_dense_problem(
        [[1.0, 1e-40], [1.0, 1e-40]], [0.5, 0.5], [0.5, 0.5]
    )
    res = check_integral_criterion(problem)
    assert res.xy.value > 1e15
    assert not res.xy.finite
    loose = check_integral_criterion(problem, finite_guard=1e45)
    assert loose.xy.finite


# ---------------------------------------------------------------------------
# compact domination
# ---------------------------------------------------------------------------


def test_domination_self_domination(two_by_two):
    res = check_compact_domination(two_by_two, K_indices=[0], x_indices=[0], coefficients=[1.0])
    assert res.holds
    assert res.violation_index is None
    assert res.continuity == "asserted-not-checked"


def test_domination_spike_violation():
    P = np.ones((3, 3))
    P[1, 2] = 50.0  # spike inside K that no combination of rows 0,2 covers
    problem = build_dense_problem(P, [1 / 3] * 3, [1 / 3] * 3)
    res = check_compact_domination(problem, K_indices=[0, 1], x_indices=[2], coefficients=[10.0])
    assert not res.holds
    assert res.violation_index == 2


def test_domination_monotone_in_coefficients():
    rng = np.random.default_rng(2)
    problem = random_positive_problem(rng, 6, 8)
    witness = suggest_domination_witness(problem, K_indices=range(6))
    assert witness is not None
    x_idx, coeffs = witness
    res = check_compact_domination(problem, range(6), x_idx, coeffs)
    assert res.holds
    bigger = [2.0 * c for c in coeffs]
    assert check_compact_domination(problem, range(6), x_idx, bigger).holds


def test_domination_gaussian_witness_from_boundary():
    gp = GaussianProblem(a=[[1.0]], b=[[1.0]], c=[[1.0]])
    problem = validate_reduction(discretize_gaussian(gp, points_per_dim=51))
    K = [i for i, p in enumerate(problem.x_space.points[:, 0]) if abs(p) <= 1.0]
    witness = suggest_domination_witness(problem, K_indices=K)
    assert witness is not None
    x_idx, coeffs = witness
    res = check_compact_domination(problem, K, x_idx, coeffs)
    assert res.holds
    assert res.continuity == "declared-by-kernel-kind"


def test_domination_input_validation(two_by_two):
    with pytest.raises(ValueError):
        check_compact_domination(two_by_two, [], [0], [1.0])
    with pytest.raises(ValueError):
        check_compact_domination(two_by_two, [0], [0], [-1.0])


# ---------------------------------------------------------------------------
# exponential-moment condition
# ---------------------------------------------------------------------------


def test_moment_constant_kernel():
    problem = build_dense_problem(np.ones((3, 3)), [1 / 3] * 3, [1 / 3] * 3)
    res = check_moment_condition(problem, np.ones(3), r=2.0, x_o_index=0)
    assert res.holds
    assert res.c == pytest.approx(1.0, abs=1e-14)


def loop_moment_constant(problem, U, r, x_o):
    """Independent summation oracle for the moment constant."""
    P = kernel_matrix(problem)
    psi_U = psi(problem, U)
    best = 0.0
    for i in range(problem.n_x):
        total = 0.0
        for j in range(problem.n_y):
            total += (
                (P[i, j] / P[x_o, j]) ** r
                * P[x_o, j]
                * problem.nu.weights[j]
                / psi_U[j]
            )
        best = max(best, total / U[i] ** r)
    return best


def test_moment_two_by_two_matches_oracle(two_by_two):
    res = check_moment_condition(two_by_two, np.ones(2), r=2.0, x_o_index=0)
    assert res.holds
    assert res.c == pytest.approx(loop_moment_constant(two_by_two, np.ones(2), 2.0, 0), rel=1e-14)


def test_moment_infinite_ceiling_fails_precondition(two_by_two):
    with pytest.raises(PreconditionFailed) as exc:
        check_moment_condition(two_by_two, np.array([INF, 1.0]))
    assert exc.value.part == "psi"
    assert exc.value.index == 0


def test_moment_scale_invariance():
    rng = np.random.default_rng(3)
    problem = random_positive_problem(rng, 5, 6)
    U = rng.uniform(0.5, 2.0, 5)
    r = 2.5
    base = check_moment_condition(problem, U, r=r)
    for kappa in (0.01, 3.0, 250.0):
        scaled = check_moment_condition(problem, kappa * U, r=r)
        assert scaled.holds == base.holds
        assert scaled.c == pytest.approx(base.c * kappa ** (1.0 - r), rel=1e-10)


def test_moment_requires_r_above_one(two_by_two):
    with pytest.raises(ValueError):
        check_moment_condition(two_by_two, np.ones(2), r=1.0)


# ---------------------------------------------------------------------------
# radial profile
# ---------------------------------------------------------------------------


def test_radial_gaussian_profile():
    t = np.linspace(0.0, 10.0, 400)
    res = check_radial(t, np.exp(-(t**2) / 2.0), L_candidates=[0.0, 1.0, 2.0])
    assert res.holds
    assert res.L_found == 0.0


def test_radial_shifted_bump():
    t = np.linspace(0.0, 6.0, 600)
    res = check_radial(t, np.exp(-((t - 1.0) ** 2)), L_candidates=[0.0, 0.5, 1.0, 1.5])
    assert res.holds
    assert res.L_found == 1.0


def test_radial_oscillation_never_settles():
    t = np.linspace(0.0, 20.0, 2000)
    res = check_radial(t, 2.0 + np.sin(t), L_candidates=np.linspace(0.0, 13.0, 27))
    assert not res.holds
    assert res.L_found is None


def test_radial_rejects_nonpositive_profile():
    t = np.linspace(0.0, 5.0, 50)
    with pytest.raises(ValueError):
        check_radial(t, np.sin(t), L_candidates=[0.0])


# ---------------------------------------------------------------------------
# assembled report
# ---------------------------------------------------------------------------


def test_full_report_positive_problem(two_by_two):
    report = full_report(two_by_two)
    assert report.positivity and report.boundedness
    assert report.sup_kernel == 4.0
    assert sufficient_for_existence(report)


def test_full_report_radial_kernel(gaussian_1d_small):
    radial_problem = DiscreteProblem(
        x_space=gaussian_1d_small.x_space,
        y_space=gaussian_1d_small.y_space,
        mu=gaussian_1d_small.mu,
        nu=gaussian_1d_small.nu,
        kernel=make_radial_kernel("gaussian", sigma=1.0),
    )
    report = full_report(radial_problem)
    assert report.radial is not None
    assert report.radial.holds
    assert report.radial.L_found == 0.0


def test_full_report_with_witnesses(two_by_two):
    report = full_report(
        two_by_two,
        domination_witness=([0, 1], [1], [2.0]),
        moment_U=np.ones(2),
    )
    assert report.domination is not None and report.domination.holds
    assert report.moment is not None and report.moment.holds


def test_one_finite_direction_still_suffices():
    # only the y side has a nearly-unreachable point: xy blows up but the
    # mirrored direction stays moderate, and one direction is enough
    problem = build_dense_problem(
        [[1.0, 1e-40], [1.0, 1e-40]], [0.5, 0.5], [0.5, 0.5]
    )
    report = full_report(problem)
    assert not report.integral.xy.finite
    assert report.integral.yx.finite
    assert sufficient_for_existence(report)


def test_insufficient_when_both_directions_blow_up():
    # a nearly-unreachable point on each side trips the guard both ways
    problem = build_dense_problem(
        [[1.0, 1e-40], [1e-40, 1e-40]], [0.5, 0.5], [0.5, 0.5]
    )
    report = full_report(problem)
    assert not report.integral.xy.finite and not report.integral.yx.finite
    assert not sufficient_for_existence(report)


def test_finite_integral_criterion_implies_convergent_solve():
    # cross-module property: a strictly positive bounded kernel with a
    # finite integral criterion puts the truncated scheme in its
    # guaranteed-convergence regime
    from schrobridge import solve_fortet, STATUS_CONVERGED

    rng = np.random.default_rng(17)
    for _ in range(5):
        problem = random_positive_problem(rng, int(rng.integers(3, 20)),
                                          int(rng.integers(3, 20)))
        report = check_integral_criterion(problem)
        assert report.xy.finite  # moderate random kernels stay finite
        result = solve_fortet(problem)
        assert result.status == STATUS_CONVERGED
