"""Fixed-point machinery for the discrete Schrödinger system.

The unknown is a positive potential ``u`` over the x grid.  Its dual over
the y grid is ``psi(u)_j = sum_i P[i,j] mu_i / u_i`` and the return map is
``phi(u)_i = sum_j P[i,j] nu_j / psi(u)_j``; positive fixed points of
``phi`` solve the system, and the coupling is recovered from
``a = mu/u``, ``b = nu/psi(u)``, ``pi = a P b``.

Two iteration schemes are provided: the truncated scheme

    u_{n+1} = max(U/(n+1), min(phi(u_n), U)),   u_1 = U,

which decreases monotonically, stays within [U/n, U], and keeps every
iterate strictly positive; and the plain scheme ``u_{n+1} = phi(u_n)``,
which is the classical potential form of Sinkhorn / iterative
proportional fitting.  A log-domain Sinkhorn solver is included as an
independent baseline, plus the kernel twisting transform
``p -> alpha(x) beta(y) p`` under which the coupling is invariant.

All maps are pure with respect to the problem; sums inside a map may be
evaluated in parallel over the output index, while the solver loops are
sequential in n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .extnum import (
    ExtOverflowError,
    INF,
    as_ext_array,
    ext_matvec,
    scaled_inverse,
    sum_ext,
    mul_ext,
    inv_ext,
)
from .problem import DiscreteProblem, DenseKernel, kernel_matrix

STATUS_CONVERGED = "converged-positive"
STATUS_DEGENERATE = "degenerate-zero"
STATUS_MAX_ITER = "max-iter"
STATUS_DIVERGENT = "divergent"

#: min phi below this multiple of min U, while still decreasing, is treated
#: as collapse to the trivial zero fixed point.
DEGENERATE_CUTOFF = 1e-13


class NonFiniteIntermediate(RuntimeError):
    """An operation that requires finite duals met an infinite one."""


class DegeneratePotential(ValueError):
    """Solution extraction was attempted from a zero or infinite potential."""


class MaxIterExceeded(RuntimeError):
    """An iteration budget ran out; carries the trace collected so far."""

    def __init__(self, message: str, trace=None, iterations: int = 0):
        super().__init__(message)
        self.trace = trace or []
        self.iterations = iterations


@dataclass
class TraceRecord:
    """One scheme step: statistics of u_n and of phi(u_n)."""

    n: int
    min_u: float
    max_u: float
    residual: float
    min_phi: float
    normalization: float


@dataclass
class SchemeState:
    """State of the truncated scheme after n steps (u is u_n)."""

    n: int
    u: np.ndarray
    ceiling: np.ndarray
    phi_u: np.ndarray | None = None
    early_exit_index: int | None = None


@dataclass
class FixedPointResult:
    u_star: np.ndarray
    iterations: int
    residual: float
    trace: list[TraceRecord]
    status: str
    early_exit_index: int | None = None
    psi_star: np.ndarray | None = field(default=None, repr=False)


@dataclass
class SchrodingerSolution:
    """Measures a, b, the coupling pi = a P b, and diagnostics."""

    a: np.ndarray
    b: np.ndarray
    pi: np.ndarray
    marginal_err_x: float
    marginal_err_y: float
    rel_entropy: float


# ---------------------------------------------------------------------------
# The dual maps
# ---------------------------------------------------------------------------


def psi(problem: DiscreteProblem, u: np.ndarray) -> np.ndarray:
    """Dual potential over the y grid: psi_j = sum_i P[i,j] mu_i / u_i.

    ``u`` is an extended vector (entries in [0, inf]); infinities are
    legal values in and out.  For finite ``u`` every entry of the result
    is strictly positive on a reduced problem.
    """
    u = as_ext_array(u)
    if u.shape != (problem.n_x,):
        raise ValueError(f"potential has shape {u.shape}, expected ({problem.n_x},)")
    P = kernel_matrix(problem)
    out = ext_matvec(P.T, scaled_inverse(problem.mu.weights, u))
    if np.isfinite(u).all() and not (out > 0).all():
        raise NonFiniteIntermediate(
            "dual of a finite potential vanished somewhere; is the problem reduced?"
        )
    return out


def phi(problem: DiscreteProblem, u: np.ndarray, psi_u: np.ndarray | None = None) -> np.ndarray:
    """Return map over the x grid: phi_i = sum_j P[i,j] nu_j / psi_j."""
    if psi_u is None:
        psi_u = psi(problem, u)
    P = kernel_matrix(problem)
    return ext_matvec(P, scaled_inverse(problem.nu.weights, psi_u))


def normalization_check(problem: DiscreteProblem, u: np.ndarray) -> float:
    """Return sum_i (phi(u)_i / u_i) mu_i, which equals 1 for positive u.

    The raw value is returned for diagnostics; the identity holds up to
    accumulation error for any strictly positive finite potential on a
    validated problem.
    """
    u = as_ext_array(u, allow_inf=False)
    if (u <= 0).any():
        raise ValueError("normalization_check requires a strictly positive potential")
    ps = psi(problem, u)
    if np.isinf(ps).any():
        raise NonFiniteIntermediate("psi has infinite entries")
    ph = phi(problem, u, psi_u=ps)
    if np.isinf(ph).any():
        raise NonFiniteIntermediate("phi has infinite entries")
    return math.fsum((ph / u) * problem.mu.weights)


def restricted_normalization(problem: DiscreteProblem, u: np.ndarray) -> tuple[float, float]:
    """Both sides of the mass identity for a potential with possible zeros.

    Left: the mu-integral of phi(u)/u restricted to the set where phi(u)
    is positive (extended-real valued).  Right: the nu-mass of the y
    points where psi(u) is finite.  The two agree for any 0 <= u <= U
    with psi(U) finite.
    """
    u = as_ext_array(u)
    ps = psi(problem, u)
    ph = phi(problem, u, psi_u=ps)
    if np.isinf(ph).any():
        raise NonFiniteIntermediate("phi has infinite entries")
    terms = []
    for i in np.flatnonzero(ph > 0):
        terms.append(mul_ext(float(problem.mu.weights[i] * ph[i]), inv_ext(float(u[i]))))
    lhs = sum_ext(terms)
    rhs = math.fsum(problem.nu.weights[np.isfinite(ps)])
    return lhs, rhs


# ---------------------------------------------------------------------------
# Truncated scheme
# ---------------------------------------------------------------------------


def _clamp_step(phi_u: np.ndarray, ceiling: np.ndarray, n_next: int) -> np.ndarray:
    # inner min first, then the floor, exactly as the scheme is written
    return np.maximum(ceiling / n_next, np.minimum(phi_u, ceiling))


def iterate_truncated(state: SchemeState, problem: DiscreteProblem) -> SchemeState:
    """One step of the truncated scheme; records the early-exit index.

    The early-exit index is the first n at which phi(u_n) <= U holds
    everywhere; from that point on the limit is guaranteed positive and
    the ceiling clamp no longer binds at the fixed point.
    """
    phi_u = phi(problem, state.u)
    early = state.early_exit_index
    if early is None and (phi_u <= state.ceiling).all():
        early = state.n
    u_next = _clamp_step(phi_u, state.ceiling, state.n + 1)
    return SchemeState(
        n=state.n + 1,
        u=u_next,
        ceiling=state.ceiling,
        phi_u=phi_u,
        early_exit_index=early,
    )


def _check_positive_finite(vec: np.ndarray, name: str) -> np.ndarray:
    vec = as_ext_array(vec)
    if np.isinf(vec).any() or (vec <= 0).any():
        raise ValueError(f"{name} must be strictly positive and finite")
    return vec


def solve_fortet(
    problem: DiscreteProblem,
    U: np.ndarray | None = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    degenerate_cutoff: float = DEGENERATE_CUTOFF,
    trace: bool = False,
) -> FixedPointResult:
    """Run the truncated scheme from u_1 = U until the iterate settles.

    Stops when the sup relative change of u drops to ``tol`` *and* the
    fixed-point residual ``||u - min(phi(u), U)||_inf`` is at most
    ``tol * ||U||_inf``; the returned status is then converged-positive.
    Collapse of phi toward zero (below ``degenerate_cutoff * min U``
    while still decreasing) reports degenerate-zero, and an exhausted
    budget reports max-iter.  The default ceiling is the all-ones vector.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    if U is None:
        U = np.ones(problem.n_x)
    U = _check_positive_finite(U, "ceiling U")
    if U.shape != (problem.n_x,):
        raise ValueError("ceiling U must have one entry per x point")

    kernel_positive = bool((kernel_matrix(problem) > 0).all())
    sup_U = float(np.max(U))
    min_U = float(np.min(U))

    u = U.copy()
    n = 1
    early_exit: int | None = None
    records: list[TraceRecord] = []
    prev_min_phi = INF
    status = STATUS_MAX_ITER
    rel = INF

    ps = psi(problem, u)
    ph = phi(problem, u, psi_u=ps)
    while True:
        min_phi = float(np.min(ph))
        if early_exit is None and (ph <= U).all():
            early_exit = n
        if min_phi == 0.0 and kernel_positive and float(np.max(ph)) != 0.0:
            raise NonFiniteIntermediate(
                "dichotomy violated: phi vanished at some points but not all"
            )
        if min_phi < degenerate_cutoff * min_U and min_phi < prev_min_phi:
            status = STATUS_DEGENERATE
            break
        prev_min_phi = min_phi

        u_next = _clamp_step(ph, U, n + 1)
        if not (u_next <= u).all():
            raise RuntimeError("monotone decrease of the truncated scheme violated")
        rel = float(np.max(np.abs(u_next - u) / u))
        if trace:
            records.append(
                TraceRecord(
                    n=n,
                    min_u=float(np.min(u)),
                    max_u=float(np.max(u)),
                    residual=rel,
                    min_phi=min_phi,
                    normalization=float(np.dot(problem.mu.weights, ph / u)),
                )
            )
        u = u_next
        n += 1
        ps = psi(problem, u)
        ph = phi(problem, u, psi_u=ps)
        if rel <= tol:
            residual = float(np.max(np.abs(u - np.minimum(ph, U))))
            if residual <= tol * sup_U:
                status = STATUS_CONVERGED
                break
        if n > max_iter:
            break

    residual = float(np.max(np.abs(u - np.minimum(ph, U))))
    return FixedPointResult(
        u_star=u,
        iterations=n - 1,
        residual=residual,
        trace=records,
        status=status,
        early_exit_index=early_exit,
        psi_star=ps,
    )


def solve_untruncated(
    problem: DiscreteProblem,
    u1: np.ndarray | None = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    degenerate_cutoff: float = DEGENERATE_CUTOFF,
    trace: bool = False,
) -> FixedPointResult:
    """Plain iteration u_{n+1} = phi(u_n) from u_1 (default all ones).

    Without the positivity floor the iteration may collapse to the zero
    fixed point (status degenerate-zero) or blow up past the overflow
    guard (status divergent).
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    if u1 is None:
        u1 = np.ones(problem.n_x)
    u = as_ext_array(u1).copy()
    if u.shape != (problem.n_x,):
        raise ValueError("u1 must have one entry per x point")
    scale = float(np.max(u))
    records: list[TraceRecord] = []
    status = STATUS_MAX_ITER
    n = 1
    rel = INF

    prev_min_phi = INF
    try:
        ps = psi(problem, u)
        ph = phi(problem, u, psi_u=ps)
        while True:
            min_phi = float(np.min(ph))
            max_phi = float(np.max(ph))
            if max_phi == 0.0 or (
                min_phi < degenerate_cutoff * max(scale, 1e-300) and min_phi < prev_min_phi
            ):
                status = STATUS_DEGENERATE
                break
            prev_min_phi = min_phi
            pos = u > 0
            rel = float(np.max(np.abs(ph[pos] - u[pos]) / u[pos])) if pos.any() else INF
            if trace:
                well_scaled = pos.all() and np.isfinite(ph).all()
                records.append(
                    TraceRecord(
                        n=n,
                        min_u=float(np.min(u)),
                        max_u=float(np.max(u)),
                        residual=rel,
                        min_phi=min_phi,
                        normalization=float(np.dot(problem.mu.weights, ph / u))
                        if well_scaled
                        else float("nan"),
                    )
                )
            u = ph
            n += 1
            ps = psi(problem, u)
            ph = phi(problem, u, psi_u=ps)
            if rel <= tol:
                residual = float(np.max(np.abs(u - ph)))
                if residual <= tol * float(np.max(u)):
                    status = STATUS_CONVERGED
                    break
            if n > max_iter:
                break
        residual = float(np.max(np.abs(u - ph)))
    except ExtOverflowError:
        status = STATUS_DIVERGENT
        residual = INF
        ps = None
    if np.isfinite(u).all() and float(np.max(u)) > 1e300:
        status = STATUS_DIVERGENT

    return FixedPointResult(
        u_star=u,
        iterations=n - 1,
        residual=residual,
        trace=records,
        status=status,
        early_exit_index=None,
        psi_star=ps,
    )


# ---------------------------------------------------------------------------
# Solution extraction and the Sinkhorn baseline
# ---------------------------------------------------------------------------


def _relative_entropy(problem: DiscreteProblem, pi: np.ndarray) -> float:
    ref = (
        kernel_matrix(problem)
        * problem.x_space.weights[:, None]
        * problem.y_space.weights[None, :]
    )
    mask = pi > 0
    return float(np.sum(pi[mask] * np.log(pi[mask] / ref[mask])))


def extract_solution(
    problem: DiscreteProblem,
    u_star: np.ndarray,
    psi_star: np.ndarray | None = None,
) -> SchrodingerSolution:
    """Build the measures and coupling from a positive finite potential.

    ``a = mu/u``, ``b = nu/psi(u)``, ``pi[i,j] = a_i P[i,j] b_j`` exactly
    by construction.  The free scale is fixed by normalizing sum(a) = 1,
    which leaves pi unchanged.
    """
    u_star = as_ext_array(u_star)
    if (u_star <= 0).any() or np.isinf(u_star).any():
        raise DegeneratePotential("potential must be strictly positive and finite")
    if psi_star is None:
        psi_star = psi(problem, u_star)
    if (psi_star <= 0).any() or np.isinf(psi_star).any():
        raise DegeneratePotential("dual potential must be strictly positive and finite")
    a = problem.mu.weights / u_star
    b = problem.nu.weights / psi_star
    s = float(a.sum())
    a = a / s
    b = b * s
    P = kernel_matrix(problem)
    pi = a[:, None] * P * b[None, :]
    err_x = float(np.max(np.abs(pi.sum(axis=1) - problem.mu.weights)))
    err_y = float(np.max(np.abs(pi.sum(axis=0) - problem.nu.weights)))
    return SchrodingerSolution(
        a=a,
        b=b,
        pi=pi,
        marginal_err_x=err_x,
        marginal_err_y=err_y,
        rel_entropy=_relative_entropy(problem, pi),
    )


def potential_from_solution(problem: DiscreteProblem, solution: SchrodingerSolution) -> np.ndarray:
    """Recover the potential u = mu / a underlying a solution."""
    return problem.mu.weights / solution.a


def sinkhorn_baseline(
    problem: DiscreteProblem,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> SchrodingerSolution:
    """Log-domain Sinkhorn / IPF on the kernel matrix.

    Alternates b <- nu / (P^T a) and a <- mu / (P b) in log space until
    both marginal sup-residuals are at most ``tol``.  Serves as the
    independent oracle for the Fortet solver; requires a strictly
    positive kernel.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    P = kernel_matrix(problem)
    if not (P > 0).all():
        raise ValueError("sinkhorn_baseline requires a strictly positive kernel")
    logP = np.log(P)
    logmu = np.log(problem.mu.weights)
    lognu = np.log(problem.nu.weights)
    f = np.zeros(problem.n_x)
    g = lognu - logsumexp(logP + f[:, None], axis=0)
    for it in range(1, max_iter + 1):
        f = logmu - logsumexp(logP + g[None, :], axis=1)
        # rows are exact after the f update; only the column error remains
        col_log = logsumexp(logP + f[:, None], axis=0)
        col_err = float(np.max(np.abs(np.exp(g + col_log) - problem.nu.weights)))
        if col_err <= tol:
            break
        g = lognu - col_log
    else:
        raise MaxIterExceeded(
            f"sinkhorn did not reach tol={tol:g} in {max_iter} iterations",
            iterations=max_iter,
        )
    a = np.exp(f)
    b = np.exp(g)
    s = float(a.sum())
    a = a / s
    b = b * s
    pi = a[:, None] * P * b[None, :]
    return SchrodingerSolution(
        a=a,
        b=b,
        pi=pi,
        marginal_err_x=float(np.max(np.abs(pi.sum(axis=1) - problem.mu.weights))),
        marginal_err_y=float(np.max(np.abs(pi.sum(axis=0) - problem.nu.weights))),
        rel_entropy=_relative_entropy(problem, pi),
    )


# ---------------------------------------------------------------------------
# Twisting
# ---------------------------------------------------------------------------


def twist(problem: DiscreteProblem, alpha: np.ndarray, beta: np.ndarray) -> DiscreteProblem:
    """Replace the kernel by alpha(x) beta(y) p(x, y); marginals unchanged."""
    alpha = _check_positive_finite(alpha, "alpha")
    beta = _check_positive_finite(beta, "beta")
    if alpha.shape != (problem.n_x,) or beta.shape != (problem.n_y,):
        raise ValueError("alpha/beta must align with the grids")
    P = kernel_matrix(problem)
    return DiscreteProblem(
        x_space=problem.x_space,
        y_space=problem.y_space,
        mu=problem.mu,
        nu=problem.nu,
        kernel=DenseKernel(alpha[:, None] * P * beta[None, :]),
    )


def untwist_solution(
    solution: SchrodingerSolution, alpha: np.ndarray, beta: np.ndarray
) -> SchrodingerSolution:
    """Map a solution of the twisted problem back to the original kernel.

    The measures transform by (a, b) -> (alpha * a, beta * b); the
    coupling is untouched.  The relative entropy is restated against the
    original reference, which shifts it by the pi-averaged log twists.
    """
    alpha = _check_positive_finite(alpha, "alpha")
    beta = _check_positive_finite(beta, "beta")
    a = alpha * solution.a
    b = beta * solution.b
    s = float(a.sum())
    rows = solution.pi.sum(axis=1)
    cols = solution.pi.sum(axis=0)
    shift = float(np.dot(rows, np.log(alpha)) + np.dot(cols, np.log(beta)))
    return SchrodingerSolution(
        a=a / s,
        b=b * s,
        pi=solution.pi,
        marginal_err_x=solution.marginal_err_x,
        marginal_err_y=solution.marginal_err_y,
        rel_entropy=solution.rel_entropy + shift,
    )
