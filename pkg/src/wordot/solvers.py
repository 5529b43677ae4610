"""Transport-plan solvers: exact and entropic balanced, partial and
unbalanced optimal transport.

All solvers minimize the linear transport cost <C, P> over a constraint
set that varies by family:

* balanced: row sums equal ``a``, column sums equal ``b``;
* partial: row/column sums bounded above by ``a``/``b``, total mass
  fixed to ``m``;
* unbalanced: unconstrained marginals, with KL deviation penalties of
  weight ``tau`` replacing the hard constraints.

The entropic variants add ``epsilon * sum(P * (log P - 1))`` to the
objective and are solved with multiplicative scaling iterations; a
log-domain path is used automatically once ``epsilon`` drops below
``LOG_DOMAIN_EPS`` so that ``exp(-C/epsilon)`` cannot underflow.  With
this entropy convention the unbalanced solution at ``tau = 0`` is
exactly ``exp(-C/epsilon)``.

Exact problems are linear programs and are delegated to HiGHS via
``scipy.optimize.linprog``; the partial problem is reduced to a
balanced one with a single dummy row and column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .cost import CostMatrix
from .errors import NumericalError
from .fertility import MassVector

LOG_DOMAIN_EPS = 0.05

_SIMPLEX_TOL = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the iterative solvers.

    ``tolerance`` is an L1 marginal residual for the balanced solver, an
    L1 plan-change threshold for the partial one, and an L-infinity
    fixed-point residual on the row scaling vector for the unbalanced
    one.
    """

    epsilon: float = 0.1
    tolerance: float = 1e-6
    max_iterations: int = 1000
    tau: float = 1.0
    m_fraction: float = 1.0
    log_domain: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tau < 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")
        if not 0.0 <= self.m_fraction <= 1.0:
            raise ValueError(f"m_fraction must lie in [0, 1], got {self.m_fraction}")

    @property
    def use_log_domain(self) -> bool:
        return self.log_domain or self.epsilon < LOG_DOMAIN_EPS


@dataclass(frozen=True)
class Coupling:
    """A transport plan with its cost and convergence diagnostics.

    ``objective`` is always the recomputed linear cost ``sum(C * plan)``;
    ``marginal_error`` is the residual named in :class:`SolverConfig`.
    """

    plan: np.ndarray
    objective: float
    converged: bool
    iterations: int
    marginal_error: float


def _finish(cost: np.ndarray, plan: np.ndarray, converged: bool, iterations: int,
            marginal_error: float) -> Coupling:
    if not np.isfinite(plan).all():
        raise NumericalError("transport plan has non-finite entries")
    plan = np.maximum(plan, 0.0)
    objective = float(np.sum(cost * plan))
    return Coupling(plan=plan, objective=objective, converged=converged,
                    iterations=iterations, marginal_error=float(marginal_error))


def _check_shapes(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    if cost.shape != (a.size, b.size):
        raise ValueError(
            f"cost shape {cost.shape} incompatible with marginals "
            f"({a.size}, {b.size})"
        )


def _require_simplex(values: np.ndarray, name: str) -> None:
    if abs(values.sum() - 1.0) > _SIMPLEX_TOL:
        raise ValueError(f"marginal {name} must sum to 1 (got {values.sum():.6g})")


def _balance_residual(plan: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(plan.sum(axis=1) - a).sum() + np.abs(plan.sum(axis=0) - b).sum())


def _partial_residual(plan: np.ndarray, a: np.ndarray, b: np.ndarray, mass: float) -> float:
    row_excess = np.maximum(plan.sum(axis=1) - a, 0.0).sum()
    col_excess = np.maximum(plan.sum(axis=0) - b, 0.0).sum()
    return float(row_excess + col_excess + abs(plan.sum() - mass))


def _transport_lp(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Balanced transportation LP for arbitrary equal-total marginals."""
    n, m = cost.shape
    if abs(a.sum() - b.sum()) > 1e-9 * max(1.0, a.sum()):
        raise ValueError("balanced transport requires equal total mass")
    var = np.arange(n * m)
    rows = np.concatenate([np.repeat(np.arange(n), m), n + np.tile(np.arange(m), n)])
    cols = np.concatenate([var, var])
    constraints = sparse.coo_matrix(
        (np.ones(2 * n * m), (rows, cols)), shape=(n + m, n * m)
    ).tocsr()
    result = linprog(
        cost.ravel(),
        A_eq=constraints,
        b_eq=np.concatenate([a, b]),
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10},
    )
    if result.status != 0:
        raise NumericalError(f"transport LP failed: {result.message}")
    return np.maximum(result.x.reshape(n, m), 0.0)


def exact_bot(cost: CostMatrix, a: MassVector, b: MassVector) -> Coupling:
    """Exact balanced transport between simplex marginals."""
    C, av, bv = cost.values, a.values, b.values
    _check_shapes(C, av, bv)
    _require_simplex(av, "a")
    _require_simplex(bv, "b")
    if C.size == 1:
        plan = np.array([[1.0]])
    else:
        plan = _transport_lp(C, av, bv)
    return _finish(C, plan, converged=True, iterations=0,
                   marginal_error=_balance_residual(plan, av, bv))


def exact_pot(cost: CostMatrix, a: MassVector, b: MassVector, mass: float) -> Coupling:
    """Exact partial transport of total mass ``mass``.

    Reduction to a balanced problem: one dummy row and column of cost 0
    absorb the untransported mass; the dummy-to-dummy corner costs
    ``2 * max(C) + 1`` so it never takes real mass.
    """
    C, av, bv = cost.values, a.values, b.values
    _check_shapes(C, av, bv)
    cap = min(av.sum(), bv.sum())
    if not -1e-12 <= mass <= cap + 1e-12:
        raise ValueError(f"transported mass {mass} outside [0, {cap:.6g}]")
    mass = min(max(mass, 0.0), cap)
    if mass == 0.0:
        plan = np.zeros_like(C)
        return _finish(C, plan, converged=True, iterations=0, marginal_error=0.0)
    if C.size == 1:
        plan = np.array([[mass]])
        return _finish(C, plan, converged=True, iterations=0,
                       marginal_error=_partial_residual(plan, av, bv, mass))
    n, m = C.shape
    extended = np.zeros((n + 1, m + 1))
    extended[:n, :m] = C
    extended[n, m] = 2.0 * C.max() + 1.0
    a_ext = np.append(av, bv.sum() - mass)
    b_ext = np.append(bv, av.sum() - mass)
    plan = _transport_lp(extended, a_ext, b_ext)[:n, :m]
    return _finish(C, plan, converged=True, iterations=0,
                   marginal_error=_partial_residual(plan, av, bv, mass))


def sinkhorn_bot(cost: CostMatrix, a: MassVector, b: MassVector,
                 config: SolverConfig) -> Coupling:
    """Entropic balanced transport via alternating diagonal scaling.

    Iterates ``u <- a / (K v)``, ``v <- b / (K^T u)`` on
    ``K = exp(-C/epsilon)`` from ``v = 1`` until the L1 marginal
    residual of ``diag(u) K diag(v)`` drops below the tolerance.
    """
    C, av, bv = cost.values, a.values, b.values
    _check_shapes(C, av, bv)
    _require_simplex(av, "a")
    _require_simplex(bv, "b")
    if C.size == 1:
        return _finish(C, np.array([[1.0]]), converged=True, iterations=0,
                       marginal_error=0.0)
    if config.use_log_domain:
        return _sinkhorn_bot_log(C, av, bv, config)
    return _sinkhorn_bot_mult(C, av, bv, config)


def _sinkhorn_bot_mult(C, a, b, config: SolverConfig) -> Coupling:
    kernel = np.exp(-C / config.epsilon)
    v = np.ones(b.size)
    u = np.ones(a.size)
    error = np.inf
    iterations = 0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for iterations in range(1, config.max_iterations + 1):
            u = a / (kernel @ v)
            kt_u = kernel.T @ u
            v = b / kt_u
            if not (np.isfinite(u).all() and np.isfinite(v).all()):
                raise NumericalError(
                    "non-finite scaling vector: epsilon too small for "
                    "multiplicative updates, enable log_domain"
                )
            error = (np.abs(u * (kernel @ v) - a).sum()
                     + np.abs(v * kt_u - b).sum())
            if error < config.tolerance:
                break
    plan = u[:, None] * kernel * v[None, :]
    return _finish(C, plan, converged=error < config.tolerance,
                   iterations=iterations, marginal_error=error)


def _logsumexp(values: np.ndarray, axis: int) -> np.ndarray:
    peak = values.max(axis=axis)
    safe_peak = np.where(np.isfinite(peak), peak, 0.0)
    if axis == 1:
        shifted = values - safe_peak[:, None]
    else:
        shifted = values - safe_peak[None, :]
    return safe_peak + np.log(np.exp(shifted).sum(axis=axis))


def _logsumexp_all(values: np.ndarray) -> float:
    peak = values.max()
    if not np.isfinite(peak):
        peak = 0.0
    return float(peak + np.log(np.exp(values - peak).sum()))


def _sinkhorn_bot_log(C, a, b, config: SolverConfig) -> Coupling:
    log_kernel = -C / config.epsilon
    log_a = np.log(a)
    log_b = np.log(b)
    log_u = np.zeros(a.size)
    log_v = np.zeros(b.size)
    error = np.inf
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        log_u = log_a - _logsumexp(log_kernel + log_v[None, :], axis=1)
        log_v = log_b - _logsumexp(log_kernel + log_u[:, None], axis=0)
        log_plan = log_kernel + log_u[:, None] + log_v[None, :]
        row = np.exp(_logsumexp(log_plan, axis=1))
        col = np.exp(_logsumexp(log_plan, axis=0))
        error = np.abs(row - a).sum() + np.abs(col - b).sum()
        if error < config.tolerance:
            break
    plan = np.exp(log_kernel + log_u[:, None] + log_v[None, :])
    return _finish(C, plan, converged=error < config.tolerance,
                   iterations=iterations, marginal_error=error)


def sinkhorn_pot(cost: CostMatrix, a: MassVector, b: MassVector, mass: float,
                 config: SolverConfig) -> Coupling:
    """Entropic partial transport via cyclic multiplicative projections.

    Starting from ``exp(-C/epsilon)`` rescaled to total mass ``mass``,
    each sweep caps row sums at ``a``, caps column sums at ``b``, then
    renormalizes the total mass; sweeps stop once the plan is stable in
    L1.
    """
    C, av, bv = cost.values, a.values, b.values
    _check_shapes(C, av, bv)
    cap = min(av.sum(), bv.sum())
    if not -1e-12 <= mass <= cap + 1e-12:
        raise ValueError(f"transported mass {mass} outside [0, {cap:.6g}]")
    mass = min(max(mass, 0.0), cap)
    if mass == 0.0:
        return _finish(C, np.zeros_like(C), converged=True, iterations=0,
                       marginal_error=0.0)
    if C.size == 1:
        plan = np.array([[mass]])
        return _finish(C, plan, converged=True, iterations=0,
                       marginal_error=_partial_residual(plan, av, bv, mass))
    if config.use_log_domain:
        return _sinkhorn_pot_log(C, av, bv, mass, config)
    return _sinkhorn_pot_mult(C, av, bv, mass, config)


def _sinkhorn_pot_mult(C, a, b, mass, config: SolverConfig) -> Coupling:
    kernel = np.exp(-C / config.epsilon)
    plan = kernel * (mass / kernel.sum())
    error = np.inf
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        previous = plan
        row = plan.sum(axis=1)
        plan = plan * np.minimum(np.divide(a, row, out=np.ones_like(a), where=row > 0), 1.0)[:, None]
        col = plan.sum(axis=0)
        plan = plan * np.minimum(np.divide(b, col, out=np.ones_like(b), where=col > 0), 1.0)[None, :]
        plan = plan * (mass / plan.sum())
        if not np.isfinite(plan).all():
            raise NumericalError(
                "non-finite plan: epsilon too small for multiplicative "
                "updates, enable log_domain"
            )
        error = np.abs(plan - previous).sum()
        if error < config.tolerance:
            break
    return _finish(C, plan, converged=error < config.tolerance,
                   iterations=iterations,
                   marginal_error=_partial_residual(plan, a, b, mass))


def _sinkhorn_pot_log(C, a, b, mass, config: SolverConfig) -> Coupling:
    log_kernel = -C / config.epsilon
    log_plan = log_kernel + (np.log(mass) - _logsumexp_all(log_kernel))
    log_a = np.log(a)
    log_b = np.log(b)
    plan = np.exp(log_plan)
    error = np.inf
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        previous = plan
        log_row = _logsumexp(log_plan, axis=1)
        log_plan = log_plan + np.minimum(log_a - log_row, 0.0)[:, None]
        log_col = _logsumexp(log_plan, axis=0)
        log_plan = log_plan + np.minimum(log_b - log_col, 0.0)[None, :]
        log_plan = log_plan + (np.log(mass) - _logsumexp_all(log_plan))
        plan = np.exp(log_plan)
        error = np.abs(plan - previous).sum()
        if error < config.tolerance:
            break
    return _finish(C, plan, converged=error < config.tolerance,
                   iterations=iterations,
                   marginal_error=_partial_residual(plan, a, b, mass))


def sinkhorn_uot(cost: CostMatrix, a: MassVector, b: MassVector,
                 config: SolverConfig) -> Coupling:
    """Entropic unbalanced transport with KL marginal penalties.

    Generalized scaling with exponent ``f = tau / (tau + epsilon)``:
    ``u <- (a / (K v))^f``, ``v <- (b / (K^T u))^f`` from ``v = 1``,
    stopping on the L-infinity change of ``u``.  At ``tau = 0`` the
    penalties vanish and the plan is exactly ``exp(-C/epsilon)``.
    """
    C, av, bv = cost.values, a.values, b.values
    _check_shapes(C, av, bv)
    exponent = config.tau / (config.tau + config.epsilon)
    if C.size == 1:
        # Stationarity of the 1x1 objective in closed form.
        share = config.tau / (2.0 * config.tau + config.epsilon)
        value = (av[0] * bv[0]) ** share * np.exp(-C[0, 0] / (2.0 * config.tau + config.epsilon))
        return _finish(C, np.array([[value]]), converged=True, iterations=0,
                       marginal_error=0.0)
    if config.use_log_domain:
        return _sinkhorn_uot_log(C, av, bv, exponent, config)
    return _sinkhorn_uot_mult(C, av, bv, exponent, config)


def _sinkhorn_uot_mult(C, a, b, exponent, config: SolverConfig) -> Coupling:
    kernel = np.exp(-C / config.epsilon)
    u = np.ones(a.size)
    v = np.ones(b.size)
    error = np.inf
    iterations = 0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for iterations in range(1, config.max_iterations + 1):
            previous = u
            u = (a / (kernel @ v)) ** exponent
            v = (b / (kernel.T @ u)) ** exponent
            if not (np.isfinite(u).all() and np.isfinite(v).all()):
                raise NumericalError(
                    "non-finite scaling vector: epsilon too small for "
                    "multiplicative updates, enable log_domain"
                )
            error = np.abs(u - previous).max()
            if error < config.tolerance:
                break
    plan = u[:, None] * kernel * v[None, :]
    return _finish(C, plan, converged=error < config.tolerance,
                   iterations=iterations, marginal_error=error)


def _sinkhorn_uot_log(C, a, b, exponent, config: SolverConfig) -> Coupling:
    log_kernel = -C / config.epsilon
    log_a = np.log(a)
    log_b = np.log(b)
    log_u = np.zeros(a.size)
    log_v = np.zeros(b.size)
    error = np.inf
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        previous = log_u
        log_u = exponent * (log_a - _logsumexp(log_kernel + log_v[None, :], axis=1))
        log_v = exponent * (log_b - _logsumexp(log_kernel + log_u[:, None], axis=0))
        error = np.abs(np.exp(log_u) - np.exp(previous)).max()
        if error < config.tolerance:
            break
    plan = np.exp(log_kernel + log_u[:, None] + log_v[None, :])
    return _finish(C, plan, converged=error < config.tolerance,
                   iterations=iterations, marginal_error=error)
