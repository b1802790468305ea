"""Bound-constrained damped least squares.

Small Levenberg-Marquardt-style minimizer for chi-square objectives
sum(r_i(p)^2) with box bounds enforced by projection. Deterministic: no
randomness, no state outside the call.

The iteration runs in scaled coordinates q = p / scales so that the normal
equations stay well conditioned when parameters differ by many orders of
magnitude, and the Jacobian uses central finite differences with fixed
steps in q so behavior does not change near parameter zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LAMBDA_INIT = 1e-3
_LAMBDA_SHRINK = 0.33
_LAMBDA_GROW = 10.0
_LAMBDA_MAX = 1e15
_FD_STEP = 1e-6
_FTOL = 1e-12
_REL_FLOOR = 1e-3


@dataclass(frozen=True)
class LeastSquaresSolution:
    params: np.ndarray
    covariance: np.ndarray
    cost: float
    residual_norm: float
    converged: bool
    iterations: int
    status: str


def _fd_jacobian(residual_fn, q, r0, lower, upper):
    """Finite-difference Jacobian: central in the interior, one-sided at an
    active bound. One-sided differences matter when the model is even in a
    parameter bounded at zero: the central difference there is identically
    zero and would leave the parameter stuck on the bound."""
    jac = np.empty((r0.size, q.size))
    for j in range(q.size):
        if q[j] - _FD_STEP < lower[j]:
            hi = q.copy()
            hi[j] += _FD_STEP
            jac[:, j] = (np.asarray(residual_fn(hi)) - r0) / _FD_STEP
        elif q[j] + _FD_STEP > upper[j]:
            lo = q.copy()
            lo[j] -= _FD_STEP
            jac[:, j] = (r0 - np.asarray(residual_fn(lo))) / _FD_STEP
        else:
            hi = q.copy()
            lo = q.copy()
            hi[j] += _FD_STEP
            lo[j] -= _FD_STEP
            jac[:, j] = (
                np.asarray(residual_fn(hi)) - np.asarray(residual_fn(lo))
            ) / (2.0 * _FD_STEP)
    return jac


def _projected_gradient(grad, q, lower, upper):
    """First-order stationarity violation per scaled parameter.

    At an active lower bound only a negative gradient component (descent
    into the feasible region) counts, symmetrically at an upper bound.
    """
    edge = 1e-12
    viol = np.abs(grad)
    at_lower = q <= lower + edge
    at_upper = q >= upper - edge
    viol[at_lower] = np.maximum(0.0, -grad[at_lower])
    viol[at_upper & ~at_lower] = np.maximum(0.0, grad[at_upper & ~at_lower])
    return viol


def _rel_step(step, q):
    return float(np.max(np.abs(step) / np.maximum(np.abs(q), _REL_FLOOR)))


def solve_damped_least_squares(
    residual_fn,
    initial: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    scales: np.ndarray,
    max_iterations: int = 200,
    step_tolerance: float = 1e-10,
    gradient_tolerance: float = 1e-8,
) -> LeastSquaresSolution:
    """Minimize sum(residual_fn(p)^2) over lower <= p <= upper.

    `scales` gives the characteristic magnitude of each parameter.
    Convergence, in scaled coordinates: relative parameter step (proposed
    or taken) below `step_tolerance`; or scaled projected gradient below
    `gradient_tolerance` times the cost; or an undamped accepted step that
    no longer reduces the cost measurably.
    """
    scales = np.asarray(scales, dtype=float)
    lo = np.asarray(lower, dtype=float) / scales
    hi = np.asarray(upper, dtype=float) / scales

    def scaled_residuals(q):
        return np.asarray(residual_fn(q * scales), dtype=float)

    q = np.clip(np.asarray(initial, dtype=float) / scales, lo, hi)
    residuals = scaled_residuals(q)
    cost = float(residuals @ residuals)

    lam = _LAMBDA_INIT
    converged = False
    status = "iteration limit reached"
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        jac = _fd_jacobian(scaled_residuals, q, residuals, lo, hi)
        grad = jac.T @ residuals
        if _projected_gradient(grad, q, lo, hi).max() <= gradient_tolerance * max(
            cost, 1e-300
        ):
            converged = True
            status = "gradient below tolerance"
            break

        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        floor = 1e-12 * max(float(diag.max()), 1e-300)
        diag = np.maximum(diag, floor)

        def damped_step(damping):
            system = jtj + damping * np.diag(diag)
            try:
                return np.linalg.solve(system, -grad)
            except np.linalg.LinAlgError:
                return np.linalg.lstsq(system, -grad, rcond=None)[0]

        # Resolution check on the essentially undamped step: if full
        # Gauss-Newton cannot move the parameters, the optimum is resolved.
        # A damped micro-step is no such evidence, so lam plays no part here.
        free = np.clip(q + damped_step(1e-14), lo, hi) - q
        if _rel_step(free, q) < step_tolerance:
            converged = True
            status = "step below tolerance"
            break

        accepted = False
        first_try = True
        while True:
            lam_used = lam
            trial = np.clip(q + damped_step(lam), lo, hi)
            trial_residuals = scaled_residuals(trial)
            trial_cost = float(trial_residuals @ trial_residuals)
            if trial_cost <= cost:
                improvement = cost - trial_cost
                q = trial
                residuals = trial_residuals
                cost = trial_cost
                lam = max(lam * _LAMBDA_SHRINK, 1e-14)
                accepted = True
                if first_try and lam_used <= 1.0 and improvement <= _FTOL * max(cost, 1e-300):
                    # Lightly damped step with no measurable progress.
                    converged = True
                    status = "cost plateau"
                break
            first_try = False
            lam *= _LAMBDA_GROW
            if lam > _LAMBDA_MAX:
                status = "damping exhausted"
                break
        if converged or not accepted:
            break

    final_jac = _fd_jacobian(scaled_residuals, q, residuals, lo, hi)
    jtj = final_jac.T @ final_jac
    cov_scaled = np.linalg.pinv(jtj, hermitian=True)
    cov_scaled = 0.5 * (cov_scaled + cov_scaled.T)
    covariance = cov_scaled * np.outer(scales, scales)

    return LeastSquaresSolution(
        params=q * scales,
        covariance=covariance,
        cost=cost,
        residual_norm=float(np.sqrt(cost)),
        converged=converged,
        iterations=iterations,
        status=status,
    )
