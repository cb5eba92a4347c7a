"""Accelerated block proximal solver with adaptive momentum.

Each outer iteration extrapolates every weight block and the bias along the
previous step, keeps the extrapolated point only if it does not increase the
objective (growing the momentum factor on success, shrinking it on failure),
then sweeps the blocks cyclically: one hard-thresholded gradient step per
block with a freshly computed step-size constant, followed by a plain
gradient step on the bias. Momentum schedules:

  adaptive  grow/shrink the factor by t based on the acceptance test
  nesterov  classic t_k recursion, extrapolated point always used
  none      no extrapolation (plain block proximal gradient descent)
"""

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    ModelParams,
    Problem,
    grad_direction_batch,
    is_feasible,
    logistic_terms,
    loss_coefficients,
    margin_batch,
    ridge_term,
    step_bound_from_rows,
)
from .prox import project_l0

SCHEDULES = ("adaptive", "nesterov", "none")
EXTRAPOLATION_CHECKS = ("full_objective", "smooth_only")


@dataclass
class SolverConfig:
    """Solver hyperparameters. Defaults follow the reference setup:
    t=1.3, beta1=0.6, beta_max=0.9999, gamma=1.5, tolerances 1e-5 / 1e-4."""

    schedule: str = "adaptive"
    t: float = 1.3
    beta1: float = 0.6
    beta_max: float = 0.9999
    gamma: float = 1.5
    tol_obj: float = 1e-5
    tol_grad: float = 1e-4
    max_iters: int = 2000
    max_seconds: float = 60.0
    extrapolation_check: str = "full_objective"
    seed: int = 0

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if not self.t > 1.0:
            raise ValueError(f"momentum factor t must exceed 1, got {self.t}")
        if not 0.0 <= self.beta_max < 1.0:
            raise ValueError(f"beta_max must lie in [0, 1), got {self.beta_max}")
        if not 0.0 <= self.beta1 <= self.beta_max:
            raise ValueError(
                f"beta1 must lie in [0, beta_max={self.beta_max}], got {self.beta1}"
            )
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.tol_obj <= 0 or self.tol_grad <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive")
        if self.extrapolation_check not in EXTRAPOLATION_CHECKS:
            raise ValueError(
                f"extrapolation_check must be one of {EXTRAPOLATION_CHECKS}"
            )


@dataclass
class IterTrace:
    """One outer iteration: objective at the new iterate, distance from the
    prox base point (sum of blockwise 2-norms including the bias), momentum
    factor used, acceptance outcome, and wall time since the run started."""

    iter: int
    objective: float
    gap: float
    beta: float
    accepted: bool
    elapsed_seconds: float


@dataclass
class SolveResult:
    params: ModelParams
    trace: list
    stop_reason: str
    config: SolverConfig
    # Per-iteration extras consumed by the convergence diagnostics: objective
    # at the prox base point and the smallest step-size constant of the sweep.
    base_objectives: list
    min_taus: list


def nesterov_beta(t_k):
    """One step of the classic momentum recursion; returns (t_next, beta_next)."""
    if t_k < 1.0:
        raise ValueError(f"t_k must be >= 1, got {t_k}")
    t_next = (1.0 + math.sqrt(1.0 + 4.0 * t_k * t_k)) / 2.0
    return t_next, (t_k - 1.0) / t_next


def family_norm(family):
    """Norm of a family of vectors: sum of the blockwise 2-norms."""
    return float(sum(np.linalg.norm(g) for g in family))


def check_stop(prev_row, cur_row, prev_grads, cur_grads, n, config):
    """Tolerance-based stopping tests on two consecutive iterations.

    Fires "obj_tol" when |J_next - J_prev| / n drops below tol_obj and
    "grad_tol" when the blockwise-summed norm of the smooth-gradient change,
    scaled by n, drops below tol_grad. Returns None when neither fires.
    """
    if abs(cur_row.objective - prev_row.objective) / n < config.tol_obj:
        return "obj_tol"
    diff = family_norm([c - p for c, p in zip(cur_grads, prev_grads)])
    if diff / n < config.tol_grad:
        return "grad_tol"
    return None


def random_init(dims, sparsity, seed, bias=0.0):
    """Sparse Gaussian starting point: s_i uniformly chosen support positions
    per block filled with standard normal draws, the rest zero. PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    blocks = []
    for d, s in zip(dims, sparsity):
        if not 1 <= s <= d:
            raise ValueError(f"sparsity {s} invalid for block of length {d}")
        w = np.zeros(d)
        support = rng.choice(d, size=s, replace=False)
        w[support] = rng.standard_normal(s)
        blocks.append(w)
    return ModelParams(blocks=tuple(blocks), bias=bias)


def _objective_at(X, y, blocks, bias, ridge, sparsity):
    if not is_feasible(blocks, sparsity):
        return math.inf
    m = margin_batch(X, blocks, bias)
    return float(np.sum(logistic_terms(m, y))) + ridge_term(blocks, ridge)


def _gradient_family(X, y, blocks, margins, ridge):
    """Smooth-gradient family [g_1, ..., g_p, [g_bias]] at a fixed state."""
    coeff = loss_coefficients(margins, y)
    family = []
    for j in range(len(blocks)):
        G = grad_direction_batch(X, blocks, j)
        family.append(G.T @ coeff + ridge[j] * blocks[j])
    family.append(np.array([float(np.sum(coeff))]))
    return family


def run(problem: Problem, data, init: ModelParams, config: SolverConfig,
        time_source=None, iterate_hook=None) -> SolveResult:
    """Minimize the sparse multilinear logistic objective from `init`.

    The initial point must already satisfy the sparsity caps. Every recorded
    iterate is feasible (each block update ends in a hard-thresholding
    projection) and, for the adaptive and none schedules, the recorded
    objective sequence is nonincreasing. The wall-clock budget is checked
    once per outer iteration; `time_source` replaces the clock for
    reproducible traces. `iterate_hook(k, blocks, bias)` is called with each
    new iterate, for instrumentation.
    """
    clock = time_source if time_source is not None else time.perf_counter
    p = init.order
    dims = init.block_dims()
    if data.feature_dims != dims:
        raise ValueError(f"initial blocks {dims} do not match data dims {data.feature_dims}")
    if len(problem.ridge) != p:
        raise ValueError(f"{len(problem.ridge)} ridge weights for {p} blocks")
    if any(s > d for s, d in zip(problem.sparsity, dims)):
        raise ValueError(f"sparsity caps {problem.sparsity} exceed block lengths {dims}")
    if not is_feasible(init.blocks, problem.sparsity):
        raise ValueError("initial point violates its sparsity caps")
    problem = replace(problem, gamma=config.gamma)

    X, y = data.X, data.y
    n = data.n
    ridge, sparsity, gamma = problem.ridge, problem.sparsity, problem.gamma
    tau_bias = gamma * n / 4.0

    cur = [b.copy() for b in init.blocks]
    prev = [b.copy() for b in init.blocks]
    cur_b = prev_b = init.bias
    J_cur = _objective_at(X, y, cur, cur_b, ridge, sparsity)
    if not math.isfinite(J_cur):
        raise ValueError("objective is not finite at the initial point")

    beta = config.beta1 if config.schedule == "adaptive" else 0.0
    t_k = 1.0
    trace, base_objectives, min_taus = [], [], []
    grads_prev = None
    stop_reason = "max_iters"
    t0 = clock()

    for k in range(1, config.max_iters + 1):
        if clock() - t0 > config.max_seconds:
            stop_reason = "max_seconds"
            break

        beta_used = beta
        moved = beta != 0.0 and (
            any(not np.array_equal(c, q) for c, q in zip(cur, prev)) or cur_b != prev_b
        )
        if config.schedule == "none" or not moved:
            base, base_b, J_base = cur, cur_b, J_cur
            accepted = True
            if config.schedule == "adaptive":
                beta = min(config.beta_max, config.t * beta)
            elif config.schedule == "nesterov":
                t_k, beta = nesterov_beta(t_k)
        else:
            y_blocks = [c + beta * (c - q) for c, q in zip(cur, prev)]
            y_bias = cur_b + beta * (cur_b - prev_b)
            if config.schedule == "nesterov":
                base, base_b = y_blocks, y_bias
                J_base = _objective_at(X, y, base, base_b, ridge, sparsity)
                accepted = True
                t_k, beta = nesterov_beta(t_k)
            elif config.extrapolation_check == "full_objective":
                J_y = _objective_at(X, y, y_blocks, y_bias, ridge, sparsity)
                if J_y <= J_cur:
                    base, base_b, J_base = y_blocks, y_bias, J_y
                    accepted = True
                    beta = min(config.beta_max, config.t * beta)
                else:
                    base, base_b, J_base = cur, cur_b, J_cur
                    accepted = False
                    beta = beta / config.t
            else:  # smooth_only: test the loss alone, then project the point
                m_y = margin_batch(X, y_blocks, y_bias)
                H_y = float(np.sum(logistic_terms(m_y, y))) + ridge_term(y_blocks, ridge)
                if H_y <= J_cur:
                    base = [project_l0(w, s) for w, s in zip(y_blocks, sparsity)]
                    base_b = y_bias
                    J_base = _objective_at(X, y, base, base_b, ridge, sparsity)
                    accepted = True
                    beta = min(config.beta_max, config.t * beta)
                else:
                    base, base_b, J_base = cur, cur_b, J_cur
                    accepted = False
                    beta = beta / config.t

        # Cyclic block sweep: blocks before j are already updated, the rest
        # sit at the base point, so the step-size constant is fresh for j.
        work = [b.copy() for b in base]
        min_tau = tau_bias
        G = None
        for j in range(p):
            G = grad_direction_batch(X, work, j)
            m = G @ work[j] + base_b
            coeff = loss_coefficients(m, y)
            grad = G.T @ coeff + ridge[j] * work[j]
            row_norms = np.sqrt(np.sum(G * G, axis=1))
            tau = step_bound_from_rows(row_norms, ridge[j], gamma)
            work[j] = project_l0(work[j] - grad / tau, sparsity[j])
            assert np.count_nonzero(work[j]) <= sparsity[j]
            min_tau = min(min_tau, tau)

        # G still matches the final block state (it never involves block p-1).
        m_blocks = G @ work[p - 1] + base_b
        grad_b = float(np.sum(loss_coefficients(m_blocks, y)))
        new_b = base_b - grad_b / tau_bias

        m_final = m_blocks + (new_b - base_b)
        J_next = float(np.sum(logistic_terms(m_final, y))) + ridge_term(work, ridge)
        gap = sum(float(np.linalg.norm(w - b)) for w, b in zip(work, base))
        gap += abs(new_b - base_b)

        trace.append(
            IterTrace(
                iter=k,
                objective=J_next,
                gap=gap,
                beta=beta_used,
                accepted=accepted,
                elapsed_seconds=clock() - t0,
            )
        )
        base_objectives.append(J_base)
        min_taus.append(min_tau)

        if iterate_hook is not None:
            iterate_hook(k, work, new_b)
        grads_now = _gradient_family(X, y, work, m_final, ridge)
        # Velocity memory runs over consecutive iterates; the accepted
        # extrapolated point only serves as the base of the sweep.
        prev, prev_b = cur, cur_b
        cur, cur_b = work, new_b
        J_cur = J_next

        if grads_prev is not None:
            reason = check_stop(trace[-2], trace[-1], grads_prev, grads_now, n, config)
            if reason is not None:
                stop_reason = reason
                break
        grads_prev = grads_now

    params = ModelParams(blocks=tuple(b.copy() for b in cur), bias=cur_b)
    return SolveResult(
        params=params,
        trace=trace,
        stop_reason=stop_reason,
        config=config,
        base_objectives=base_objectives,
        min_taus=min_taus,
    )


@dataclass
class DecreaseReport:
    """Outcome of the per-iteration sufficient-decrease audit."""

    checked: int
    violations: int
    max_violation: float
    first_decile_gap: float
    last_decile_gap: float


def diagnose_sufficient_decrease(result: SolveResult, rho_hat=None, tol=1e-9):
    """Audit J(new) <= J(base) - rho * gap^2 over a completed run.

    When rho_hat is not given it is estimated per iteration from the recorded
    step-size constants as (gamma - 1) / gamma * min_tau / 2, the guaranteed
    margin between each step-size constant and the true smoothness bound.
    Also summarizes the gap decay: mean gap over the first and last tenth of
    the iterations.
    """
    gamma = result.config.gamma
    gaps = [row.gap for row in result.trace]
    worst = -math.inf
    violations = 0
    for row, J_base, min_tau in zip(result.trace, result.base_objectives, result.min_taus):
        rho = rho_hat if rho_hat is not None else (gamma - 1.0) / gamma * min_tau / 2.0
        slack = row.objective - (J_base - rho * row.gap**2)
        worst = max(worst, slack)
        if slack > tol:
            violations += 1
    decile = max(1, len(gaps) // 10)
    return DecreaseReport(
        checked=len(gaps),
        violations=violations,
        max_violation=worst,
        first_decile_gap=float(np.mean(gaps[:decile])) if gaps else math.nan,
        last_decile_gap=float(np.mean(gaps[-decile:])) if gaps else math.nan,
    )


TRACE_HEADER = "iter,objective,gap,beta,accepted,elapsed_seconds"


def write_trace_csv(trace, path):
    """Write one row per outer iteration, floats at 17 significant digits."""
    lines = [TRACE_HEADER]
    for row in trace:
        lines.append(
            f"{row.iter},{row.objective:.17g},{row.gap:.17g},{row.beta:.17g},"
            f"{int(row.accepted)},{row.elapsed_seconds:.17g}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
