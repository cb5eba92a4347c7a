"""Multilinear sparse logistic regression: objective, gradients, step-size bounds.

The model scores an order-p sample by contracting it with one weight vector
per mode and adding a bias. Training minimizes the logistic loss plus a
blockwise ridge term, subject to a hard sparsity cap per block (at most s_i
nonzeros), which enters the objective as an indicator: feasible points score
the smooth loss, infeasible points score +inf.
"""

import math
from dataclasses import dataclass

import numpy as np

from .kernels import contract_down
from .tensor import DenseTensor, contract_full

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ModelParams:
    """Weight blocks (one vector per tensor mode) plus a scalar bias."""

    blocks: tuple
    bias: float

    def __post_init__(self):
        blocks = tuple(np.ascontiguousarray(b, dtype=np.float64) for b in self.blocks)
        if not blocks:
            raise ValueError("at least one weight block is required")
        for i, b in enumerate(blocks):
            if b.ndim != 1 or b.size < 1:
                raise ValueError(f"block {i} must be a nonempty vector")
            if not np.all(np.isfinite(b)):
                raise ValueError(f"block {i} has non-finite entries")
        if not np.isfinite(self.bias):
            raise ValueError("bias must be finite")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def order(self):
        return len(self.blocks)

    def block_dims(self):
        return tuple(b.size for b in self.blocks)


@dataclass(frozen=True)
class Problem:
    """Per-block ridge weights and sparsity caps, plus the step-size inflation factor."""

    ridge: tuple
    sparsity: tuple
    gamma: float = 1.5

    def __post_init__(self):
        ridge = tuple(float(r) for r in self.ridge)
        sparsity = tuple(int(s) for s in self.sparsity)
        if len(ridge) != len(sparsity):
            raise ValueError("ridge and sparsity must have one entry per block")
        if any(r < 0 for r in ridge):
            raise ValueError("ridge weights must be nonnegative")
        if any(s < 1 for s in sparsity):
            raise ValueError("sparsity caps must be >= 1")
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        object.__setattr__(self, "ridge", ridge)
        object.__setattr__(self, "sparsity", sparsity)
        object.__setattr__(self, "gamma", float(self.gamma))


def _check_shapes(blocks, data):
    dims = tuple(b.size for b in blocks)
    if dims != data.feature_dims:
        raise ValueError(
            f"block lengths {dims} do not match sample dims {data.feature_dims}"
        )


def margin_batch(X, blocks, bias):
    """Margins f(X_s) = <X_s, w_1 x ... x w_p> + b for a stacked sample array."""
    axes = list(range(1, len(blocks) + 1))
    return contract_down(X, list(blocks), axes) + bias


def grad_direction_batch(X, blocks, skip):
    """Rows are the per-sample gradient directions of the multilinear form
    with respect to block `skip` (all other modes contracted away)."""
    axes = [k + 1 for k in range(len(blocks)) if k != skip]
    vecs = [blocks[k] for k in range(len(blocks)) if k != skip]
    out = contract_down(X, vecs, axes)
    return out.reshape(X.shape[0], -1)


def _dloss_dmargin(m):
    """Derivative of log(1 + exp(-m)) in m, computed without overflow."""
    out = np.empty_like(m)
    pos = m >= 0
    e = np.exp(-m[pos])
    out[pos] = -e / (1.0 + e)
    e = np.exp(m[np.logical_not(pos)])
    out[np.logical_not(pos)] = -1.0 / (1.0 + e)
    return out


def loss_coefficients(margins, labels):
    """Per-sample factor c_s = -y_s * sigmoid(-y_s f_s) multiplying the
    gradient direction in every partial derivative of the smooth loss."""
    m = labels * margins
    return labels * _dloss_dmargin(m)


def logistic_terms(margins, labels):
    """Stable per-sample values of log(1 + exp(-y*f))."""
    m = labels * margins
    return np.log1p(np.exp(-np.abs(m))) + np.maximum(0.0, -m)


def ridge_term(blocks, ridge):
    return sum(0.5 * lam * float(np.dot(b, b)) for lam, b in zip(ridge, blocks))


def predict(params: ModelParams, x: DenseTensor) -> float:
    """Margin for a single sample: multilinear form plus bias."""
    return contract_full(x, list(params.blocks)) + params.bias


def margins(params: ModelParams, data) -> np.ndarray:
    """Margins for every sample in the dataset."""
    _check_shapes(params.blocks, data)
    return margin_batch(data.X, params.blocks, params.bias)


def smooth_loss(params: ModelParams, data, problem: Problem) -> float:
    """Logistic loss over the dataset plus the blockwise ridge term."""
    m = margins(params, data)
    return float(np.sum(logistic_terms(m, data.y))) + ridge_term(params.blocks, problem.ridge)


def is_feasible(blocks, sparsity) -> bool:
    return all(np.count_nonzero(b) <= s for b, s in zip(blocks, sparsity))


def objective(params: ModelParams, data, problem: Problem) -> float:
    """Smooth loss if every block satisfies its sparsity cap, +inf otherwise."""
    if not is_feasible(params.blocks, problem.sparsity):
        return math.inf
    return smooth_loss(params, data, problem)


def grad_block(params: ModelParams, data, problem: Problem, j: int) -> np.ndarray:
    """Partial gradient of the smooth loss with respect to block j."""
    p = params.order
    if not 0 <= j < p:
        raise IndexError(f"block index {j} out of range for {p} blocks")
    _check_shapes(params.blocks, data)
    G = grad_direction_batch(data.X, params.blocks, j)
    m = G @ params.blocks[j] + params.bias
    c = loss_coefficients(m, data.y)
    return G.T @ c + problem.ridge[j] * params.blocks[j]


def grad_bias(params: ModelParams, data) -> float:
    """Partial derivative of the smooth loss with respect to the bias."""
    m = margins(params, data)
    return float(np.sum(loss_coefficients(m, data.y)))


def step_bound_from_rows(row_norms, lam, gamma):
    """Step-size constant gamma * (sqrt(2) * sum((||g_s|| + 1)^2) + lam)."""
    return gamma * (SQRT2 * float(np.sum((row_norms + 1.0) ** 2)) + lam)


def lipschitz_block(params: ModelParams, data, problem: Problem, j: int) -> float:
    """Smoothness bound for block j at the current values of the other blocks.

    The bound depends on the per-sample gradient-direction norms, so it must
    be recomputed whenever any other block changes.
    """
    p = params.order
    if not 0 <= j < p:
        raise IndexError(f"block index {j} out of range for {p} blocks")
    _check_shapes(params.blocks, data)
    G = grad_direction_batch(data.X, params.blocks, j)
    row_norms = np.sqrt(np.sum(G * G, axis=1))
    return step_bound_from_rows(row_norms, problem.ridge[j], problem.gamma)


def lipschitz_bias(data, problem: Problem) -> float:
    """Curvature bound for the bias: the logistic loss has |d2H/db2| <= n/4."""
    return problem.gamma * data.n / 4.0
