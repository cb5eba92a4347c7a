"""Dense tensors and the mode-k contractions behind every prediction and gradient."""

import math

import numpy as np

from .kernels import contract_down, contract_mode


class DenseTensor:
    """Immutable dense numeric array with row-major flat storage.

    Parameters
    ----------
    dims : sequence of int
        Extents (d_1, ..., d_p), every extent >= 1. An empty tuple denotes
        an order-0 scalar holder, produced when an order-1 tensor is
        contracted.
    data : array-like
        Flat values of length prod(dims), row-major (last index fastest).
        All entries must be finite.
    """

    __slots__ = ("_dims", "_data")

    def __init__(self, dims, data):
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"all extents must be >= 1, got {dims}")
        flat = np.asarray(data, dtype=np.float64).reshape(-1)
        expected = math.prod(dims)
        if flat.size != expected:
            raise ValueError(
                f"data length {flat.size} does not match prod(dims)={expected} for dims {dims}"
            )
        if not np.all(np.isfinite(flat)):
            raise ValueError("tensor entries must be finite")
        flat = np.ascontiguousarray(flat)
        flat.setflags(write=False)
        self._dims = dims
        self._data = flat

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.shape, arr.reshape(-1))

    @property
    def dims(self):
        return self._dims

    @property
    def order(self):
        return len(self._dims)

    @property
    def data(self):
        """Flat row-major view (read-only)."""
        return self._data

    @property
    def array(self):
        """Read-only ndarray view shaped to dims."""
        return self._data.reshape(self._dims)

    def item(self):
        """Scalar value of an order-0 or single-entry tensor."""
        if self._data.size != 1:
            raise ValueError(f"tensor with dims {self._dims} is not a scalar")
        return float(self._data[0])

    def __repr__(self):
        return f"DenseTensor(dims={self._dims})"


def _check_mode(t, mode):
    if not 0 <= mode < t.order:
        raise IndexError(f"mode {mode} out of range for order-{t.order} tensor")


def _check_vector(v, extent, what):
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size != extent:
        raise ValueError(f"{what} must be a vector of length {extent}, got shape {v.shape}")
    return v


def mode_k_contract(t, v, mode):
    """Contract mode `mode` of t with vector v, reducing the order by one.

    The entry at multi-index (i_1, ..., without i_mode, ..., i_p) of the
    result is sum_j t(i_1, ..., j, ..., i_p) * v(j). Contracting an order-1
    tensor yields an order-0 scalar holder.
    """
    _check_mode(t, mode)
    v = _check_vector(v, t.dims[mode], f"mode-{mode} vector")
    out = contract_mode(t.array, v, mode)
    return DenseTensor(out.shape, out.reshape(-1))


def contract_all_but(t, blocks, skip):
    """Contract every mode except `skip` with its block vector.

    Returns the length-d_skip vector that is the gradient direction of the
    multilinear form with respect to block `skip`. blocks[skip] is ignored
    (it may be None).
    """
    _check_mode(t, skip)
    if len(blocks) != t.order:
        raise ValueError(f"expected {t.order} block vectors, got {len(blocks)}")
    axes = [k for k in range(t.order) if k != skip]
    vecs = [_check_vector(blocks[k], t.dims[k], f"block {k}") for k in axes]
    out = contract_down(t.array, vecs, axes)
    return out.reshape(t.dims[skip])


def contract_full(t, blocks):
    """Full multilinear form: contract every mode with its block vector."""
    if len(blocks) != t.order:
        raise ValueError(f"expected {t.order} block vectors, got {len(blocks)}")
    vecs = [_check_vector(blocks[k], t.dims[k], f"block {k}") for k in range(t.order)]
    out = contract_down(t.array, vecs, list(range(t.order)))
    return float(out.reshape(()))
