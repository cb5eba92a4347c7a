"""Hard thresholding: Euclidean projection onto the sparsity ball ||w||_0 <= s."""

import numpy as np


def project_l0(v, s):
    """Keep the s largest-magnitude entries of v, zero the rest.

    Surviving entries keep their exact floating values, so the result is the
    closest point (in the 2-norm) with at most s nonzeros. When magnitudes
    tie at the cutoff the lowest index wins, which makes runs reproducible.
    A vector with at most s nonzeros is returned unchanged (as a copy).
    """
    s = int(s)
    if s < 1:
        raise ValueError(f"sparsity level must be >= 1, got {s}")
    v = np.asarray(v, dtype=np.float64)
    d = v.size
    mag = np.abs(v)
    if s >= d or np.count_nonzero(v) <= s:
        return v.copy()
    # Partial selection: entries beyond position d-s are the s largest.
    part = np.argpartition(mag, d - s)
    kept = part[d - s :]
    cutoff = mag[kept].min()
    out = np.zeros_like(v)
    above = mag > cutoff
    out[above] = v[above]
    # Fill the remaining slots from the tied entries, lowest index first.
    n_free = s - int(np.count_nonzero(above))
    if n_free > 0:
        tied = np.flatnonzero(mag == cutoff)[:n_free]
        out[tied] = v[tied]
    return out


def prox_block_step(w, grad, tau, s):
    """One proximal gradient step: project w - grad/tau onto the l0 ball."""
    if tau <= 0:
        raise ValueError(f"step-size constant must be positive, got {tau}")
    w = np.asarray(w, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != w.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match weights {w.shape}")
    return project_l0(w - grad / tau, s)
