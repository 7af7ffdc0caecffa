"""Hot numeric kernels, each with a numba ``@njit`` and a pure-numpy path.

The numpy paths lean on BLAS matmuls; the numba paths fuse the per-replication
loops and avoid the large intermediates. ``benchmarks/bench_backends.py``
times both. Dispatch happens through :func:`hetreg._backend.active_backend`.

All kernels are pure functions of float64 C-contiguous inputs and use fixed
summation order within a path, so results are reproducible per backend.
"""

import numpy as np

from ._backend import active_backend, njit

_SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# trigonometric basis matrix: out[l, i] = phi_{i+1}(x[l])
# ---------------------------------------------------------------------------

def _basis_matrix_numpy(x, jmax):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((x.shape[0], jmax))
    out[:, 0] = 1.0
    if jmax > 1:
        cols = np.arange(1, jmax)
        j = cols + 1
        half = j // 2
        ang = (2.0 * np.pi) * x[:, None] * half[None, :]
        is_cos = (j % 2) == 0
        out[:, cols[is_cos]] = _SQRT2 * np.cos(ang[:, is_cos])
        out[:, cols[~is_cos]] = _SQRT2 * np.sin(ang[:, ~is_cos])
    return out


@njit(cache=True)
def _basis_matrix_numba(x, jmax):  # pragma: no cover - exercised via dispatch
    p = x.shape[0]
    out = np.empty((p, jmax))
    for l in range(p):
        out[l, 0] = 1.0
    for i in range(1, jmax):
        j = i + 1
        w = 2.0 * np.pi * (j // 2)
        if j % 2 == 0:
            for l in range(p):
                out[l, i] = _SQRT2 * np.cos(w * x[l])
        else:
            for l in range(p):
                out[l, i] = _SQRT2 * np.sin(w * x[l])
    return out


def basis_matrix(x, jmax, backend=None):
    """Evaluate the first `jmax` basis functions at the points `x`."""
    if (backend or active_backend()) == "numba":
        return _basis_matrix_numba(np.ascontiguousarray(x, dtype=np.float64), jmax)
    return _basis_matrix_numpy(x, jmax)


# ---------------------------------------------------------------------------
# penalized cost over a candidate weight family
#
# J[r, k] = sum_j w2[k,j] t2[r,j] - 2 sum_j w[k,j] tt[r,j] + pen[r] w2sum[k]
# ---------------------------------------------------------------------------

def _cost_matrix_numpy(t2, tt, w, w2, w2sums, pen):
    return t2 @ w2.T - 2.0 * (tt @ w.T) + pen[:, None] * w2sums[None, :]


@njit(cache=True)
def _cost_matrix_numba(t2, tt, w, w2, w2sums, pen):  # pragma: no cover
    reps, n = t2.shape
    kk = w.shape[0]
    out = np.empty((reps, kk))
    for r in range(reps):
        for k in range(kk):
            acc = 0.0
            for j in range(n):
                acc += w2[k, j] * t2[r, j] - 2.0 * w[k, j] * tt[r, j]
            out[r, k] = acc + pen[r] * w2sums[k]
    return out


def cost_matrix(t2, tt, w, w2, w2sums, pen, backend=None):
    """Cost of every candidate weight vector for every replication row."""
    args = _as_float64(t2, tt, w, w2, w2sums, pen)
    if (backend or active_backend()) == "numba":
        return _cost_matrix_numba(*args)
    return _cost_matrix_numpy(*args)


# ---------------------------------------------------------------------------
# fused candidate selection + empiric risk of the selected estimator
#
# sel[r]  = first argmin_k J[r, k]
# risk[r] = sum_j (w[sel[r], j] theta[r, j] - theta_ref[j])^2
# ---------------------------------------------------------------------------

def _select_and_risk_numpy(theta, t2, tt, w, w2, w2sums, pen, theta_ref):
    costs = _cost_matrix_numpy(t2, tt, w, w2, w2sums, pen)
    sel = np.argmin(costs, axis=1)
    resid = w[sel] * theta - theta_ref[None, :]
    return sel, np.einsum("rj,rj->r", resid, resid)


@njit(cache=True)
def _select_and_risk_numba(theta, t2, tt, w, w2, w2sums, pen, theta_ref):  # pragma: no cover
    reps, n = theta.shape
    kk = w.shape[0]
    sel = np.empty(reps, dtype=np.int64)
    risk = np.empty(reps)
    for r in range(reps):
        best = np.inf
        best_k = 0
        for k in range(kk):
            acc = 0.0
            for j in range(n):
                acc += w2[k, j] * t2[r, j] - 2.0 * w[k, j] * tt[r, j]
            acc += pen[r] * w2sums[k]
            if acc < best:
                best = acc
                best_k = k
        sel[r] = best_k
        acc = 0.0
        for j in range(n):
            d = w[best_k, j] * theta[r, j] - theta_ref[j]
            acc += d * d
        risk[r] = acc
    return sel, risk


def select_and_risk(theta, t2, tt, w, w2, w2sums, pen, theta_ref, backend=None):
    """Per-replication argmin over the weight family plus its empiric risk."""
    args = _as_float64(theta, t2, tt, w, w2, w2sums, pen, theta_ref)
    if (backend or active_backend()) == "numba":
        return _select_and_risk_numba(*args)
    return _select_and_risk_numpy(*args)


def _as_float64(*arrays):
    return tuple(np.ascontiguousarray(a, dtype=np.float64) for a in arrays)
