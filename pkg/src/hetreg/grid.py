"""Equispaced design grid and the trigonometric basis.

The basis is phi_1 = 1, phi_j = sqrt(2) cos(2 pi [j/2] x) for even j and
sqrt(2) sin(2 pi [j/2] x) for odd j >= 3. Under the empiric inner product
(u, v)_n = (1/n) sum u(x_l) v(x_l) over the grid x_l = l/n it is exactly
orthonormal when n is odd, which is why even n is rejected everywhere.
"""

import numpy as np

from . import _kernels


class DesignGrid:
    """The n equispaced design points x_j = j/n, with n odd and >= 3."""

    __slots__ = ("n", "points")

    def __init__(self, n: int):
        n = int(n)
        if n < 3:
            raise ValueError(f"n must be >= 3, got {n}")
        if n % 2 == 0:
            raise ValueError(f"n must be odd, got {n}")
        self.n = n
        self.points = np.arange(1, n + 1, dtype=np.float64) / n

    def __repr__(self):
        return f"DesignGrid(n={self.n})"


def trig_basis(j: int, x):
    """Evaluate the j-th basis function (j >= 1) at scalar or array x."""
    if j < 1:
        raise ValueError(f"basis index must be >= 1, got {j}")
    x = np.asarray(x, dtype=np.float64)
    if j == 1:
        out = np.ones_like(x)
    else:
        ang = 2.0 * np.pi * (j // 2) * x
        out = np.sqrt(2.0) * (np.cos(ang) if j % 2 == 0 else np.sin(ang))
    return out if out.ndim else float(out)


def basis_matrix(x, jmax: int, backend=None) -> np.ndarray:
    """Matrix of basis values, shape (len(x), jmax), column i-1 = phi_i."""
    x = np.asarray(x, dtype=np.float64)
    if jmax < 1:
        raise ValueError(f"jmax must be >= 1, got {jmax}")
    return _kernels.basis_matrix(x, int(jmax), backend=backend)


def empiric_inner(u, v, grid: DesignGrid = None) -> float:
    """Empiric inner product (1/n) sum u_l v_l of two length-n vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if grid is not None and u.shape[0] != grid.n:
        raise ValueError(f"vectors of length {u.shape[0]} on a grid of size {grid.n}")
    return float(u @ v) / u.shape[0]


def empiric_norm_sq(u, grid: DesignGrid = None) -> float:
    """Squared empiric norm (1/n) sum u_l^2."""
    return empiric_inner(u, u, grid)


def gram_deviation(grid: DesignGrid, jmax: int, backend=None) -> float:
    """Max absolute deviation of the jmax x jmax empiric Gram matrix from identity.

    Exactly zero (up to roundoff) for odd n with jmax <= n; the BLAS matmul
    is kept on both backends since it dominates the basis fill.
    """
    if jmax > grid.n:
        raise ValueError(f"jmax={jmax} exceeds grid size n={grid.n}")
    phi = basis_matrix(grid.points, jmax, backend=backend)
    gram = phi.T @ phi / grid.n
    gram[np.diag_indices_from(gram)] -= 1.0
    return float(np.abs(gram).max())
