"""The adaptive weighted least-squares procedure.

Pipeline: spectral coefficients of the observations, a finite family of
shrinkage weight vectors indexed by (beta, t), a penalized cost whose argmin
picks the weights, and reconstruction of the signal estimate. The oracle
(non-adaptive) weight that knows the smoothness k and the ball radius r is
included for benchmarking only.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .grid import DesignGrid, basis_matrix
from .scale import Observations, ScaleSpec, varsigma


def tail_index(n: int) -> int:
    """Index l_n = [n^(1/3) + 1] splitting signal head from the noise tail."""
    m = int(round(n ** (1.0 / 3.0)))
    while m**3 > n:
        m -= 1
    while (m + 1) ** 3 <= n:
        m += 1
    return m + 1


@dataclass
class SpectralData:
    """Fourier data of one observation vector on the odd-n grid."""

    theta_hat: np.ndarray
    n: int
    varsigma_hat: float
    l_n: int


def spectral_transform(obs: Observations) -> SpectralData:
    """Coefficients theta_hat_j = (Y, phi_j)_n plus the noise-level proxy.

    The proxy varsigma_hat sums the squared coefficients beyond l_n, where a
    smooth signal contributes almost nothing.
    """
    n = obs.grid.n
    phi = basis_matrix(obs.grid.points, n)
    theta_hat = (obs.y @ phi) / n
    l_n = tail_index(n)
    varsigma_hat = float(np.sum(theta_hat[l_n:] ** 2))
    return SpectralData(theta_hat=theta_hat, n=n, varsigma_hat=varsigma_hat, l_n=l_n)


def shrink_coefficient(beta: int) -> float:
    """(beta+1)(2 beta+1) / (beta pi^(2 beta)), the bandwidth constant."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    return (beta + 1.0) * (2.0 * beta + 1.0) / (beta * np.pi ** (2.0 * beta))


def cutoff_frequency(alpha: Tuple[int, float], n, omega_bar: float = 0.0) -> float:
    """Bandwidth omega(alpha) = omega_bar + (A_beta t n)^(1/(2 beta + 1))."""
    beta, t = alpha
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    a = shrink_coefficient(beta)
    return omega_bar + (a * t * n) ** (1.0 / (2.0 * beta + 1.0))


@dataclass
class WeightVector:
    """Shrinkage weights in [0, 1]^n, flat at 1 up to j_0 then decaying."""

    lam: np.ndarray
    alpha: Optional[Tuple[int, float]] = None

    @property
    def support(self) -> int:
        nz = np.nonzero(self.lam)[0]
        return int(nz[-1] + 1) if nz.size else 0


def weight_vector(alpha: Tuple[int, float], n: int, eps: float,
                  omega_bar: float = 0.0) -> WeightVector:
    """Weights lam(j) = 1 for j <= j_0, 1 - (j / omega)^beta up to [omega], 0 after.

    j_0 = [omega eps]; indices beyond n are dropped since the estimator only
    uses n coefficients.
    """
    beta, t = alpha
    omega = cutoff_frequency(alpha, n, omega_bar)
    j0 = int(math.floor(omega * eps))
    top = min(int(math.floor(omega)), n)
    lam = np.zeros(n)
    flat = min(j0, n)
    lam[:flat] = 1.0
    if top > flat:
        j = np.arange(flat + 1, top + 1, dtype=np.float64)
        lam[flat:top] = 1.0 - (j / omega) ** beta
    return WeightVector(lam=lam, alpha=(beta, t))


@dataclass(frozen=True)
class ProcedureConfig:
    """Run parameters; `for_n` fills the standard n-dependent defaults."""

    rho: float
    eps: float
    k_star: int
    omega_bar: float = 0.0
    k_bar: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0 / 3.0:
            raise ValueError(f"rho must lie in (0, 1/3), got {self.rho}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if self.k_star < 1:
            raise ValueError(f"k_star must be >= 1, got {self.k_star}")

    @classmethod
    def for_n(cls, n: int, rho: float = None, eps: float = None,
              k_star: int = None, omega_bar: float = 0.0,
              k_bar: int = 0) -> "ProcedureConfig":
        log_n = math.log(n)
        if eps is None:
            eps = 1.0 / log_n
        if k_star is None:
            k_star = k_bar + math.ceil(math.sqrt(log_n))
        if rho is None:
            rho = 1.0 / (3.0 + math.sqrt(log_n))
        return cls(rho=rho, eps=eps, k_star=int(k_star),
                   omega_bar=omega_bar, k_bar=k_bar)

    @property
    def oracle_coefficient(self) -> float:
        """(1 + 3 rho - 2 rho^2) / (1 - 3 rho), the oracle-inequality factor."""
        return (1.0 + 3.0 * self.rho - 2.0 * self.rho**2) / (1.0 - 3.0 * self.rho)


class WeightGrid:
    """The candidate family over (beta, t) in {1..k*} x {eps, ..., m eps}."""

    def __init__(self, n: int, config: ProcedureConfig):
        self.n = int(n)
        self.config = config
        self.m = int(math.floor(1.0 / config.eps**2))
        self.alphas = [
            (beta, i * config.eps)
            for beta in range(1, config.k_star + 1)
            for i in range(1, self.m + 1)
        ]
        self.vectors = [
            weight_vector(a, self.n, config.eps, config.omega_bar)
            for a in self.alphas
        ]
        self.matrix = np.ascontiguousarray([wv.lam for wv in self.vectors])
        self.matrix_sq = self.matrix**2
        self.sq_sums = self.matrix_sq.sum(axis=1)

    def __len__(self):
        return len(self.vectors)


def build_weight_grid(n: int, config: ProcedureConfig = None) -> WeightGrid:
    """Build the weight family for sample size n (defaults per `for_n`)."""
    if config is None:
        config = ProcedureConfig.for_n(n)
    return WeightGrid(n, config)


def penalized_cost(lam, sd: SpectralData, rho: float) -> float:
    """Cost J(lam): shrunk energy, minus twice the de-biased cross term,
    plus the penalty rho |lam|^2 varsigma_hat / n."""
    lam = np.asarray(lam.lam if isinstance(lam, WeightVector) else lam,
                     dtype=np.float64)
    if lam.shape != sd.theta_hat.shape:
        raise ValueError(
            f"weight length {lam.shape} does not match n={sd.theta_hat.shape}"
        )
    t2 = sd.theta_hat**2
    theta_tilde = t2 - sd.varsigma_hat / sd.n
    penalty = rho * float(lam @ lam) * sd.varsigma_hat / sd.n
    return float(lam**2 @ t2 - 2.0 * (lam @ theta_tilde) + penalty)


def select_weights(grid: WeightGrid, sd: SpectralData, rho: float) -> WeightVector:
    """Argmin of the penalized cost over the family; ties go to the
    lexicographically smallest (beta, t)."""
    if len(grid) == 0:
        raise ValueError("empty weight grid")
    t2 = sd.theta_hat[None, :] ** 2
    tt = t2 - sd.varsigma_hat / sd.n
    pen = np.array([rho * sd.varsigma_hat / sd.n])
    costs = _kernels.cost_matrix(t2, tt, grid.matrix, grid.matrix_sq,
                                 grid.sq_sums, pen)
    return grid.vectors[int(np.argmin(costs[0]))]


class Estimate:
    """A fitted signal: values on the grid plus an evaluator on [0, 1]."""

    def __init__(self, coeffs: np.ndarray, grid: DesignGrid,
                 alpha: Optional[Tuple[int, float]] = None):
        self.coeffs = np.asarray(coeffs, dtype=np.float64)
        self.grid = grid
        self.alpha = alpha
        self._support = np.nonzero(self.coeffs)[0]
        self.values = self._eval(grid.points)

    def _eval(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self._support.size == 0:
            return np.zeros_like(x)
        jmax = int(self._support[-1]) + 1
        phi = basis_matrix(x, jmax)
        return phi[:, self._support] @ self.coeffs[self._support]

    def __call__(self, x):
        out = self._eval(np.atleast_1d(x))
        return out if np.ndim(x) else float(out[0])


def reconstruct(lam: WeightVector, sd: SpectralData, grid: DesignGrid) -> Estimate:
    """Weighted least-squares estimate sum_j lam(j) theta_hat_j phi_j."""
    if grid.n != sd.n:
        raise ValueError(f"grid n={grid.n} does not match spectral n={sd.n}")
    return Estimate(coeffs=lam.lam * sd.theta_hat, grid=grid, alpha=lam.alpha)


def adaptive_fit(obs: Observations, config: ProcedureConfig = None,
                 grid: WeightGrid = None):
    """Run the full procedure on one observation vector.

    Returns (estimate, selected weight vector, spectral data).
    """
    sd = spectral_transform(obs)
    if grid is None:
        grid = build_weight_grid(sd.n, config)
    elif grid.n != sd.n:
        raise ValueError(f"weight grid built for n={grid.n}, data has n={sd.n}")
    lam = select_weights(grid, sd, grid.config.rho)
    return reconstruct(lam, sd, obs.grid), lam, sd


def oracle_weight(k: int, r: float, spec: ScaleSpec, S, n: int,
                  config: ProcedureConfig = None) -> WeightVector:
    """The benchmark weight lambda_(k, t~) with t~ the smallest grid point
    at or above r / varsigma(S), capped at the top of the t-grid."""
    if config is None:
        config = ProcedureConfig.for_n(n)
    if k > config.k_star:
        raise ValueError(f"k={k} exceeds the grid's k_star={config.k_star}")
    r_bar = r / varsigma(spec, S)
    m = int(math.floor(1.0 / config.eps**2))
    i = min(max(1, math.ceil(r_bar / config.eps)), m)
    return weight_vector((k, i * config.eps), n, config.eps, config.omega_bar)


class StepFunction:
    """Piecewise-constant extension of grid values to [0, 1]: the value at
    x_k rules the cell (x_{k-1}, x_k], and [0, x_1] takes the first value."""

    def __init__(self, values, grid: DesignGrid):
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.shape != (grid.n,):
            raise ValueError(
                f"{self.values.shape[0]} values for a grid of size {grid.n}"
            )
        self.grid = grid

    def __call__(self, x):
        idx = np.searchsorted(self.grid.points, np.asarray(x), side="left")
        idx = np.minimum(idx, self.grid.n - 1)
        out = self.values[idx]
        return out if np.ndim(x) else float(out)


def step_extension(values, grid: DesignGrid) -> StepFunction:
    """Extend grid values to a right-continuous step function on [0, 1]."""
    return StepFunction(values, grid)
