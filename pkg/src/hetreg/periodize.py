"""Treat a non-periodic signal with the periodic machinery.

Multiplying the observations by a smooth cutoff chi that is 1 on an interior
interval [a, b] and flat-zero at both endpoints, and adding a small
independent gaussian jitter, yields observations from a 1-periodic target
S chi whose noise scale sqrt(sigma^2 chi^2 + eps^2) never degenerates. The
original S is then recoverable on [a, b], where chi = 1.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import gauss_legendre
from .lowerbound import bump, bump_norm
from .scale import Observations, ScaleSpec, scale_values


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth cutoff parameters: plateau [a, b] inside (0, 1) plus the
    auxiliary noise level; the convolution window is derived from (a, b)."""

    a: float
    b: float
    epsilon_aux: float

    def __post_init__(self):
        if not 0.0 < self.a < self.b < 1.0:
            raise ValueError(f"need 0 < a < b < 1, got a={self.a}, b={self.b}")
        if self.epsilon_aux <= 0.0:
            raise ValueError(f"epsilon_aux must be > 0, got {self.epsilon_aux}")

    @property
    def lo(self) -> float:
        return self.a / 2.0

    @property
    def hi(self) -> float:
        return self.b / 2.0 + 0.5

    @property
    def eta(self) -> float:
        return 0.25 * min(self.a, 1.0 - self.b)

    @classmethod
    def for_spec(cls, a: float, b: float, spec: ScaleSpec,
                 relative: float = 0.05) -> "CutoffSpec":
        """Auxiliary level tied to the variance floor: eps = relative sqrt(c0)."""
        return cls(a=a, b=b, epsilon_aux=relative * math.sqrt(spec.variance_floor))


def cutoff_eval(spec: CutoffSpec, x, nodes: int = 96):
    """chi(x): the indicator of [lo, hi] smoothed by the bump kernel at
    width eta; equals 1 on [a, b] and vanishes flat at 0 and 1."""
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    eta = spec.eta
    lo = np.maximum(-1.0, (x - spec.hi) / eta)
    hi = np.minimum(1.0, (x - spec.lo) / eta)
    half = np.clip(0.5 * (hi - lo), 0.0, None)
    mid = 0.5 * (hi + lo)
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    pts = mid[:, None] + half[:, None] * gl_x[None, :]
    out = half * (bump(pts) @ gl_w) / bump_norm()
    return float(out[0]) if scalar else out


def periodize(obs: Observations, spec: CutoffSpec, seed) -> Observations:
    """Transform observations to the periodized model.

    y~_j = chi(x_j) y_j + eps zeta_j with fresh standard gaussian zeta drawn
    from `seed` (keep it independent of the observation noise stream). The
    implied truth is S chi and the implied scale sqrt(sigma^2 chi^2 + eps^2).
    """
    rng = np.random.default_rng(seed)
    zeta = rng.standard_normal(obs.grid.n)
    chi = cutoff_eval(spec, obs.grid.points)
    y = chi * obs.y + spec.epsilon_aux * zeta
    truth = None
    if obs.truth is not None:
        base = obs.truth

        def truth(x, _base=base, _spec=spec):
            return np.asarray(_base(x), dtype=np.float64) * cutoff_eval(_spec, x)

    return Observations(y=y, grid=obs.grid, truth=truth, seed=seed)


def periodized_scale(scale_spec: ScaleSpec, cutoff: CutoffSpec,
                     grid, S) -> np.ndarray:
    """The transformed noise scales sqrt(g^2 chi^2 + eps^2) on the grid."""
    chi = cutoff_eval(cutoff, grid.points)
    sigma = scale_values(scale_spec, grid, S)
    return np.sqrt(sigma**2 * chi**2 + cutoff.epsilon_aux**2)
