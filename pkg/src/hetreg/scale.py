"""Heteroscedastic scale functionals, noise laws and data simulation.

The observation model is y_j = S(x_j) + g(x_j, S) xi_j on the odd-n grid,
with xi_j i.i.d. centered unit-variance noise. Two scale families are
supported:

* econometric: g^2(x, S) = c0 + c1 x + c2 S(x)^2 + c3 int S^2,  c0 > 0,
* general:     g^2(x, S) = G(x, S(x)) + int V(S(t)) dt,         G >= c0 > 0.

Both admit a Frechet derivative of g^2(x, .) in S, which the lower-bound
laboratory needs.
"""

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .grid import DesignGrid
from .quadrature import integrate_01

VARIANCE_FLOOR = 1e-8

ECONOMETRIC = "econometric"
GENERAL = "general-GV"


@dataclass(frozen=True)
class ScaleSpec:
    """A scale functional g(x, S); immutable and shareable across threads."""

    kind: str
    name: str = ""
    coeffs: tuple = ()
    G: Optional[Callable] = None
    V: Optional[Callable] = None
    G_y: Optional[Callable] = None
    V_dot: Optional[Callable] = None

    @classmethod
    def econometric(cls, c0: float, c1: float = 0.0, c2: float = 0.0,
                    c3: float = 0.0, name: str = "") -> "ScaleSpec":
        if c0 <= 0.0:
            raise ValueError(f"c0 must be > 0 (variance floor), got {c0}")
        if min(c1, c2, c3) < 0.0:
            raise ValueError(f"c1, c2, c3 must be >= 0, got {(c1, c2, c3)}")
        if c0 < VARIANCE_FLOOR:
            warnings.warn(
                f"variance floor c0={c0:g} is nearly degenerate", stacklevel=2
            )
        name = name or f"econ({c0:g},{c1:g},{c2:g},{c3:g})"
        return cls(kind=ECONOMETRIC, name=name,
                   coeffs=(float(c0), float(c1), float(c2), float(c3)))

    @classmethod
    def general(cls, G, V, G_y=None, V_dot=None, name: str = "general") -> "ScaleSpec":
        return cls(kind=GENERAL, name=name, G=G, V=V, G_y=G_y, V_dot=V_dot)

    @property
    def variance_floor(self) -> float:
        return self.coeffs[0] if self.kind == ECONOMETRIC else VARIANCE_FLOOR


@lru_cache(maxsize=512)
def _integral_term(spec: ScaleSpec, S) -> float:
    # the only S-global quantity in g^2; cached so scale values are O(1) per point
    if spec.kind == ECONOMETRIC:
        return integrate_01(lambda t: np.asarray(S(t)) ** 2)
    return integrate_01(lambda t: spec.V(np.asarray(S(t))))


def _squared_scale(spec: ScaleSpec, x, S):
    x = np.asarray(x, dtype=np.float64)
    sx = np.asarray(S(x), dtype=np.float64)
    if spec.kind == ECONOMETRIC:
        c0, c1, c2, c3 = spec.coeffs
        g2 = c0 + c1 * x + c2 * sx**2
        if c3 > 0.0:
            g2 = g2 + c3 * _integral_term(spec, S)
    elif spec.kind == GENERAL:
        g2 = np.asarray(spec.G(x, sx), dtype=np.float64) + _integral_term(spec, S)
    else:
        raise ValueError(f"unknown scale kind {spec.kind!r}")
    return g2


def eval_scale(spec: ScaleSpec, x, S) -> float:
    """g(x, S) = sqrt(g^2(x, S)); x may be a scalar or an array."""
    g2 = np.asarray(_squared_scale(spec, x, S), dtype=np.float64)
    if np.any(g2 < 0.0):
        raise RuntimeError("negative squared scale; spec invariants violated")
    out = np.sqrt(g2)
    return out if out.ndim else float(out)


def scale_values(spec: ScaleSpec, grid: DesignGrid, S) -> np.ndarray:
    """Vector of g(x_j, S) over the design grid."""
    return np.asarray(eval_scale(spec, grid.points, S), dtype=np.float64)


def varsigma(spec: ScaleSpec, S) -> float:
    """Integrated squared scale int_0^1 g^2(x, S) dx."""
    if spec.kind == ECONOMETRIC:
        c0, c1, c2, c3 = spec.coeffs
        extra = (c2 + c3) * _integral_term(spec, S) if (c2 or c3) else 0.0
        return c0 + 0.5 * c1 + extra
    return integrate_01(lambda x: _squared_scale(spec, x, S))


def frechet_derivative(spec: ScaleSpec, x, S, f) -> float:
    """First-order response of g^2(x, .) at S in the direction f."""
    x = np.asarray(x, dtype=np.float64)
    sx = np.asarray(S(x), dtype=np.float64)
    fx = np.asarray(f(x), dtype=np.float64)
    if spec.kind == ECONOMETRIC:
        c0, c1, c2, c3 = spec.coeffs
        out = 2.0 * c2 * sx * fx
        if c3 > 0.0:
            out = out + 2.0 * c3 * integrate_01(
                lambda t: np.asarray(S(t)) * np.asarray(f(t))
            )
    else:
        if spec.G_y is None or spec.V_dot is None:
            raise ValueError(
                "general scale spec needs G_y and V_dot handles for the derivative"
            )
        out = np.asarray(spec.G_y(x, sx), dtype=np.float64) * fx
        out = out + integrate_01(lambda t: spec.V_dot(np.asarray(S(t))) * np.asarray(f(t)))
    out = np.asarray(out, dtype=np.float64)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# noise laws: centered, unit variance, finite fourth moment
# ---------------------------------------------------------------------------

_FOURTH_MOMENTS = {"gaussian": 3.0, "scaled-uniform": 9.0 / 5.0, "two-point": 1.0}


@dataclass(frozen=True)
class NoiseLaw:
    """One member of the centered unit-variance noise catalogue."""

    kind: str

    def __post_init__(self):
        if self.kind not in _FOURTH_MOMENTS:
            raise ValueError(
                f"unknown noise law {self.kind!r}; "
                f"choose from {sorted(_FOURTH_MOMENTS)}"
            )

    @property
    def fourth_moment(self) -> float:
        return _FOURTH_MOMENTS[self.kind]

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "scaled-uniform":
            root3 = np.sqrt(3.0)
            return rng.uniform(-root3, root3, size)
        return rng.integers(0, 2, size).astype(np.float64) * 2.0 - 1.0


GAUSSIAN = NoiseLaw("gaussian")
SCALED_UNIFORM = NoiseLaw("scaled-uniform")
TWO_POINT = NoiseLaw("two-point")
NOISE_CATALOGUE = (GAUSSIAN, SCALED_UNIFORM, TWO_POINT)


@dataclass
class Observations:
    """Observed vector y on a design grid, with optional ground truth."""

    y: np.ndarray
    grid: DesignGrid
    truth: Optional[Callable] = None
    seed: Optional[int] = field(default=None)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.y.shape != (self.grid.n,):
            raise ValueError(
                f"observation length {self.y.shape} does not match n={self.grid.n}"
            )


def simulate(S, spec: ScaleSpec, law: NoiseLaw, n: int, seed) -> Observations:
    """Draw y_j = S(x_j) + g(x_j, S) xi_j, deterministically for a given seed."""
    grid = DesignGrid(n)
    rng = np.random.default_rng(seed)
    xi = law.sample(rng, grid.n)
    sx = np.broadcast_to(
        np.asarray(S(grid.points), dtype=np.float64), (grid.n,)
    )
    y = sx + scale_values(spec, grid, S) * xi
    return Observations(y=y, grid=grid, truth=S, seed=seed)
