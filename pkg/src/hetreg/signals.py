"""Finite trigonometric test signals with exact Sobolev bookkeeping.

Working with finite trig polynomials keeps every norm exact: the coefficient
of phi_j is theta_j, the smoothness-k ellipsoid weight is
a_j = sum_{i=0..k} (2 pi [j/2])^{2i}, and membership in the ball of radius r
is the exact inequality sum a_j theta_j^2 <= r. The catalogue deliberately
uses modes j >= 2 only (a_1 is the degenerate constant mode).
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .grid import trig_basis


def sobolev_weight(j: int, k: int) -> float:
    """Ellipsoid weight a_j = sum of squared derivative norms of phi_j."""
    if j < 1 or k < 1:
        raise ValueError(f"need j >= 1 and k >= 1, got j={j}, k={k}")
    m = j // 2
    if m == 0:
        return 1.0
    w = 2.0 * np.pi * m
    return float(sum(w ** (2 * i) for i in range(k + 1)))


@dataclass(frozen=True)
class TrigSignal:
    """A 1-periodic signal sum_j theta_j phi_j with finitely many modes."""

    name: str
    coeffs: Tuple[Tuple[int, float], ...]  # (j, theta_j), j >= 2, j distinct

    def __post_init__(self):
        seen = set()
        for j, _ in self.coeffs:
            if j < 2:
                raise ValueError(f"catalogue signals use modes j >= 2, got {j}")
            if j in seen:
                raise ValueError(f"duplicate mode {j} in {self.name}")
            seen.add(j)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for j, th in self.coeffs:
            out = out + th * trig_basis(j, x)
        return out if out.ndim else float(out)

    def coefficient(self, j: int) -> float:
        for jj, th in self.coeffs:
            if jj == j:
                return th
        return 0.0

    @property
    def max_mode(self) -> int:
        return max((j for j, _ in self.coeffs), default=1)

    @property
    def max_frequency(self) -> int:
        return max((j // 2 for j, _ in self.coeffs), default=0)

    def l2_norm_sq(self) -> float:
        return float(sum(th * th for _, th in self.coeffs))

    def sobolev_norm_sq(self, k: int) -> float:
        return float(sum(sobolev_weight(j, k) * th * th for j, th in self.coeffs))

    def is_member(self, k: int, r: float) -> bool:
        return self.sobolev_norm_sq(k) <= r

    def scaled_to(self, k: int, budget: float, name: str = "") -> "TrigSignal":
        """Rescale so the smoothness-k ellipsoid norm equals `budget` exactly."""
        cur = self.sobolev_norm_sq(k)
        if cur <= 0.0:
            raise ValueError("cannot rescale the zero signal")
        s = np.sqrt(budget / cur)
        return TrigSignal(name or self.name,
                          tuple((j, th * s) for j, th in self.coeffs))


ZERO_SIGNAL = TrigSignal("zero", ())

# base shapes; amplitudes are rescaled per (k, r) when building a catalogue
_SHAPES = (
    TrigSignal("cos1", ((2, 1.0),)),
    TrigSignal("sin2", ((5, 1.0),)),
    TrigSignal("mix3", ((2, 1.0), (5, 0.5), (8, 0.25))),
    TrigSignal("high6", ((12, 1.0),)),
)

_BUDGET_FRACTIONS = (0.5, 1.0, 1.25)


def catalogue(k: int, r: float):
    """Catalogue of (signal, member) pairs at exact budget fractions of r.

    Fractions <= 1 give members (the boundary case included), fractions > 1
    give non-members; the zero signal is a member of every ball.
    """
    if k < 1 or r <= 0.0:
        raise ValueError(f"need k >= 1 and r > 0, got k={k}, r={r}")
    entries = [(ZERO_SIGNAL, True)]
    for shape in _SHAPES:
        for frac in _BUDGET_FRACTIONS:
            sig = shape.scaled_to(k, frac * r, name=f"{shape.name}@{frac:g}r")
            entries.append((sig, frac <= 1.0))
    return entries


def members(k: int, r: float):
    """The member signals of the (k, r) catalogue, zero excluded."""
    return [s for s, ok in catalogue(k, r) if ok and s.coeffs]


def benchmark_signal(k: int = 1, amplitude: float = 0.15):
    """Default benchmark: the three-mode shape at 50% of its Sobolev budget.

    Returns (signal, r) with r = 2 * ||signal||_{W^k}^2, so the signal sits
    exactly at half the budget. The amplitude keeps r / varsigma(S) inside
    the weight-grid range down to n = 101 for the default econometric spec.
    """
    sig = TrigSignal(
        "bench3",
        ((2, amplitude), (5, 0.5 * amplitude), (8, 0.25 * amplitude)),
    )
    return sig, 2.0 * sig.sobolev_norm_sq(k)


def catalogue_table(k: int, r: float) -> str:
    """Serialize a catalogue to tab-separated text."""
    lines = ["name\tk\tr\tsobolev_norm_sq\tmember\tcoeffs"]
    for sig, ok in catalogue(k, r):
        coeffs = ";".join(f"{j}:{th:.17g}" for j, th in sig.coeffs)
        lines.append(
            f"{sig.name}\t{k}\t{r:.17g}\t{sig.sobolev_norm_sq(k):.17g}"
            f"\t{int(ok)}\t{coeffs}"
        )
    return "\n".join(lines) + "\n"
