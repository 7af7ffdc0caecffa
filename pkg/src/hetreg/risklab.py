"""Monte Carlo risk laboratory.

Estimates the empiric-norm and integral-norm quadratic risks of the adaptive,
fixed-weight and oracle-weight estimators, the Pinsker constant, the
oracle-inequality slack and the efficiency ratios, and runs the exact
appendix inequality checks (spectral tail bound, basis square-sum bound,
grid-vs-integral coefficient bound).

Replication r of a run uses the generator seeded by SeedSequence
([master_seed, stream, r]) where `stream` encodes the noise law, so runs are
reproducible and common random numbers are shared across estimator kinds.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .estimator import (ProcedureConfig, WeightGrid, WeightVector,
                        build_weight_grid, oracle_weight, tail_index)
from .grid import DesignGrid, basis_matrix
from .quadrature import gauss_legendre
from .scale import (NOISE_CATALOGUE, GAUSSIAN, NoiseLaw, ScaleSpec,
                    scale_values, varsigma)
from .signals import sobolev_weight

_LAW_STREAMS = {"gaussian": 0, "scaled-uniform": 1, "two-point": 2}

_KIND_ALIASES = {
    "adaptive": "adaptive",
    "fixed": "fixed",
    "fixed-lambda": "fixed",
    "oracle": "oracle",
    "oracle-weight": "oracle",
}


def rep_rng(master_seed: int, stream: int, rep: int) -> np.random.Generator:
    """Generator for one replication; a pure function of its arguments."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, stream, rep]))


def pinsker_constant(k: int, r: float, varsigma_s: float) -> float:
    """Sharp minimax risk constant gamma_k = Gamma*_k r^(1/(2k+1)) vs^(2k/(2k+1))."""
    if varsigma_s <= 0.0:
        raise ValueError(f"varsigma must be > 0, got {varsigma_s}")
    if k < 1 or r <= 0.0:
        raise ValueError(f"need k >= 1 and r > 0, got k={k}, r={r}")
    p = 2.0 * k + 1.0
    gamma_star = p ** (1.0 / p) * (k / (np.pi * (k + 1.0))) ** (2.0 * k / p)
    return gamma_star * r ** (1.0 / p) * varsigma_s ** (2.0 * k / p)


def rate_exponent(k: int) -> float:
    return 2.0 * k / (2.0 * k + 1.0)


# ---------------------------------------------------------------------------
# the batched Monte Carlo engine
# ---------------------------------------------------------------------------

class Experiment:
    """Per-(signal, spec, n) precomputation shared by all laws/estimators."""

    def __init__(self, S, spec: ScaleSpec, n: int,
                 config: ProcedureConfig = None, quad_nodes_per_cell: int = 12):
        self.S = S
        self.spec = spec
        self.grid = DesignGrid(n)
        self.n = n
        self.config = config if config is not None else ProcedureConfig.for_n(n)
        self.phi = basis_matrix(self.grid.points, n)
        self.s_grid = np.broadcast_to(
            np.asarray(S(self.grid.points), dtype=np.float64), (n,)
        )
        self.theta_n = (self.s_grid @ self.phi) / n
        self.sigma = scale_values(spec, self.grid, S)
        self.l_n = tail_index(n)
        self._wgrid: Optional[WeightGrid] = None
        # cell moments of S for the integral-norm risk of step extensions
        q = quad_nodes_per_cell
        xg, wg = gauss_legendre(q, 0.0, 1.0 / n)
        nodes = (np.arange(n)[:, None] / n + xg[None, :]).ravel()
        weights = np.tile(wg, n)
        s_nodes = np.asarray(S(nodes), dtype=np.float64)
        s_nodes = np.broadcast_to(s_nodes, nodes.shape)
        self.cell_mean = (weights * s_nodes).reshape(n, q).sum(axis=1)
        self.sq_integral = float((weights * s_nodes**2).sum())

    @property
    def weight_grid(self) -> WeightGrid:
        if self._wgrid is None:
            self._wgrid = build_weight_grid(self.n, self.config)
        return self._wgrid

    def varsigma_jn(self) -> np.ndarray:
        """Exact per-coefficient noise energies (1/n) sum_l sigma_l^2 phi_j(x_l)^2."""
        return (self.sigma**2) @ (self.phi**2) / self.n

    def noise_batch(self, law: NoiseLaw, reps: int, seed: int) -> np.ndarray:
        stream = _LAW_STREAMS[law.kind]
        out = np.empty((reps, self.n))
        for r in range(reps):
            out[r] = law.sample(rep_rng(seed, stream, r), self.n)
        return out

    def coefficient_batch(self, xi: np.ndarray) -> np.ndarray:
        """theta_hat rows for the observation batch S + sigma * xi."""
        y = self.s_grid[None, :] + self.sigma[None, :] * xi
        return (y @ self.phi) / self.n

    def integral_risks(self, coeffs: np.ndarray) -> np.ndarray:
        """Integral-norm risks ||T(S_hat) - S||^2 for a batch of estimates.

        Uses the closed form sum_k (c_k^2 / n - 2 c_k int_cell S) + int S^2
        for the step extension with cell values c_k."""
        values = coeffs @ self.phi.T
        return ((values**2).sum(axis=1) / self.n
                - 2.0 * (values @ self.cell_mean) + self.sq_integral)

    def run(self, law: NoiseLaw, estimator: str, reps: int, seed: int,
            lam: WeightVector = None, k: int = None, r: float = None):
        """Per-replication empiric and integral risks plus selected indices."""
        kind = _KIND_ALIASES.get(estimator)
        if kind is None:
            raise ValueError(f"unknown estimator kind {estimator!r}")
        if reps < 2:
            raise ValueError(f"need reps >= 2 for standard errors, got {reps}")
        xi = self.noise_batch(law, reps, seed)
        theta = self.coefficient_batch(xi)
        if kind == "adaptive":
            wg = self.weight_grid
            t2 = theta**2
            varsig = t2[:, self.l_n:].sum(axis=1)
            tt = t2 - varsig[:, None] / self.n
            pen = self.config.rho * varsig / self.n
            sel, risks = _kernels.select_and_risk(
                theta, t2, tt, wg.matrix, wg.matrix_sq, wg.sq_sums, pen,
                self.theta_n,
            )
            coeffs = wg.matrix[sel] * theta
            alphas = [wg.alphas[int(s)] for s in sel]
        else:
            if kind == "oracle":
                if k is None or r is None:
                    raise ValueError("oracle estimator needs k and r")
                lam = oracle_weight(k, r, self.spec, self.S, self.n, self.config)
            elif lam is None:
                raise ValueError("fixed estimator needs a weight vector")
            w = lam.lam if isinstance(lam, WeightVector) else np.asarray(lam)
            resid = w[None, :] * theta - self.theta_n[None, :]
            risks = np.einsum("rj,rj->r", resid, resid)
            coeffs = w[None, :] * theta
            alphas = None
        return risks, self.integral_risks(coeffs), alphas

    def per_candidate_risks(self, theta: np.ndarray, wg: WeightGrid) -> np.ndarray:
        """Empiric risks of every fixed candidate for every replication."""
        cross = (theta * self.theta_n[None, :]) @ wg.matrix.T
        energy = (theta**2) @ wg.matrix_sq.T
        return energy - 2.0 * cross + float(self.theta_n @ self.theta_n)


def exact_fixed_risk(lam, theta_n: np.ndarray, varsig_jn: np.ndarray, n: int) -> float:
    """Exact finite-n empiric risk of a fixed-weight estimator:
    sum (1 - lam_j)^2 theta_{j,n}^2 + (1/n) sum lam_j^2 varsigma_{j,n}."""
    w = lam.lam if isinstance(lam, WeightVector) else np.asarray(lam)
    return float(((1.0 - w) ** 2) @ (theta_n**2) + (w**2) @ varsig_jn / n)


@dataclass
class RiskReport:
    """Monte Carlo risks of one estimator under one noise law."""

    n: int
    signal: str
    spec_name: str
    law: str
    estimator: str
    reps: int
    empiric: float
    empiric_se: float
    integral: float
    integral_se: float
    k: Optional[int] = None
    r: Optional[float] = None
    gamma: Optional[float] = None
    ratio: Optional[float] = None


def _mean_se(values: np.ndarray) -> Tuple[float, float]:
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def mc_risk(S, spec: ScaleSpec, law: NoiseLaw, n: int, estimator: str,
            reps: int, seed: int, config: ProcedureConfig = None,
            lam: WeightVector = None, k: int = None, r: float = None) -> RiskReport:
    """Monte Carlo estimate of both quadratic risks for one estimator."""
    exp = Experiment(S, spec, n, config)
    emp, integ, _ = exp.run(law, estimator, reps, seed, lam=lam, k=k, r=r)
    emp_m, emp_se = _mean_se(emp)
    int_m, int_se = _mean_se(integ)
    return RiskReport(
        n=n, signal=getattr(S, "name", "signal"), spec_name=spec.name,
        law=law.kind, estimator=estimator, reps=reps,
        empiric=emp_m, empiric_se=emp_se, integral=int_m, integral_se=int_se,
        k=k, r=r,
    )


def mc_risk_sup(S, spec: ScaleSpec, n: int, estimator: str, reps: int,
                seed: int, laws: Sequence[NoiseLaw] = NOISE_CATALOGUE,
                config: ProcedureConfig = None, lam: WeightVector = None,
                k: int = None, r: float = None):
    """Per-law reports plus the supremum over the noise catalogue."""
    exp = Experiment(S, spec, n, config)
    reports = []
    for law in laws:
        emp, integ, _ = exp.run(law, estimator, reps, seed, lam=lam, k=k, r=r)
        emp_m, emp_se = _mean_se(emp)
        int_m, int_se = _mean_se(integ)
        reports.append(RiskReport(
            n=n, signal=getattr(S, "name", "signal"), spec_name=spec.name,
            law=law.kind, estimator=estimator, reps=reps,
            empiric=emp_m, empiric_se=emp_se, integral=int_m,
            integral_se=int_se, k=k, r=r,
        ))
    top = max(reports, key=lambda rep: rep.empiric)
    sup = RiskReport(
        n=n, signal=top.signal, spec_name=top.spec_name, law="sup",
        estimator=estimator, reps=reps, empiric=top.empiric,
        empiric_se=top.empiric_se,
        integral=max(rep.integral for rep in reports),
        integral_se=max(rep.integral_se for rep in reports),
        k=k, r=r,
    )
    return sup, reports


# ---------------------------------------------------------------------------
# oracle inequality and efficiency
# ---------------------------------------------------------------------------

@dataclass
class OracleCheckRecord:
    """Empirical slack of the oracle inequality at one sample size."""

    n: int
    reps: int
    rho: float
    oracle_coefficient: float
    adaptive_risk: float
    adaptive_se: float
    best_candidate_risk: float
    best_candidate_se: float
    best_alpha: Tuple[int, float]
    slack: float
    slack_se: float
    scaled_slack: float       # n * slack
    slow_term: float          # n * slack / n^0.2
    slow_term_se: float
    candidates: int
    subsampled: bool


def _subsample_indices(wg: WeightGrid, max_candidates: int) -> np.ndarray:
    if len(wg) <= max_candidates:
        return np.arange(len(wg))
    per_beta = max(1, max_candidates // wg.config.k_star)
    stride = max(1, math.ceil(wg.m / per_beta))
    keep = []
    for idx, (beta, t) in enumerate(wg.alphas):
        i = int(round(t / wg.config.eps))
        if i % stride == 0 or i == wg.m:
            keep.append(idx)
    return np.asarray(keep, dtype=np.int64)


def oracle_inequality_check(S, spec: ScaleSpec, n: int,
                            config: ProcedureConfig = None, reps: int = 400,
                            seed: int = 0,
                            laws: Sequence[NoiseLaw] = NOISE_CATALOGUE,
                            max_candidates: int = 256) -> OracleCheckRecord:
    """Estimate slack = sup-risk(adaptive) - C(rho) min_lambda sup-risk(fixed).

    The candidate minimum is exact for small families and uses a recorded
    deterministic t-grid subsample beyond `max_candidates` candidates.
    Common random numbers are shared between the adaptive run and every
    candidate, which keeps the slack estimate tight.
    """
    exp = Experiment(S, spec, n, config)
    wg = exp.weight_grid
    keep = _subsample_indices(wg, max_candidates)
    adaptive_per_law = []
    candidate_per_law = []
    for law in laws:
        xi = exp.noise_batch(law, reps, seed)
        theta = exp.coefficient_batch(xi)
        t2 = theta**2
        varsig = t2[:, exp.l_n:].sum(axis=1)
        tt = t2 - varsig[:, None] / n
        pen = exp.config.rho * varsig / n
        _, risks = _kernels.select_and_risk(
            theta, t2, tt, wg.matrix, wg.matrix_sq, wg.sq_sums, pen,
            exp.theta_n,
        )
        adaptive_per_law.append(risks)
        candidate_per_law.append(exp.per_candidate_risks(theta, wg)[:, keep])

    ad_means = np.array([r.mean() for r in adaptive_per_law])
    ad_law = int(np.argmax(ad_means))
    ad_risk, ad_se = _mean_se(adaptive_per_law[ad_law])

    cand_means = np.stack([c.mean(axis=0) for c in candidate_per_law])
    cand_sup = cand_means.max(axis=0)
    best = int(np.argmin(cand_sup))
    best_law = int(np.argmax(cand_means[:, best]))
    best_risk, best_se = _mean_se(candidate_per_law[best_law][:, best])

    coeff = exp.config.oracle_coefficient
    slack = ad_risk - coeff * best_risk
    slack_se = math.hypot(ad_se, coeff * best_se)
    return OracleCheckRecord(
        n=n, reps=reps, rho=exp.config.rho, oracle_coefficient=coeff,
        adaptive_risk=ad_risk, adaptive_se=ad_se,
        best_candidate_risk=best_risk, best_candidate_se=best_se,
        best_alpha=wg.alphas[int(keep[best])],
        slack=slack, slack_se=slack_se,
        scaled_slack=n * slack,
        slow_term=n * slack / n**0.2,
        slow_term_se=n * slack_se / n**0.2,
        candidates=keep.size, subsampled=keep.size < len(wg),
    )


@dataclass
class EfficiencyRecord:
    """Normalized risk against the Pinsker constant at one sample size."""

    n: int
    k: int
    r: float
    gamma: float
    risk: float
    risk_se: float
    ratio: float
    ratio_se: float
    oracle_ratio: float        # deterministic, from the exact fixed-weight risk
    law: str
    reps: int


def deterministic_oracle_ratio(k: int, r: float, spec: ScaleSpec, S, n: int,
                               config: ProcedureConfig = None) -> float:
    """n^(2k/(2k+1)) times the exact oracle-weight risk over gamma_k(S)."""
    exp = Experiment(S, spec, n, config)
    lam = oracle_weight(k, r, spec, S, n, exp.config)
    risk = exact_fixed_risk(lam, exp.theta_n, exp.varsigma_jn(), n)
    gamma = pinsker_constant(k, r, varsigma(spec, S))
    return n ** rate_exponent(k) * risk / gamma


def efficiency_sweep(k: int, r: float, spec: ScaleSpec, S,
                     n_list: Sequence[int], reps: int, seed: int,
                     laws: Sequence[NoiseLaw] = NOISE_CATALOGUE,
                     config_for=None) -> List[EfficiencyRecord]:
    """Ratios n^(2k/(2k+1)) R_hat / gamma_k(S) along a sample-size sweep."""
    gamma = pinsker_constant(k, r, varsigma(spec, S))
    records = []
    for n in n_list:
        config = config_for(n) if config_for else None
        sup, _ = mc_risk_sup(S, spec, n, "adaptive", reps, seed, laws, config)
        scale = n ** rate_exponent(k)
        records.append(EfficiencyRecord(
            n=n, k=k, r=r, gamma=gamma,
            risk=sup.empiric, risk_se=sup.empiric_se,
            ratio=scale * sup.empiric / gamma,
            ratio_se=scale * sup.empiric_se / gamma,
            oracle_ratio=deterministic_oracle_ratio(k, r, spec, S, n, config),
            law=sup.law, reps=reps,
        ))
    return records


# ---------------------------------------------------------------------------
# appendix inequality checks (exact, no Monte Carlo)
# ---------------------------------------------------------------------------

@dataclass
class LemmaRecord:
    lemma: str
    signal: str
    n: int
    lhs: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.bound

    @property
    def margin(self) -> float:
        return self.bound - self.lhs


def tail_bound_check(S, k: int, n: int) -> LemmaRecord:
    """max_m m^(2k) sum_{j>m} theta_{j,n}^2 against 4 r / pi^(2(k-1)),
    with r the signal's exact smoothness-k budget."""
    grid = DesignGrid(n)
    phi = basis_matrix(grid.points, n)
    s_grid = np.asarray(S(grid.points), dtype=np.float64)
    theta_n = (s_grid @ phi) / n
    t2 = theta_n**2
    tails = t2[::-1].cumsum()[::-1]  # tails[m] = sum_{j > m} theta^2, 1-based m
    m = np.arange(1, n, dtype=np.float64)
    lhs = float((m ** (2 * k) * tails[1:]).max())
    r_exact = S.sobolev_norm_sq(k)
    bound = 4.0 * r_exact / np.pi ** (2 * (k - 1))
    return LemmaRecord("tail", S.name, n, lhs, bound)


def basis_square_sum_check(m_power: int, n_max: int, x_grid: np.ndarray) -> LemmaRecord:
    """max over N <= n_max and x of N^-m |sum_{l=2..N} l^m (phi_l^2 - 1)| vs 2^m."""
    phi = basis_matrix(x_grid, n_max)
    terms = (np.arange(1, n_max + 1, dtype=np.float64) ** m_power) * (phi**2 - 1.0)
    prefix = terms[:, 1:].cumsum(axis=1)  # over l = 2..N
    norms = np.arange(2, n_max + 1, dtype=np.float64) ** m_power
    lhs = float((np.abs(prefix) / norms[None, :]).max())
    return LemmaRecord(f"basis-square-sum(m={m_power})", "-", n_max, lhs,
                       2.0**m_power)


def coefficient_drift_check(S, n: int) -> LemmaRecord:
    """max_j |theta_{j,n} - theta_j| / (j/n) against 2 pi sqrt(r1),
    with r1 the signal's exact first-order budget."""
    grid = DesignGrid(n)
    phi = basis_matrix(grid.points, n)
    s_grid = np.asarray(S(grid.points), dtype=np.float64)
    theta_n = (s_grid @ phi) / n
    theta = np.array([S.coefficient(j) for j in range(1, n + 1)])
    j = np.arange(1, n + 1, dtype=np.float64)
    lhs = float((np.abs(theta_n - theta) / (j / n)).max())
    bound = 2.0 * np.pi * math.sqrt(S.sobolev_norm_sq(1))
    return LemmaRecord("coefficient-drift", S.name, n, lhs, bound)


def lemma_checks(k: int, r: float, n_list: Sequence[int],
                 signal_set=None) -> List[LemmaRecord]:
    """All three appendix bounds over a signal catalogue and an n sweep."""
    from .signals import members

    if signal_set is None:
        signal_set = members(k, r)
    records = []
    x_grid = np.linspace(0.0, 1.0, 801)
    for n in n_list:
        for m_power in (0, 1, 2, 3):
            records.append(basis_square_sum_check(m_power, min(n, 256), x_grid))
        for S in signal_set:
            records.append(tail_bound_check(S, k, n))
            records.append(coefficient_drift_check(S, n))
    return records


def risk_table(reports: Sequence[RiskReport]) -> str:
    """Serialize risk reports to tab-separated text with a header row."""
    header = ("n\tk\tr\tlaw\testimator\tR_hat\tR_stderr\tT_hat\tT_stderr"
              "\tgamma_k\tratio")
    lines = [header]
    for rep in reports:
        k = "" if rep.k is None else str(rep.k)
        r = "" if rep.r is None else f"{rep.r:.17g}"
        gamma = "" if rep.gamma is None else f"{rep.gamma:.17g}"
        ratio = "" if rep.ratio is None else f"{rep.ratio:.17g}"
        lines.append(
            f"{rep.n}\t{k}\t{r}\t{rep.law}\t{rep.estimator}"
            f"\t{rep.empiric:.17g}\t{rep.empiric_se:.17g}"
            f"\t{rep.integral:.17g}\t{rep.integral_se:.17g}\t{gamma}\t{ratio}"
        )
    return "\n".join(lines) + "\n"
