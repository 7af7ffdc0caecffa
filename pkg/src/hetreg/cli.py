"""Batch experiment runner.

Subcommands: estimate, risk, oracle-check, efficiency, lower-bound, lemmas,
periodize. Options come from built-in defaults, overridden by a `key = value`
config file (--config), overridden by explicit flags. Every output starts
with a provenance block (`# key: value` lines) echoing the effective config
and seed, which suffices to reproduce the run bit-for-bit.

Exit codes: 0 success, 1 usage error (flags/config), 2 numeric or invariant
failure raised while running the experiment.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .estimator import ProcedureConfig, adaptive_fit
from .io import load_signal, save_observations, write_table
from .lowerbound import calibrate_prior, lower_bound_report
from .periodize import CutoffSpec, periodize
from .quadrature import NumericError
from .risklab import (efficiency_sweep, lemma_checks, mc_risk_sup,
                      oracle_inequality_check, pinsker_constant,
                      rate_exponent, risk_table)
from .scale import NoiseLaw, ScaleSpec, varsigma
from .signals import benchmark_signal
from .estimator import build_weight_grid


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_INT_KEYS = {"k", "reps", "seed", "k_star", "k_bar", "modes", "draws",
             "bound_draws"}
_FLOAT_KEYS = {"r", "rho", "eps", "omega_bar", "a", "b", "eps_aux", "eps_lb",
               "amplitude"}
_STR_KEYS = {"n", "spec", "laws", "estimator", "out", "input"}

DEFAULTS = {
    "n": "101,301,1001",
    "k": 1,
    "r": None,
    "spec": "1,1,1,0",
    "laws": "gaussian,scaled-uniform,two-point",
    "reps": 200,
    "seed": 20250809,
    "estimator": "adaptive",
    "rho": None,
    "eps": None,
    "k_star": None,
    "omega_bar": 0.0,
    "k_bar": 0,
    "a": 0.1,
    "b": 0.9,
    "eps_aux": None,
    "eps_lb": 0.1,
    "modes": 3,
    "draws": 200,
    "bound_draws": 200,
    "amplitude": 0.15,
    "out": None,
    "input": None,
}


def parse_config_file(path) -> dict:
    """Read `key = value` lines; unknown keys and bad values cite the line."""
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(
                    f"{path}: line {lineno}: expected 'key = value', got {line!r}"
                )
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}: line {lineno}: unknown key {key!r}")
            out[key] = _coerce(key, value, where=f"{path}: line {lineno}")
    return out


def _coerce(key, value, where="option"):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise UsageError(f"{where}: invalid value for {key}: {value!r}") from None
    return value


def _parse_n_list(text):
    try:
        values = [int(part) for part in str(text).replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"invalid n list: {text!r}") from None
    if not values:
        raise UsageError("empty n list")
    return values


def _parse_spec(text) -> ScaleSpec:
    try:
        coeffs = [float(part) for part in str(text).replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"invalid scale coefficients: {text!r}") from None
    if len(coeffs) != 4:
        raise UsageError(
            f"scale spec needs 4 coefficients c0,c1,c2,c3, got {len(coeffs)}"
        )
    return ScaleSpec.econometric(*coeffs)


def _parse_laws(text):
    try:
        return [NoiseLaw(part.strip()) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _procedure_config(n, cfg) -> ProcedureConfig:
    return ProcedureConfig.for_n(
        n, rho=cfg["rho"], eps=cfg["eps"], k_star=cfg["k_star"],
        omega_bar=cfg["omega_bar"], k_bar=cfg["k_bar"],
    )


def _effective(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(parse_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = _coerce(key, val) if isinstance(val, str) else val
    return cfg


def _provenance(command, cfg) -> dict:
    echo = " ".join(f"{k}={cfg[k]}" for k in sorted(cfg) if cfg[k] is not None)
    return {"hetreg": __version__, "command": command,
            "seed": cfg["seed"], "config": echo}


def _benchmark(cfg):
    signal, r_auto = benchmark_signal(cfg["k"], cfg["amplitude"])
    r = cfg["r"] if cfg["r"] is not None else r_auto
    return signal, r


# ---------------------------------------------------------------------------
# subcommand runners
# ---------------------------------------------------------------------------

def _run_estimate(cfg):
    if not cfg["input"]:
        raise UsageError("estimate needs --input signal file")
    obs = load_signal(cfg["input"])
    config = _procedure_config(obs.grid.n, cfg)
    estimate, lam, sd = adaptive_fit(obs, config)
    beta, t = lam.alpha
    head = ",".join(f"{v:.17g}" for v in sd.theta_hat[:8])
    prov = _provenance("estimate", cfg)
    prov.update({
        "n": obs.grid.n, "alpha_beta": beta, "alpha_t": f"{t:.17g}",
        "lambda_support": lam.support, "varsigma_hat": f"{sd.varsigma_hat:.17g}",
        "theta_hat_head": head,
    })
    body = "x\testimate\n" + "".join(
        f"{x:.17g}\t{v:.17g}\n" for x, v in zip(obs.grid.points, estimate.values)
    )
    return write_table(cfg["out"], body, prov)


def _run_risk(cfg):
    signal, r = _benchmark(cfg)
    spec = _parse_spec(cfg["spec"])
    laws = _parse_laws(cfg["laws"])
    level = varsigma(spec, signal)
    reports = []
    for n in _parse_n_list(cfg["n"]):
        sup, per_law = mc_risk_sup(
            signal, spec, n, cfg["estimator"], cfg["reps"], cfg["seed"],
            laws=laws, config=_procedure_config(n, cfg),
            k=cfg["k"], r=r,
        )
        for rep in per_law + [sup]:
            rep.gamma = pinsker_constant(cfg["k"], r, level)
            rep.ratio = n ** rate_exponent(cfg["k"]) * rep.empiric / rep.gamma
            reports.append(rep)
    return write_table(cfg["out"], risk_table(reports), _provenance("risk", cfg))


def _run_oracle_check(cfg):
    signal, r = _benchmark(cfg)
    spec = _parse_spec(cfg["spec"])
    laws = _parse_laws(cfg["laws"])
    header = ("n\treps\trho\tC_rho\tadaptive\tadaptive_se\tbest\tbest_se"
              "\tbest_beta\tbest_t\tslack\tslack_se\tn_slack\tslow_term"
              "\tslow_term_se\tcandidates\tsubsampled")
    lines = [header]
    for n in _parse_n_list(cfg["n"]):
        rec = oracle_inequality_check(
            signal, spec, n, config=_procedure_config(n, cfg),
            reps=cfg["reps"], seed=cfg["seed"], laws=laws,
        )
        beta, t = rec.best_alpha
        lines.append(
            f"{rec.n}\t{rec.reps}\t{rec.rho:.17g}\t{rec.oracle_coefficient:.17g}"
            f"\t{rec.adaptive_risk:.17g}\t{rec.adaptive_se:.17g}"
            f"\t{rec.best_candidate_risk:.17g}\t{rec.best_candidate_se:.17g}"
            f"\t{beta}\t{t:.17g}\t{rec.slack:.17g}\t{rec.slack_se:.17g}"
            f"\t{rec.scaled_slack:.17g}\t{rec.slow_term:.17g}"
            f"\t{rec.slow_term_se:.17g}\t{rec.candidates}\t{int(rec.subsampled)}"
        )
    return write_table(cfg["out"], "\n".join(lines) + "\n",
                       _provenance("oracle-check", cfg))


def _run_efficiency(cfg):
    signal, r = _benchmark(cfg)
    spec = _parse_spec(cfg["spec"])
    laws = _parse_laws(cfg["laws"])
    records = efficiency_sweep(
        cfg["k"], r, spec, signal, _parse_n_list(cfg["n"]), cfg["reps"],
        cfg["seed"], laws=laws, config_for=lambda n: _procedure_config(n, cfg),
    )
    header = ("n\tk\tr\tgamma_k\tR_hat\tR_stderr\tratio\tratio_se"
              "\toracle_ratio\tlaw\treps")
    lines = [header]
    for rec in records:
        lines.append(
            f"{rec.n}\t{rec.k}\t{rec.r:.17g}\t{rec.gamma:.17g}"
            f"\t{rec.risk:.17g}\t{rec.risk_se:.17g}\t{rec.ratio:.17g}"
            f"\t{rec.ratio_se:.17g}\t{rec.oracle_ratio:.17g}\t{rec.law}"
            f"\t{rec.reps}"
        )
    return write_table(cfg["out"], "\n".join(lines) + "\n",
                       _provenance("efficiency", cfg))


def _run_lower_bound(cfg):
    signal, r = _benchmark(cfg)
    spec = _parse_spec(cfg["spec"])
    n_list = _parse_n_list(cfg["n"])
    chunks = []
    for n in n_list:
        design = calibrate_prior(
            cfg["k"], r, n, cfg["eps_lb"],
            g0=_baseline_of(spec), n_modes=cfg["modes"],
        )
        report = lower_bound_report(
            design, spec, draws=cfg["draws"], bound_draws=cfg["bound_draws"],
            seed=cfg["seed"], config=_procedure_config(n, cfg),
        )
        chunks.append(report.table())
    return write_table(cfg["out"], "".join(chunks),
                       _provenance("lower-bound", cfg))


def _baseline_of(spec: ScaleSpec):
    def g0(x):
        zero = lambda t: np.zeros_like(np.asarray(t, dtype=np.float64))
        from .scale import eval_scale

        return eval_scale(spec, x, zero)

    return g0


def _run_lemmas(cfg):
    signal, r = _benchmark(cfg)
    records = lemma_checks(cfg["k"], r, _parse_n_list(cfg["n"]))
    lines = ["lemma\tsignal\tn\tlhs\tbound\tmargin\tok"]
    for rec in records:
        lines.append(
            f"{rec.lemma}\t{rec.signal}\t{rec.n}\t{rec.lhs:.17g}"
            f"\t{rec.bound:.17g}\t{rec.margin:.17g}\t{int(rec.ok)}"
        )
    if not all(rec.ok for rec in records):
        raise NumericError("appendix inequality violated; see the table")
    return write_table(cfg["out"], "\n".join(lines) + "\n",
                       _provenance("lemmas", cfg))


def _run_periodize(cfg):
    if not cfg["input"]:
        raise UsageError("periodize needs --input signal file")
    obs = load_signal(cfg["input"])
    spec = _parse_spec(cfg["spec"])
    if cfg["eps_aux"] is not None:
        cutoff = CutoffSpec(a=cfg["a"], b=cfg["b"], epsilon_aux=cfg["eps_aux"])
    else:
        cutoff = CutoffSpec.for_spec(cfg["a"], cfg["b"], spec)
    transformed = periodize(obs, cutoff, cfg["seed"])
    prov = _provenance("periodize", cfg)
    prov.update({"a": cutoff.a, "b": cutoff.b,
                 "epsilon_aux": f"{cutoff.epsilon_aux:.17g}"})
    if cfg["out"]:
        save_observations(cfg["out"], transformed, provenance=prov)
        return ""
    from .io import format_provenance

    body = "".join(
        f"{x:.17g} {y:.17g}\n"
        for x, y in zip(transformed.grid.points, transformed.y)
    )
    return format_provenance(prov) + body


_RUNNERS = {
    "estimate": _run_estimate,
    "risk": _run_risk,
    "oracle-check": _run_oracle_check,
    "efficiency": _run_efficiency,
    "lower-bound": _run_lower_bound,
    "lemmas": _run_lemmas,
    "periodize": _run_periodize,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="hetreg",
                     description="Adaptive heteroscedastic regression laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--input", help="input signal file (estimate/periodize)")
        p.add_argument("--n", help="comma-separated odd sample sizes")
        p.add_argument("--k", type=int, help="smoothness index")
        p.add_argument("--r", type=float, help="smoothness ball radius")
        p.add_argument("--spec", help="econometric coefficients c0,c1,c2,c3")
        p.add_argument("--laws", help="comma-separated noise laws")
        p.add_argument("--reps", type=int, help="Monte Carlo replications")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--estimator", help="adaptive | fixed | oracle-weight")
        p.add_argument("--rho", type=float, help="penalty coefficient override")
        p.add_argument("--eps", type=float, help="t-grid step override")
        p.add_argument("--k-star", dest="k_star", type=int,
                       help="largest candidate beta")
        p.add_argument("--omega-bar", dest="omega_bar", type=float,
                       help="bandwidth offset")
        p.add_argument("--k-bar", dest="k_bar", type=int, help="beta offset")
        p.add_argument("--a", type=float, help="periodize: plateau start")
        p.add_argument("--b", type=float, help="periodize: plateau end")
        p.add_argument("--eps-aux", dest="eps_aux", type=float,
                       help="periodize: auxiliary noise level")
        p.add_argument("--eps-lb", dest="eps_lb", type=float,
                       help="lower bound: budget slack in (0,1)")
        p.add_argument("--modes", type=int, help="lower bound: modes per block")
        p.add_argument("--draws", type=int, help="lower bound: Bayes-risk draws")
        p.add_argument("--bound-draws", dest="bound_draws", type=int,
                       help="lower bound: prior draws for F and B")
        p.add_argument("--amplitude", type=float,
                       help="benchmark signal amplitude")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _effective(args)
        text = _RUNNERS[args.command](cfg)
        if text and not cfg["out"]:
            sys.stdout.write(text)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, NumericError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
