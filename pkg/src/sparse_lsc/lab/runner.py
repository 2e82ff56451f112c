"""Monte-Carlo orchestration: per-trial computations, aggregation and pass/fail gating.

Trial ``t`` draws from ``RngStream(seed, t)``, so rows depend only on the
config, never on the number of workers or the scheduling order. Pass flags
are recomputed from the emitted rows alone.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..ensemble import RngStream, sample_pair as _sample_pair, sample_row
from ..resolvent import (IllConditioned, compute_pi, green_function, lsc_scan,
                         verify_gij_formula, verify_graded_resolution, verify_minor_identity,
                         verify_minor_trace, verify_perturbation_identity,
                         verify_self_consistent, verify_ward)
from ..spectra import (EigenSolverError, clt_statistics, delocalization_stats, dos_compare,
                       eigh, eigvalsh, rigidity_stats, top_eigen_report)
from .config import LabConfig

__all__ = ["ExperimentReport", "run", "fit_slack", "COLUMNS", "sample_pair",
           "evaluate", "FAILURE_LIMIT"]

FAILURE_LIMIT = 0.05

COLUMNS = {
    "identities": ("identity", "E", "eta", "residual", "trial"),
    "lsc": ("E", "eta", "kappa", "lambda", "lambda_d", "lambda_o", "psi", "bound_m",
            "bound_ij", "ratio_m", "ratio_ij", "trial"),
    "dos": ("E1", "E2", "count", "predicted", "rel_err", "trial"),
    "rigidity": ("alpha", "mu", "gamma", "abs_dev", "ref_curve", "trial"),
    "deloc": ("alpha", "mu", "sup_scaled", "trial"),
    "topeig": ("f", "mu_max", "overlap", "l2_to_e", "sup_norm_gap", "gap", "trial"),
    "clt": ("f", "mu_max", "trial"),
    "concentration": ("value", "bound", "trial"),
    "pi": ("E", "eta", "pi_re", "pi_im", "abs_pi", "bound", "ratio", "trial"),
}

_NUMERIC_FAILURES = (IllConditioned, EigenSolverError, FloatingPointError,
                     np.linalg.LinAlgError)


def sample_pair(cfg: LabConfig, t: int):
    """Centred ``H``, shifted ``A`` and the shift ``f`` for trial ``t``."""
    return _sample_pair(cfg.ensemble, RngStream(cfg.ensemble.seed, t))


# -- per-trial computations -------------------------------------------------

def _trial_identities(cfg, t):
    H, A, f = sample_pair(cfg, t)
    rows = []
    for z in cfg.grid():
        checks = {
            "ward": verify_ward(green_function(H, z)),
            "minor": verify_minor_identity(H, z, 0, 1, 2),
            "gij_formula": verify_gij_formula(H, z, 0, 1),
            "self_consistent": verify_self_consistent(H, z),
            "minor_trace": verify_minor_trace(H, z, 0),
            "perturbation": verify_perturbation_identity(H, f, z),
            "graded_resolution": verify_graded_resolution(H, z, 0, 1, (2, 3, 4)),
        }
        rows += [{"identity": name, "E": z.real, "eta": z.imag, "residual": r}
                 for name, r in checks.items()]
    return rows


def _trial_lsc(cfg, t):
    _, A, _ = sample_pair(cfg, t)
    return lsc_scan(A, cfg.grid(), cfg.ensemble.q, offdiag=cfg.offdiag)


def _trial_dos(cfg, t):
    _, A, _ = sample_pair(cfg, t)
    mus = eigvalsh(A)
    rows = []
    for E1, E2 in cfg.windows:
        c = dos_compare(mus, E1, E2)
        rows.append({"E1": E1, "E2": E2, "count": c.count, "predicted": c.predicted,
                     "rel_err": c.rel_err})
    return rows


def _trial_rigidity(cfg, t):
    _, A, _ = sample_pair(cfg, t)
    mus = eigvalsh(A)
    r = rigidity_stats(mus)
    return [{"alpha": a + 1, "mu": mus[a], "gamma": r.gamma[a], "abs_dev": r.deviations[a],
             "ref_curve": r.ref_curve[a]} for a in range(cfg.N - 1)]


def _trial_deloc(cfg, t):
    _, A, _ = sample_pair(cfg, t)
    D = eigh(A)
    _, per_alpha = delocalization_stats(D)
    return [{"alpha": a + 1, "mu": D.eigenvalues[a], "sup_scaled": per_alpha[a]}
            for a in range(cfg.N)]


def _trial_topeig(cfg, t):
    _, A, f = sample_pair(cfg, t)
    rep = top_eigen_report(eigh(A), f)
    return [{"f": f, "mu_max": rep.mu_max, "overlap": rep.overlap, "l2_to_e": rep.l2_to_e,
             "sup_norm_gap": rep.sup_norm_gap, "gap": rep.gap}]


def _trial_clt(cfg, t):
    _, A, f = sample_pair(cfg, t)
    return [{"f": f, "mu_max": eigvalsh(A)[-1]}]


def _concentration_bound(cfg):
    # coefficients A_i = 1: max|A_i| / q + (N^{-1} sum |A_i|^2)^{1/2}
    return math.log(cfg.N) ** cfg.slack_exponent * (1.0 / cfg.ensemble.q + 1.0)


def _trial_concentration(cfg, t):
    row = sample_row(cfg.ensemble, RngStream(cfg.ensemble.seed, t))
    return [{"value": float(row.sum()), "bound": _concentration_bound(cfg)}]


def _trial_pi(cfg, t):
    H, _, f = sample_pair(cfg, t)
    rows = []
    for z in cfg.grid():
        r = compute_pi(H, f, z, cfg.ensemble.q)
        rows.append({"E": z.real, "eta": z.imag, "pi_re": r.value.real,
                     "pi_im": r.value.imag, "abs_pi": abs(r.value), "bound": r.bound,
                     "ratio": r.ratio})
    return rows


_TRIALS = {
    "identities": _trial_identities, "lsc": _trial_lsc, "dos": _trial_dos,
    "rigidity": _trial_rigidity, "deloc": _trial_deloc, "topeig": _trial_topeig,
    "clt": _trial_clt, "concentration": _trial_concentration, "pi": _trial_pi,
}


def _run_trial(args):
    cfg, t = args
    try:
        rows = _TRIALS[cfg.experiment](cfg, t)
    except _NUMERIC_FAILURES as exc:
        return t, None, f"{type(exc).__name__}: {exc}"
    for row in rows:
        row["trial"] = t
    return t, rows, None


# -- aggregation ------------------------------------------------------------

def fit_slack(observed, bound, N, quantile=0.95) -> float:
    """Smallest ``s >= 0`` with ``observed <= (log N)^s * bound`` on a ``quantile`` fraction of rows."""
    observed = np.asarray(observed, dtype=float)
    bound = np.asarray(bound, dtype=float)
    if np.any(bound <= 0):
        raise ValueError("bounds must be positive")
    with np.errstate(divide="ignore"):
        s = np.log(observed / bound) / math.log(math.log(N))
    s = np.maximum(s, 0.0)
    return float(np.quantile(s, quantile, method="inverted_cdf"))


def _col(rows, key):
    return np.array([r[key] for r in rows], dtype=float)


def _per_trial(rows, key, reduce):
    trials = sorted({r["trial"] for r in rows})
    return np.array([reduce(_col([r for r in rows if r["trial"] == t], key)) for t in trials])


def _q(x, quantile):
    return float(np.quantile(x, quantile, method="inverted_cdf"))


def _eval_identities(cfg, rows):
    tol = cfg.tol("residual_max")
    summary, ok = {}, True
    for name in sorted({r["identity"] for r in rows}):
        res = _col([r for r in rows if r["identity"] == name], "residual")
        med = float(np.median(res))
        summary[name] = {"median": med, "max": float(res.max())}
        ok &= med <= tol
    return summary, ok


def _eval_lsc(cfg, rows):
    s = fit_slack(_col(rows, "lambda"), _col(rows, "bound_m"), cfg.N, cfg.tol("quantile"))
    summary = {"slack_m": s, "ratio_m_median": float(np.median(_col(rows, "ratio_m")))}
    if cfg.offdiag:
        lam_ij = np.maximum(_col(rows, "lambda_d"), _col(rows, "lambda_o"))
        summary["slack_ij"] = fit_slack(lam_ij, _col(rows, "bound_ij"), cfg.N,
                                        cfg.tol("quantile"))
    return summary, s <= cfg.tol("slack_max")


def _eval_dos(cfg, rows):
    summary, ok = {}, True
    for E1, E2 in cfg.windows:
        sel = [r for r in rows if r["E1"] == E1 and r["E2"] == E2]
        rel = _col(sel, "rel_err")
        med = float(np.median(rel))
        summary[f"({E1},{E2}]"] = {"median_rel_err": med,
                                   "predicted": sel[0]["predicted"],
                                   "count_median": float(np.median(_col(sel, "count")))}
        ok &= med <= cfg.tol("rel_err_max")
    return summary, ok


def rigidity_bound(N, q, polylog):
    phi = math.log(q) / math.log(N)
    return math.log(N) ** polylog * max(N ** (1 - 4 * phi), N ** (4 / 3 - 8 * phi))


def _eval_rigidity(cfg, rows):
    N = cfg.N
    sum_sq = _per_trial(rows, "abs_dev", lambda d: float(d @ d))
    bulk = [r for r in rows if 0.25 * N <= r["alpha"] <= 0.75 * N]
    bulk_median = _per_trial(bulk, "abs_dev", np.median)
    bound = rigidity_bound(N, cfg.ensemble.q, cfg.tol("polylog"))
    bulk_limit = cfg.tol("bulk_factor") * N ** (-2.0 / 3.0)
    qs = _q(sum_sq, cfg.tol("quantile"))
    med = float(np.median(bulk_median))
    summary = {"sum_sq_quantile": qs, "sum_sq_bound": bound,
               "bulk_median": med, "bulk_limit": bulk_limit}
    return summary, qs <= bound and med <= bulk_limit


def _eval_deloc(cfg, rows):
    N = cfg.N
    body = [r for r in rows if r["alpha"] < N]
    per_trial = _per_trial(body, "sup_scaled", np.max)
    qv = _q(per_trial, cfg.tol("quantile"))
    bound = math.log(N) ** cfg.tol("polylog")
    return {"max_sup_quantile": qv, "bound": bound,
            "max_sup_median": float(np.median(per_trial))}, qv <= bound


def _eval_topeig(cfg, rows):
    f = rows[0]["f"]
    mean_mu = float(_col(rows, "mu_max").mean())
    med_overlap = float(np.median(_col(rows, "overlap")))
    pred_mu, pred_ov = f + 1 / f, 1 - 1 / (2 * f * f)
    summary = {"mu_mean": mean_mu, "mu_predicted": pred_mu, "overlap_median": med_overlap,
               "overlap_predicted": pred_ov,
               "l2_median": float(np.median(_col(rows, "l2_to_e"))), "l2_predicted": 1 / f,
               "gap_min": float(_col(rows, "gap").min())}
    ok = (abs(mean_mu - pred_mu) <= cfg.tol("mu_band")
          and abs(med_overlap - pred_ov) <= cfg.tol("overlap_band"))
    return summary, ok


def _eval_clt(cfg, rows):
    rep = clt_statistics(_col(rows, "mu_max"), cfg.N)
    f = rows[0]["f"]
    summary = {"mean": rep.mean, "scaled_variance": rep.scaled_variance,
               "skewness": rep.skewness, "excess_kurtosis": rep.excess_kurtosis,
               "large_f_regime": bool(f >= math.log(cfg.N) ** (2 * cfg.slack_exponent))}
    ok = (cfg.tol("var_lo") <= rep.scaled_variance <= cfg.tol("var_hi")
          and abs(rep.skewness) <= cfg.tol("skew_max")
          and abs(rep.excess_kurtosis) <= cfg.tol("kurt_max"))
    return summary, ok


def _eval_concentration(cfg, rows):
    values = _col(rows, "value")
    qv = _q(np.abs(values), cfg.tol("quantile"))
    bound = rows[0]["bound"]
    sd = float(values.std(ddof=1))
    summary = {"abs_quantile": qv, "bound": bound, "sd": sd, "mean": float(values.mean())}
    return summary, qv <= bound and abs(sd - 1.0) <= cfg.tol("sd_band")


def _eval_pi(cfg, rows):
    ratio = _col(rows, "ratio")
    qv = _q(ratio, cfg.tol("quantile"))
    return {"ratio_quantile": qv, "ratio_median": float(np.median(ratio))}, \
        qv <= cfg.tol("ratio_max")


_EVALUATE = {
    "identities": _eval_identities, "lsc": _eval_lsc, "dos": _eval_dos,
    "rigidity": _eval_rigidity, "deloc": _eval_deloc, "topeig": _eval_topeig,
    "clt": _eval_clt, "concentration": _eval_concentration, "pi": _eval_pi,
}


def _column_stats(cfg, rows):
    out = {}
    for key in COLUMNS[cfg.experiment]:
        if key == "trial" or isinstance(rows[0][key], str):
            continue
        x = _col(rows, key)
        x = x[np.isfinite(x)]
        if x.size:
            out[key] = {"median": float(np.median(x)), "q05": float(np.quantile(x, 0.05)),
                        "q95": float(np.quantile(x, 0.95))}
    return out


def evaluate(cfg: LabConfig, rows: list, n_failed: int = 0):
    """Summary statistics and pass flag, recomputed from ``rows`` alone."""
    if not rows:
        return {"failed_trials": n_failed}, False
    summary, ok = _EVALUATE[cfg.experiment](cfg, rows)
    summary["columns"] = _column_stats(cfg, rows)
    summary["failed_trials"] = n_failed
    ok = bool(ok) and n_failed <= FAILURE_LIMIT * cfg.trials
    return summary, ok


@dataclass
class ExperimentReport:
    config: LabConfig
    rows: list
    summary: dict
    passed: bool
    wall_time: float
    failures: list = field(default_factory=list)

    @property
    def columns(self):
        return COLUMNS[self.config.experiment]


def run(cfg: LabConfig) -> ExperimentReport:
    """Run every trial of ``cfg`` and gate the result on its tolerances."""
    start = time.perf_counter()
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_trial, jobs,
                                    chunksize=max(1, cfg.trials // (4 * cfg.workers))))
    else:
        results = [_run_trial(job) for job in jobs]
    rows, failures = [], []
    for t, trial_rows, err in sorted(results, key=lambda r: r[0]):
        if err is not None:
            failures.append({"trial": t, "error": err})
        else:
            rows.extend(trial_rows)
    summary, ok = evaluate(cfg, rows, len(failures))
    return ExperimentReport(cfg, rows, summary, ok, time.perf_counter() - start, failures)
