"""Risk evaluation, oracle benchmarking and the replicated rate experiment.

The experiment simulates the model over a grid of sample sizes, runs the
selection rule(s) on every replicate, aggregates weighted-norm risks and fits
the log-log slope of the median risk against n.  Replicates are keyed by
(seed, n, r), so output is independent of worker count; per-sample moments
are accumulated in fixed row chunks while the draws stream out of the
generator, which keeps peak memory small at large n and reproduces
``moments(simulate(...))`` bit for bit.

Truncation-tail bias of the simulated slope is added analytically to every
reported risk, so the finite simulation never flatters the estimator.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .basis import _coef_array, _weight_array
from .datagen import SlopeSpec, default_truncation, make_slope, slope_tail_bias, substream
from .estimator import (
    SampleMoments,
    chunk_rows,
    moments,
    select_data_driven,
    select_known,
)
from .sequences import (
    PenaltyScales,
    SequenceSpec,
    bound_M,
    intrinsic_scales,
    theoretical_rate,
)

__all__ = [
    "NumericError",
    "RiskReport",
    "risk",
    "fixed_dim_risk_curve",
    "oracle_risk",
    "fit_slope",
    "experiment_plans",
    "replicate_moments",
    "run_experiment",
    "write_risk_csv",
]

# Log-fit floor substituted for exactly-zero median risks (degenerate runs).
_RISK_FLOOR = np.finfo(float).tiny


class NumericError(RuntimeError):
    """A numeric contract failed (e.g. nonpositive risks in a log-log fit)."""


def risk(beta_hat, beta, w) -> float:
    """Weighted squared-norm loss of beta_hat against beta (zero-padding)."""
    fc = _coef_array(beta_hat)
    gc = _coef_array(beta)
    size = max(fc.size, gc.size)
    diff = np.zeros(size)
    diff[: fc.size] = fc
    diff[: gc.size] -= gc
    weights = _weight_array(w)
    m = min(size, weights.size)
    return float(np.sum(weights[:m] * diff[:m] ** 2))


def fixed_dim_risk_curve(
    mom: SampleMoments, beta, w, m_max: int | None = None, tail: float = 0.0
) -> np.ndarray:
    """Risk of the fixed-dimension estimator against beta for m = 1..m_max.

    Entry m-1 holds sum_{j<=m} w_j (bhat_j - beta_j)^2 + sum_{j>m} w_j beta_j^2
    + tail, where bhat is the thresholded coefficient ratio.
    """
    if m_max is None:
        m_max = mom.n_coef
    beta_arr = _coef_array(beta)
    weights = _weight_array(w)
    length = max(m_max, beta_arr.size)
    wpad = np.zeros(length)
    wpad[: min(length, weights.size)] = weights[: min(length, weights.size)]
    b = np.zeros(length)
    b[: beta_arr.size] = beta_arr

    alive = mom.lhat[:m_max] >= 1.0 / mom.n
    est = np.zeros(m_max)
    est[alive] = mom.ghat[:m_max][alive] / mom.lhat[:m_max][alive]

    sq_err = wpad[:m_max] * (est - b[:m_max]) ** 2
    bias_terms = wpad * b * b
    cum_bias = np.cumsum(bias_terms)
    return np.cumsum(sq_err) + (cum_bias[-1] - cum_bias[:m_max]) + tail


def oracle_risk(samples, beta, w, m_max: int, tail: float = 0.0):
    """Best fixed dimension in hindsight: (best_m, mean risk at best_m).

    ``samples`` is an iterable of Sample or SampleMoments; the mean risk over
    replicates is minimized over fixed m with smallest-m tie-break.
    """
    curves = []
    for s in samples:
        mom = s if isinstance(s, SampleMoments) else moments(s)
        curves.append(fixed_dim_risk_curve(mom, beta, w, m_max, tail))
    if not curves:
        raise ValueError("need at least one replicate")
    mean_curve = np.mean(np.vstack(curves), axis=0)
    best = int(np.argmin(mean_curve)) + 1
    return best, float(mean_curve[best - 1])


def fit_slope(pairs) -> float:
    """Exact OLS slope of log(risk) on log(n)."""
    arr = np.asarray(list(pairs), dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] != 2:
        raise ValueError("need at least two (n, risk) pairs")
    if np.unique(arr[:, 0]).size < 2:
        raise ValueError("need at least two distinct n values")
    if np.any(arr[:, 1] <= 0.0):
        raise NumericError("risks must be strictly positive for a log-log fit")
    x = np.log(arr[:, 0])
    y = np.log(arr[:, 1])
    xc = x - np.mean(x)
    return float(np.sum(xc * y) / np.sum(xc * xc))


@dataclass(frozen=True)
class RiskReport:
    """Monte Carlo risk summaries for one selection variant over an n-grid."""

    variant: str
    n_grid: tuple
    mean_risk: np.ndarray
    median_risk: np.ndarray
    median_m_hat: np.ndarray
    median_m_bound: np.ndarray
    oracle_m: np.ndarray
    oracle_risk: np.ndarray
    theoretical: np.ndarray
    slope: float
    replications: int
    seed: int


@dataclass(frozen=True)
class _GridPlan:
    """Everything one (n, r) task needs; immutable and cheap to pickle."""

    seq: SequenceSpec
    n: int
    n_coef: int
    sigma: float
    eta: float
    seed: int
    beta: np.ndarray
    weights: np.ndarray
    tail: float
    variants: tuple
    pen_const_known: float
    pen_const_unknown: float
    scales_prefix: PenaltyScales | None
    m_bound_known: int | None


def replicate_moments(plan: _GridPlan, r: int) -> SampleMoments:
    """Accumulate sample moments while the draws stream out of the generator.

    Matches moments(simulate(..., replicate=(n, r), n_coef=...)) bit for bit:
    same Philox key, same draw order, same chunked summation.
    """
    n, n_coef = plan.n, plan.n_coef
    rng = substream(plan.seed, n, r)
    scale = np.sqrt(plan.seq.eigenvalues(n_coef))
    beta = plan.beta[:n_coef]
    rows = chunk_rows(n_coef)
    g = np.zeros(n_coef)
    l = np.zeros(n_coef)
    syy = 0.0
    done = 0
    while done < n:
        take = min(rows, n - done)
        draws = rng.standard_normal((take, n_coef + 1))
        x = draws[:, :n_coef]
        x *= scale
        yc = np.einsum("ij,j->i", x[:, : beta.size], beta) + plan.sigma * draws[:, n_coef]
        g += np.einsum("i,ij->j", yc, x)
        l += np.einsum("ij,ij->j", x, x)
        syy += float(np.einsum("i,i->", yc, yc))
        done += take
    return SampleMoments(ghat=g / n, lhat=l / n, sigma_y2=syy / n, n=n)


def _run_replicate(task):
    plan, r = task
    mom = replicate_moments(plan, r)
    curve = fixed_dim_risk_curve(mom, plan.beta, plan.weights, plan.n_coef, plan.tail)
    record = {"curve": curve, "risk": {}, "m_hat": {}, "m_bound": {}}
    for variant in plan.variants:
        if variant == "known_degree":
            trace = select_known(
                mom, plan.weights, plan.scales_prefix, plan.m_bound_known,
                plan.eta, plan.pen_const_known,
            )
        else:
            trace = select_data_driven(mom, plan.weights, plan.eta, plan.pen_const_unknown)
        record["risk"][variant] = float(curve[trace.m_hat - 1])
        record["m_hat"][variant] = trace.m_hat
        record["m_bound"][variant] = trace.admissible_max
    return record


def experiment_plans(config):
    """Per-n task plans for a RunConfig (one slope, normalized at the largest
    truncation, shared by the whole grid)."""
    seq = config.sequence_spec()
    grid = tuple(config.n_grid)
    variants = config.variant_names()

    trunc = {n: config.j_max or default_truncation(seq, n) for n in grid}
    ref = max(trunc.values())
    slope_spec = SlopeSpec(seq, config.rho, ref)
    beta = make_slope(slope_spec).coefs
    tail_ref = slope_tail_bias(slope_spec, seq.s)

    plans = []
    for n in grid:
        n_coef = trunc[n]
        weights = seq.risk_weights(n_coef)
        if n_coef < ref:
            j = np.arange(n_coef + 1, ref + 1, dtype=float)
            band = float(np.sum(j ** (2.0 * seq.s) * beta[n_coef:] ** 2))
        else:
            band = 0.0
        scales_prefix = None
        m_bound_known = None
        if "known_degree" in variants:
            scales = intrinsic_scales(seq, n)
            m_bound_known = min(bound_M(seq, scales, n), n_coef)
            scales_prefix = PenaltyScales(
                scales.delta[:m_bound_known],
                scales.Delta[:m_bound_known],
                scales.kappa[:m_bound_known],
                scales.log_delta[:m_bound_known],
                scales.log_Delta[:m_bound_known],
                scales.log_kappa[:m_bound_known],
            )
        plans.append(
            _GridPlan(
                seq=seq, n=n, n_coef=n_coef, sigma=config.sigma, eta=config.eta,
                seed=config.seed, beta=beta, weights=weights, tail=band + tail_ref,
                variants=variants, pen_const_known=config.pen_const_known,
                pen_const_unknown=config.pen_const_unknown,
                scales_prefix=scales_prefix, m_bound_known=m_bound_known,
            )
        )
    return plans


def run_experiment(config, workers: int = 1):
    """Run the replicated Monte Carlo experiment described by a RunConfig.

    Returns one :class:`RiskReport` per selection variant.  Deterministic for
    a fixed config at any worker count: every replicate is a pure function of
    (seed, n, r) and aggregation order is fixed.
    """
    seq = config.sequence_spec()
    grid = tuple(config.n_grid)
    reps = config.replications
    variants = config.variant_names()
    plans = experiment_plans(config)

    tasks = [(plan, r) for plan in plans for r in range(reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_replicate, tasks, chunksize=1))
    else:
        results = [_run_replicate(t) for t in tasks]

    # the oracle benchmark is variant-independent: best fixed m per grid point
    oracle_m = np.empty(len(grid), dtype=int)
    oracle_val = np.empty(len(grid))
    for gi in range(len(grid)):
        block = results[gi * reps : (gi + 1) * reps]
        mean_curve = np.mean(np.vstack([rec["curve"] for rec in block]), axis=0)
        best = int(np.argmin(mean_curve)) + 1
        oracle_m[gi] = best
        oracle_val[gi] = mean_curve[best - 1]
    theoretical = np.array(
        [theoretical_rate(seq, n) if n >= 3 else np.nan for n in grid]
    )

    reports = []
    for variant in variants:
        mean_risk = np.empty(len(grid))
        median_risk = np.empty(len(grid))
        median_m_hat = np.empty(len(grid))
        median_m_bound = np.empty(len(grid))
        for gi in range(len(grid)):
            block = results[gi * reps : (gi + 1) * reps]
            risks = np.array([rec["risk"][variant] for rec in block])
            mean_risk[gi] = np.mean(risks)
            median_risk[gi] = np.median(risks)
            median_m_hat[gi] = np.median([rec["m_hat"][variant] for rec in block])
            median_m_bound[gi] = np.median([rec["m_bound"][variant] for rec in block])
        if len(grid) >= 2:
            floored = np.maximum(median_risk, _RISK_FLOOR)
            slope = fit_slope(list(zip(grid, floored)))
        else:
            slope = float("nan")
        reports.append(
            RiskReport(
                variant=variant,
                n_grid=grid,
                mean_risk=mean_risk,
                median_risk=median_risk,
                median_m_hat=median_m_hat,
                median_m_bound=median_m_bound,
                oracle_m=oracle_m,
                oracle_risk=oracle_val,
                theoretical=theoretical,
                slope=slope,
                replications=reps,
                seed=config.seed,
            )
        )
    return reports


def write_risk_csv(reports, path, echo: str = "") -> None:
    """Serialize RiskReports to CSV with one row per (variant, n)."""
    fmt = lambda x: repr(float(x))  # shortest round-trip decimal
    slopes = " ".join(f"slope_{rep.variant}={fmt(rep.slope)}" for rep in reports)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {echo}{' | ' if echo else ''}{slopes}\n")
        fh.write(
            "n,variant,mean_risk,median_risk,median_m_hat,median_M_hat,"
            "oracle_m,oracle_risk,theoretical_rate\n"
        )
        for rep in reports:
            for gi, n in enumerate(rep.n_grid):
                fh.write(
                    f"{n},{rep.variant},{fmt(rep.mean_risk[gi])},{fmt(rep.median_risk[gi])},"
                    f"{fmt(rep.median_m_hat[gi])},{fmt(rep.median_m_bound[gi])},"
                    f"{int(rep.oracle_m[gi])},{fmt(rep.oracle_risk[gi])},"
                    f"{fmt(rep.theoretical[gi])}\n"
                )
