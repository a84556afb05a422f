"""Thresholded series estimator, contrast, penalties and model selection.

The orthogonal-series estimator replaces each ratio [g]_j / lambda_j by
ghat_j / lhat_j, zeroing every coordinate whose estimated eigenvalue falls
below 1/n.  Model dimensions are selected by minimizing the computable
contrast plus a penalty proportional to an effective dimension: delta_m/n
with known eigenvalue decay, or its plug-in estimate dhat_m/n computed from
the lhat_j alone.  The data-driven selector deliberately takes nothing but
the sample moments and the risk weights, so it cannot peek at the true
degree of ill-posedness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import CoefVector, _weight_array
from .sequences import PenaltyScales

__all__ = [
    "SampleMoments",
    "SelectionTrace",
    "moments",
    "moment_sums",
    "estimate_beta",
    "contrast",
    "contrast_curve",
    "penalty_known",
    "estimated_scales",
    "estimated_scale_curves",
    "penalty_hat",
    "bound_M_hat",
    "select_known",
    "select_data_driven",
    "write_trace_csv",
]

# Row budget for chunked moment accumulation.  Fixed as a pure function of the
# coefficient count so streamed and in-memory paths sum in identical order.
_CHUNK_BUDGET = 1 << 20


def chunk_rows(n_coef: int) -> int:
    return max(1, _CHUNK_BUDGET // (n_coef + 1))


@dataclass(frozen=True)
class SampleMoments:
    """Empirical cross-moments of a sample.

    ghat_j = (1/n) sum_i Y_i [X_i]_j, lhat_j = (1/n) sum_i [X_i]_j^2 and
    sigma_y2 is the empirical second moment of Y (uncentered by default,
    matching the mean-zero model).
    """

    ghat: np.ndarray
    lhat: np.ndarray
    sigma_y2: float
    n: int

    @property
    def n_coef(self) -> int:
        return int(self.ghat.size)


def moment_sums(y: np.ndarray, x: np.ndarray):
    """Accumulate (sum y_i x_ij, sum x_ij^2, sum y_i, sum y_i^2) in fixed chunks."""
    n, n_coef = x.shape
    rows = chunk_rows(n_coef)
    g = np.zeros(n_coef)
    l = np.zeros(n_coef)
    sy = 0.0
    syy = 0.0
    for start in range(0, n, rows):
        xc = x[start : start + rows]
        yc = y[start : start + rows]
        g += np.einsum("i,ij->j", yc, xc)
        l += np.einsum("ij,ij->j", xc, xc)
        sy += float(np.einsum("i->", yc))
        syy += float(np.einsum("i,i->", yc, yc))
    return g, l, sy, syy


def moments(sample, centered: bool = False) -> SampleMoments:
    """Empirical moments of a Sample; ``centered`` switches the Y-variance
    estimate to the centered sample variance."""
    n = sample.n
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    g, l, sy, syy = moment_sums(sample.y, sample.xcoef)
    sigma_y2 = syy / n - (sy / n) ** 2 if centered else syy / n
    return SampleMoments(ghat=g / n, lhat=l / n, sigma_y2=float(sigma_y2), n=n)


def _alive(mom: SampleMoments) -> np.ndarray:
    return mom.lhat >= 1.0 / mom.n


def _check_dim(mom: SampleMoments, m: int):
    if not 1 <= m <= mom.n_coef:
        raise ValueError(f"model dimension {m} outside 1..{mom.n_coef}")


def estimate_beta(mom: SampleMoments, m: int) -> CoefVector:
    """Series estimator coefficients for model dimension m (length m)."""
    _check_dim(mom, m)
    alive = _alive(mom)[:m]
    coefs = np.zeros(m)
    coefs[alive] = mom.ghat[:m][alive] / mom.lhat[:m][alive]
    return CoefVector(coefs)


def contrast_curve(mom: SampleMoments, w, m_max: int) -> np.ndarray:
    """Contrast values for every m = 1..m_max (non-increasing in m)."""
    _check_dim(mom, m_max)
    weights = _weight_array(w)
    alive = _alive(mom)[:m_max]
    term = np.zeros(m_max)
    term[alive] = (mom.ghat[:m_max][alive] / mom.lhat[:m_max][alive]) ** 2
    return -np.cumsum(weights[:m_max] * term)


def contrast(mom: SampleMoments, w, m: int) -> float:
    """Computable contrast -sum_{j<=m} w_j ghat_j^2/lhat_j^2 1{lhat_j >= 1/n}."""
    return float(contrast_curve(mom, w, m)[m - 1])


def penalty_known(
    scales: PenaltyScales, sigma_y2: float, eta: float, n: int, m: int,
    const: float = 192.0,
) -> float:
    """Penalty const * sigma_Y^2 * eta * delta_m / n with known scales."""
    return float(const * sigma_y2 * eta * scales.delta[m - 1] / n)


def estimated_scale_curves(mom: SampleMoments, w, m_max: int):
    """Plug-in scale sequences (Delta_hat, kappa_hat, delta_hat) for m = 1..m_max.

    Thresholded coordinates contribute 0 to the running maxima; if every
    coordinate is dead all three values are 0.
    """
    _check_dim(mom, m_max)
    weights = _weight_array(w)[:m_max]
    alive = _alive(mom)[:m_max]
    ratio = np.zeros(m_max)
    ratio_floor = np.zeros(m_max)
    ratio[alive] = weights[alive] / mom.lhat[:m_max][alive]
    ratio_floor[alive] = np.maximum(weights[alive], 1.0) / mom.lhat[:m_max][alive]
    Delta_hat = np.maximum.accumulate(ratio)
    kappa_hat = np.maximum.accumulate(ratio_floor)
    m = np.arange(1, m_max + 1, dtype=float)
    factor = np.abs(np.log(np.maximum(kappa_hat, m + 2.0)) / np.log(m + 2.0))
    delta_hat = m * Delta_hat * factor
    return Delta_hat, kappa_hat, delta_hat


def estimated_scales(mom: SampleMoments, w, m: int):
    """Plug-in (Delta_hat_m, kappa_hat_m, delta_hat_m) at a single dimension m."""
    Delta_hat, kappa_hat, delta_hat = estimated_scale_curves(mom, w, m)
    return float(Delta_hat[m - 1]), float(kappa_hat[m - 1]), float(delta_hat[m - 1])


def penalty_hat(mom: SampleMoments, w, eta: float, m: int, const: float = 1920.0) -> float:
    """Random penalty const * sigma_y2 * eta * delta_hat_m / n."""
    _, _, delta_hat = estimated_scales(mom, w, m)
    return float(const * mom.sigma_y2 * eta * delta_hat / mom.n)


def _weight_cap(weights: np.ndarray, n: int, n_coef: int) -> int:
    """Largest N <= min(n, n_coef) with max_{j<=N} w_j <= n (at least 1)."""
    limit = min(n, n_coef)
    running = np.maximum.accumulate(weights[:limit])
    ok = np.nonzero(running <= n)[0]
    return int(ok[-1]) + 1 if ok.size else 1


def bound_M_hat(mom: SampleMoments, w, n: int | None = None) -> int:
    """Random admissible-model bound.

    Largest M below the weight cap N with lhat_M / (M max(w_M, 1)) >= log(n)/n;
    falls back to 1 when no index qualifies.  Uses only quantities computable
    from the sample and the risk weights.
    """
    n = mom.n if n is None else n
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    weights = _weight_array(w)
    cap = _weight_cap(weights, n, mom.n_coef)
    m = np.arange(1, cap + 1, dtype=float)
    cond = mom.lhat[:cap] / (m * np.maximum(weights[:cap], 1.0)) >= np.log(n) / n
    ok = np.nonzero(cond)[0]
    return int(ok[-1]) + 1 if ok.size else 1


@dataclass(frozen=True)
class SelectionTrace:
    """Per-dimension audit record of one model-selection run."""

    variant: str
    admissible_max: int
    contrast: np.ndarray
    penalty: np.ndarray
    delta_used: np.ndarray
    m_hat: int
    eta: float
    pen_const: float

    @property
    def total(self) -> np.ndarray:
        return self.contrast + self.penalty


def select_known(
    mom: SampleMoments, w, scales: PenaltyScales, m_max: int, eta: float,
    pen_const: float = 192.0,
) -> SelectionTrace:
    """Penalized-contrast selection over m = 1..m_max with known scales."""
    if m_max < 1:
        raise ValueError(f"admissible bound must be >= 1, got {m_max}")
    _check_dim(mom, m_max)
    crv = contrast_curve(mom, w, m_max)
    pen = pen_const * mom.sigma_y2 * eta * scales.delta[:m_max] / mom.n
    m_hat = int(np.argmin(crv + pen)) + 1  # first minimum = smallest m
    return SelectionTrace(
        variant="known_degree",
        admissible_max=m_max,
        contrast=crv,
        penalty=pen,
        delta_used=np.array(scales.delta[:m_max]),
        m_hat=m_hat,
        eta=float(eta),
        pen_const=float(pen_const),
    )


def select_data_driven(
    mom: SampleMoments, w, eta: float = 3.0, pen_const: float = 1920.0
) -> SelectionTrace:
    """Fully data-driven selection: random bound, random penalty.

    Takes only the sample moments and the risk weights; neither the eigenvalue
    nor the smoothness sequence enters.
    """
    m_max = bound_M_hat(mom, w)
    crv = contrast_curve(mom, w, m_max)
    _, _, delta_hat = estimated_scale_curves(mom, w, m_max)
    pen = pen_const * mom.sigma_y2 * eta * delta_hat / mom.n
    m_hat = int(np.argmin(crv + pen)) + 1
    return SelectionTrace(
        variant="data_driven",
        admissible_max=m_max,
        contrast=crv,
        penalty=pen,
        delta_used=delta_hat,
        m_hat=m_hat,
        eta=float(eta),
        pen_const=float(pen_const),
    )


def write_trace_csv(trace: SelectionTrace, path, echo: str = "") -> None:
    """Serialize a SelectionTrace, one row per candidate dimension."""
    meta = (
        f"variant={trace.variant} admissible_max={trace.admissible_max} "
        f"m_hat={trace.m_hat} eta={trace.eta!r} pen_const={trace.pen_const!r}"
    )
    with open(path, "w", newline="") as fh:
        fh.write(f"# {echo}{' | ' if echo else ''}{meta}\n")
        fh.write("m,contrast,penalty,delta_used,admissible,chosen\n")
        for i in range(trace.admissible_max):
            fh.write(
                f"{i + 1},{float(trace.contrast[i])!r},{float(trace.penalty[i])!r},"
                f"{float(trace.delta_used[i])!r},1,{int(i + 1 == trace.m_hat)}\n"
            )
