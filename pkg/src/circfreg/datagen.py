"""Seeded simulation of the circular functional linear model in coefficient space.

The regressor is never materialized as a function of t: for a Gaussian
stationary circular process the coefficient representation [X]_j =
sqrt(lambda_j) * xi_j with iid standard normal xi_j is exact, so responses

    Y_i = sum_j [slope]_j [X_i]_j + sigma * eps_i

carry no discretization bias.  Because the normalized coefficients are
standard Gaussian, every moment of [X]_j / sqrt(lambda_j) exists; in
particular the fourth moment equals 3, which is why the selection penalty
defaults to the moment constant eta = 3.

All draws come from a counter-based Philox generator keyed by
(seed, replicate); within a sample the counter space is laid out row-major,
so each unit i owns one contiguous block of draws (its regressor
coefficients followed by its noise variable).  Two calls with identical
arguments therefore produce bit-identical samples regardless of how many
worker processes run elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import CoefVector
from .sequences import SequenceSpec, balance_m_dagger, bound_N, intrinsic_scales

__all__ = [
    "SlopeSpec",
    "Sample",
    "make_slope",
    "slope_tail_bias",
    "default_truncation",
    "substream",
    "simulate",
    "covariance_kernel",
    "write_sample_csv",
]


@dataclass(frozen=True)
class SlopeSpec:
    """Recipe for a slope function lying exactly on the smoothness ellipsoid.

    The coefficient profile decays like j^-(p + 1/2 + decay_margin) in the
    polynomial-smoothness regimes (exp(-j^(2p)/2)/j under EP), scaled so the
    gamma-weighted squared norm over the first n_coef coefficients equals
    ``radius`` exactly.
    """

    seq: SequenceSpec
    radius: float
    n_coef: int
    decay_margin: float = 1.0

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.n_coef < 1:
            raise ValueError(f"n_coef must be >= 1, got {self.n_coef}")
        if not self.decay_margin > 0.0:
            raise ValueError(f"decay_margin must be > 0, got {self.decay_margin}")


def _log_slope_shape(spec: SlopeSpec, length: int) -> np.ndarray:
    j = np.arange(1, length + 1, dtype=float)
    if spec.seq.regime == "EP":
        return -0.5 * j ** (2.0 * spec.seq.p) - np.log(j)
    return -(spec.seq.p + 0.5 + spec.decay_margin) * np.log(j)


def _slope_support(log_shape: np.ndarray) -> np.ndarray:
    # normal floats only: subnormal tail values carry too much quantization
    # error for the exact ellipsoid normalization, so they are zeroed instead
    return np.exp(log_shape) >= np.finfo(float).tiny


def slope_scale(spec: SlopeSpec) -> float:
    """Normalization constant c putting the slope on the ellipsoid boundary.

    Normalizes over the float-representable support; an EP profile underflows
    in the far tail and those coordinates are excluded from the realized norm.
    """
    log_shape = _log_slope_shape(spec, spec.n_coef)
    mask = _slope_support(log_shape)
    log_gamma = spec.seq.log_smoothness_weights(spec.n_coef)
    # gamma_j * shape_j^2 <= 1 for every regime, so the plain sum is safe
    norm = float(np.sum(np.exp(log_gamma[mask] + 2.0 * log_shape[mask])))
    return float(np.sqrt(spec.radius / norm))


def make_slope(spec: SlopeSpec) -> CoefVector:
    """Construct slope coefficients with gamma-weighted norm exactly radius."""
    log_shape = _log_slope_shape(spec, spec.n_coef)
    coefs = np.where(_slope_support(log_shape), np.exp(log_shape), 0.0)
    return CoefVector(slope_scale(spec) * coefs)


def slope_tail_bias(spec: SlopeSpec, s: float, start: int | None = None) -> float:
    """Tail sum_{j > start} omega_j [slope]_j^2 with omega_j = j^(2s).

    Accounts for the risk contribution of coefficients beyond the simulated
    truncation; by default the tail starts right after the slope's own length.
    """
    from scipy.special import zeta

    if start is None:
        start = spec.n_coef
    c2 = slope_scale(spec) ** 2
    if spec.seq.regime == "EP":
        total = 0.0
        j = start + 1
        while True:
            term = np.exp(2.0 * (s - 1.0) * np.log(j) - j ** (2.0 * spec.seq.p))
            total += term
            if term < 1e-18 * max(total, 1e-300):
                break
            j += 1
        return float(c2 * total)
    exponent = 2.0 * (spec.seq.p + 0.5 + spec.decay_margin) - 2.0 * s
    return float(c2 * zeta(exponent, start + 1))


@dataclass(frozen=True)
class Sample:
    """n observations of the model in coefficient space."""

    y: np.ndarray        # responses, shape (n,)
    xcoef: np.ndarray    # regressor coefficients [X_i]_j, shape (n, n_coef)
    sigma: float
    seed: int
    replicate: int | tuple = 0

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def n_coef(self) -> int:
        return int(self.xcoef.shape[1])


def default_truncation(spec: SequenceSpec, n: int) -> int:
    """Default coefficient truncation: max(N_n, 2 m_dagger).

    Guarantees every admissible model dimension sees genuinely simulated
    coefficients.
    """
    scales = intrinsic_scales(spec, n)
    return max(bound_N(spec, n), 2 * balance_m_dagger(spec, scales, n))


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, *keys)."""
    entropy = (int(seed),) + tuple(int(k) for k in keys)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def simulate(
    spec: SequenceSpec,
    slope: CoefVector,
    n: int,
    sigma: float,
    seed: int,
    replicate: int = 0,
    n_coef: int | None = None,
) -> Sample:
    """Draw a sample of the circular functional linear model.

    Parameters
    ----------
    spec : SequenceSpec
        Supplies the eigenvalue sequence of the regressor covariance.
    slope : CoefVector
        True slope coefficients; must not exceed the simulated truncation.
    n : int
        Sample size, at least 2.
    sigma : float
        Noise level, sigma >= 0 (0 enables noiseless checks).
    seed, replicate : int
        Key of the Philox substream; identical keys give bit-identical output.
        ``replicate`` may also be a tuple of ints (e.g. the (n, r) key used by
        the experiment harness).
    n_coef : int, optional
        Number of simulated coefficients per unit; defaults to
        :func:`default_truncation`.
    """
    if n < 2:
        raise ValueError(f"sample size must be >= 2, got {n}")
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if n_coef is None:
        n_coef = default_truncation(spec, n)
    if len(slope) > n_coef:
        raise ValueError(
            f"slope has {len(slope)} coefficients but only {n_coef} are simulated"
        )
    rep_keys = tuple(replicate) if isinstance(replicate, (tuple, list)) else (replicate,)
    rng = substream(seed, *rep_keys)
    scale = np.sqrt(spec.eigenvalues(n_coef))
    draws = rng.standard_normal((n, n_coef + 1))
    x = draws[:, :n_coef]
    x *= scale
    noise = draws[:, n_coef]
    y = np.einsum("ij,j->i", x[:, : len(slope)], slope.coefs) + sigma * noise
    replicate_key = rep_keys[0] if len(rep_keys) == 1 else rep_keys
    return Sample(y=y, xcoef=x, sigma=float(sigma), seed=int(seed), replicate=replicate_key)


def covariance_kernel(spec: SequenceSpec, n_coef: int, u) -> float:
    """Stationary covariance kernel c(u) implied by the first n_coef eigenvalues.

    c(u) = lambda_1 + sum over complete cosine/sine pairs of
    2 lambda_{2k} cos(2 pi k u); defined only under enforced pairing.
    """
    if not spec.enforce_pair:
        raise ValueError("covariance kernel requires enforce_pair=True")
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < -1.0) | (u_arr > 1.0)):
        raise ValueError("lag u must lie in [-1, 1]")
    lam = spec.eigenvalues(n_coef)
    out = np.full_like(u_arr, lam[0], dtype=float)
    k_max = (n_coef - 1) // 2  # pairs (2k, 2k+1) fully inside 1..n_coef
    for k in range(1, k_max + 1):
        out = out + 2.0 * lam[2 * k - 1] * np.cos(2.0 * np.pi * k * u_arr)
    return float(out) if out.ndim == 0 else out


def write_sample_csv(sample: Sample, path, echo: str = "") -> None:
    """Write one row per unit: Y, X_1..X_J, after a single comment line."""
    meta = (
        f"n={sample.n} n_coef={sample.n_coef} sigma={sample.sigma!r} "
        f"seed={sample.seed} replicate={sample.replicate}"
    )
    header = "y," + ",".join(f"x_{j}" for j in range(1, sample.n_coef + 1))
    with open(path, "w", newline="") as fh:
        fh.write(f"# {echo}{' | ' if echo else ''}{meta}\n")
        fh.write(header + "\n")
        for i in range(sample.n):
            row = [repr(float(sample.y[i]))]
            row.extend(repr(float(v)) for v in sample.xcoef[i])
            fh.write(",".join(row) + "\n")
