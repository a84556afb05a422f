"""Trigonometric basis on [0, 1] and weighted coefficient-space geometry.

Functions live in coefficient space throughout the package: a function f is
identified with its coefficients c_1..c_J in the orthonormal basis

    phi_1(t) = 1,  phi_2k(t) = sqrt(2) cos(2 pi k t),
    phi_2k+1(t) = sqrt(2) sin(2 pi k t).

Pointwise evaluation exists only for plotting and diagnostics; all norms and
inner products are coefficient sums, so no quadrature error enters any
estimation pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CoefVector",
    "WeightVector",
    "basis_eval",
    "design_matrix",
    "function_eval",
    "weighted_norm_sq",
    "weighted_inner",
]

_SQRT2 = np.sqrt(2.0)


def _validated_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty one-dimensional sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class CoefVector:
    """Finite coefficient vector c_1..c_J in the trigonometric basis."""

    coefs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefs", _validated_array(self.coefs, "coefs"))

    def __len__(self) -> int:
        return int(self.coefs.size)


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive weights w_1..w_J with the normalization w_1 = 1."""

    weights: np.ndarray

    def __post_init__(self):
        arr = _validated_array(self.weights, "weights")
        if np.any(arr <= 0.0):
            raise ValueError("weights must be strictly positive")
        if arr[0] != 1.0:
            raise ValueError(f"weights must satisfy w_1 = 1, got w_1 = {arr[0]!r}")
        object.__setattr__(self, "weights", arr)

    def __len__(self) -> int:
        return int(self.weights.size)


def _coef_array(f) -> np.ndarray:
    if isinstance(f, CoefVector):
        return f.coefs
    return np.asarray(f, dtype=float)


def _weight_array(w) -> np.ndarray:
    if isinstance(w, WeightVector):
        return w.weights
    return np.asarray(w, dtype=float)


def _check_unit_interval(t: np.ndarray):
    if np.any((t < 0.0) | (t > 1.0)):
        raise ValueError("evaluation points must lie in [0, 1]")


def basis_eval(j: int, t):
    """Evaluate the j-th basis function at t (scalar or array) in [0, 1]."""
    if j < 1:
        raise ValueError(f"basis index must be >= 1, got {j}")
    t_arr = np.asarray(t, dtype=float)
    _check_unit_interval(t_arr)
    if j == 1:
        out = np.ones_like(t_arr)
    else:
        angle = 2.0 * np.pi * (j // 2) * t_arr
        out = _SQRT2 * (np.cos(angle) if j % 2 == 0 else np.sin(angle))
    return float(out) if out.ndim == 0 else out


def design_matrix(n_basis: int, t) -> np.ndarray:
    """Matrix of basis values phi_j(t_i), shape (len(t), n_basis)."""
    if n_basis < 1:
        raise ValueError(f"n_basis must be >= 1, got {n_basis}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    _check_unit_interval(t_arr)
    out = np.empty((t_arr.size, n_basis))
    out[:, 0] = 1.0
    if n_basis > 1:
        freqs = np.arange(1, n_basis // 2 + 1)
        angle = 2.0 * np.pi * np.outer(t_arr, freqs)
        n_cos = n_basis // 2           # columns j = 2, 4, ...
        n_sin = (n_basis - 1) // 2     # columns j = 3, 5, ...
        out[:, 1::2] = _SQRT2 * np.cos(angle[:, :n_cos])
        if n_sin:
            out[:, 2::2] = _SQRT2 * np.sin(angle[:, :n_sin])
    return out


def function_eval(f, t):
    """Evaluate sum_j c_j phi_j at t (scalar or array) in [0, 1]."""
    coefs = _coef_array(f)
    t_arr = np.asarray(t, dtype=float)
    values = design_matrix(coefs.size, t_arr) @ coefs
    return float(values[0]) if t_arr.ndim == 0 else values


def weighted_norm_sq(f, w) -> float:
    """Weighted squared norm sum_j w_j c_j^2.

    Length mismatches are resolved by conceptually zero-padding the shorter
    vector, so only the common support contributes.
    """
    coefs = _coef_array(f)
    weights = _weight_array(w)
    m = min(coefs.size, weights.size)
    return float(np.sum(weights[:m] * coefs[:m] ** 2))


def weighted_inner(f, g, w) -> float:
    """Weighted inner product sum_j w_j f_j g_j (zero-padding semantics)."""
    fc = _coef_array(f)
    gc = _coef_array(g)
    weights = _weight_array(w)
    m = min(fc.size, gc.size, weights.size)
    return float(np.sum(weights[:m] * fc[:m] * gc[:m]))
