"""Entrywise calculus f[A], spectral calculus f(A), and Schur products."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .linalg import _frozen, as_symmetric, ones, sym_eig
from .scalarfn import ScalarFunction

SERIES_TERMS = 64


def apply_entrywise(f: ScalarFunction, A) -> np.ndarray:
    """f[A] = [f(a_ij)].  Symmetry of the result is asserted, never repaired."""
    a = as_symmetric(A)
    outside = ~(np.abs(a) < f.alpha)
    if np.any(outside):
        i, j = (int(v) for v in np.argwhere(outside)[0])
        raise DomainError(f"entry ({i}, {j}) = {a[i, j]!r} is outside the domain of {f.describe()}")
    out = np.asarray(f(a), dtype=float).reshape(a.shape)
    if not np.array_equal(out, out.T):
        raise AssertionError(f"{f.describe()} produced an asymmetric entrywise image")
    return _frozen(out)


def _same_shape(A, B) -> tuple[np.ndarray, np.ndarray]:
    a = as_symmetric(A)
    b = as_symmetric(B)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def schur_product(A, B) -> np.ndarray:
    a, b = _same_shape(A, B)
    return _frozen(a * b)


def schur_power(A, k: int) -> np.ndarray:
    """k-fold Schur product A o ... o A; k = 0 gives the all-ones matrix."""
    if k < 0 or int(k) != k:
        raise PreconditionError(f"Schur power needs an integer k >= 0, got {k}")
    a = as_symmetric(A)
    out = ones(a.shape[0])
    for _ in range(int(k)):
        out = out * a
    return _frozen(out)


def functional_calculus(f: ScalarFunction, A) -> np.ndarray:
    """f(A) = Q f(Lambda) Q^T from the symmetric eigendecomposition."""
    w, q = sym_eig(A)
    outside = ~(np.abs(w) < f.alpha)
    if np.any(outside):
        raise DomainError(f"eigenvalue {w[outside][0]!r} is outside the domain of {f.describe()}")
    fw = np.asarray(f(w), dtype=float)
    out = (q * fw) @ q.T
    return _frozen(0.5 * (out + out.T))


def series_entrywise(coeffs: "Sequence[float] | ScalarFunction", A,
                     K: int = SERIES_TERMS, radius: float = math.inf) -> tuple[np.ndarray, float]:
    """Partial sum sum_{k<=K} c_k A^(k) and a bound on the truncation error.

    ``coeffs`` is a coefficient list or an analytic ``ScalarFunction`` (its
    domain then supplies the radius).  The bound is the scalar tail
    over the next K+1 coefficients at r = max|a_ij|, plus a geometric estimate
    of the remainder using the larger of the last term ratio and r/radius.
    """
    a = as_symmetric(A)
    if isinstance(coeffs, ScalarFunction):
        f = coeffs
        radius = f.alpha
        c = [f.taylor_coeff(k) for k in range(2 * K + 2)]
    else:
        c = [float(v) for v in coeffs]
    r = float(np.max(np.abs(a)))
    if not r < radius:
        raise DomainError(f"entry magnitude {r!r} is not inside the radius {radius!r}")
    out = np.zeros_like(a)
    power = ones(a.shape[0])
    for k in range(min(K, len(c) - 1) + 1):
        if c[k] != 0.0:
            out = out + c[k] * power
        power = power * a
    tail_terms = [abs(c[k]) * r ** k for k in range(K + 1, len(c))]
    tail = float(sum(tail_terms))
    if len(tail_terms) >= 2 and tail_terms[-2] > 0:
        ratio = tail_terms[-1] / tail_terms[-2]
        if math.isfinite(radius):
            ratio = max(ratio, r / radius)
        tail += tail_terms[-1] * ratio / (1 - ratio) if ratio < 1 else math.inf
    elif tail_terms and tail_terms[-1] > 0:
        tail = math.inf
    return _frozen(out), tail
