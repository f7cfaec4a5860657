"""Weak majorization of vectors and the spectral bounds for entrywise functions.

The ``verify_*`` functions compute both sides of one inequality and compare
them with ``weak_majorize``.  They never test the class hypothesis on ``f``
themselves; the caller vouches for it and the assumption is carried in the
verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .entrywise import apply_entrywise, functional_calculus
from .errors import DomainError, PreconditionError
from .linalg import PSD_TOL, as_spectrum, as_symmetric, eigvals, is_psd, op_norm_sym, singular_values
from .linalg import norm_from_singular_values, parse_norm
from .scalarfn import ScalarFunction, div_diff1, div_diff2
from .verdicts import jsonable

MAJORIZATION_TOL = 1e-9


@dataclass(frozen=True)
class MajorizationVerdict:
    """Outcome of comparing prefix sums of decreasing rearrangements.

    ``prefix_margins[k-1]`` is sum_{i<=k} b_[i] - sum_{i<=k} a_[i];
    ``first_violation`` is the 1-based k of the first margin below
    ``-tol * scale``, where ``scale`` is the largest prefix-sum magnitude.
    """

    holds: bool
    prefix_margins: np.ndarray
    first_violation: int | None
    lhs: np.ndarray
    rhs: np.ndarray
    scale: float
    tol: float
    name: str = ""
    assumptions: tuple = ()
    details: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return jsonable({
            "check": self.name,
            "holds": self.holds,
            "prefix_margins": self.prefix_margins,
            "first_violation": self.first_violation,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "scale": self.scale,
            "tol": self.tol,
            "assumptions": list(self.assumptions),
            "details": self.details,
        })


def dec_rearrange(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(a)):
        raise DomainError("vector has non-finite entries")
    return as_spectrum(a)


def _prefix(a, b, tol: float):
    x = dec_rearrange(a)
    y = dec_rearrange(b)
    if x.size != y.size:
        raise PreconditionError(f"length mismatch: {x.size} vs {y.size}")
    if tol < 0:
        raise PreconditionError(f"tolerance must be nonnegative, got {tol}")
    ca, cb = np.cumsum(x), np.cumsum(y)
    scale = float(max(np.max(np.abs(ca), initial=0.0), np.max(np.abs(cb), initial=0.0)))
    scale = scale if scale > 0 else 1.0
    return x, y, cb - ca, scale


def weak_majorize(a, b, tol: float = MAJORIZATION_TOL, name: str = "",
                  assumptions: Sequence[str] = (), details: dict | None = None) -> MajorizationVerdict:
    """a weakly majorized by b: every k-prefix of a's decreasing rearrangement is <= b's."""
    x, y, margins, scale = _prefix(a, b, tol)
    bad = np.flatnonzero(margins < -tol * scale)
    first = int(bad[0]) + 1 if bad.size else None
    return MajorizationVerdict(first is None, margins, first, x, y, scale, tol, name,
                               tuple(assumptions), dict(details or {}))


def majorize(a, b, tol: float = MAJORIZATION_TOL, name: str = "") -> MajorizationVerdict:
    """Weak majorization plus equality of the total sums."""
    v = weak_majorize(a, b, tol, name)
    total = float(v.prefix_margins[-1])
    if v.holds and abs(total) > tol * v.scale:
        return MajorizationVerdict(False, v.prefix_margins, v.prefix_margins.size, v.lhs, v.rhs,
                                   v.scale, tol, name, (), {"total_sum_gap": total})
    return v


# -- hypotheses shared by the verifiers ------------------------------------

def _require_psd(name: str, M, psd_tol: float) -> np.ndarray:
    m = as_symmetric(M)
    ok, lo = is_psd(m, psd_tol)
    if not ok:
        raise PreconditionError(f"{name} is not positive semidefinite (min eigenvalue {lo:.3e})")
    return m


def _require_norm_below(name: str, M, f: ScalarFunction) -> float:
    norm = op_norm_sym(M)
    if not norm < f.alpha:
        kind = "on the boundary of" if norm == f.alpha else "outside"
        raise DomainError(f"||{name}|| = {norm!r} is {kind} the domain radius {f.alpha!r}; "
                          "strict inequality is required")
    return norm


def _require_entries_inside(name: str, M, f: ScalarFunction) -> None:
    top = float(np.max(np.abs(M)))
    if not top < f.alpha:
        raise DomainError(f"{name} has an entry of magnitude {top!r} outside the domain radius {f.alpha!r}")


def _pair(f, A, B, psd_tol):
    a = _require_psd("A", A, psd_tol)
    b = _require_psd("B", B, psd_tol)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


# -- the inequalities ------------------------------------------------------

def verify_spectral_domination(f: ScalarFunction, A, tol: float = MAJORIZATION_TOL,
                               psd_tol: float = PSD_TOL) -> MajorizationVerdict:
    """lambda(f[A] - f(0) J) weakly majorized by lambda(f(A) - f(0) I), for A >= 0.

    Valid when f is entrywise monotone of order n; requires ||A|| < alpha.
    """
    a = _require_psd("A", A, psd_tol)
    _require_norm_below("A", a, f)
    n = a.shape[0]
    f0 = f(0.0)
    lhs = eigvals(apply_entrywise(f, a) - f0 * np.ones((n, n)))
    rhs = eigvals(functional_calculus(f, a) - f0 * np.eye(n))
    return weak_majorize(lhs, rhs, tol, "spectral_domination",
                         (f"{f.describe()} in S-mono({n})",))


def eig_divided_differences(f: ScalarFunction, A, B) -> np.ndarray:
    """f^[1](lambda_i(A), lambda_i(B)) with the i-th largest paired with the i-th largest."""
    la, lb = eigvals(A), eigvals(B)
    return np.array([div_diff1(f, x, y) for x, y in zip(la, lb)])


def verify_divided_difference_bound(f: ScalarFunction, A, B, tol: float = MAJORIZATION_TOL,
                                    psd_tol: float = PSD_TOL) -> MajorizationVerdict:
    """s(f[A] - f[B]) weakly majorized by f^[1](lambda(A), lambda(B)) o s(A - B).

    Valid when f is entrywise convex of order n with f'(0) >= 0, for A, B >= 0
    with norms below alpha.
    """
    a, b = _pair(f, A, B, psd_tol)
    _require_norm_below("A", a, f)
    _require_norm_below("B", b, f)
    lhs = singular_values(apply_entrywise(f, a) - apply_entrywise(f, b))
    dd = eig_divided_differences(f, a, b)
    rhs = dd * singular_values(a - b)
    n = a.shape[0]
    return weak_majorize(lhs, rhs, tol, "divided_difference_bound",
                         (f"{f.describe()} in S-conv({n})", "f'(0) >= 0"),
                         {"divided_differences": dd})


def _second_order_remainder(f: ScalarFunction, a, b) -> np.ndarray:
    d = a - b
    fprime_b = np.asarray(f.deriv(b, 1), dtype=float)
    return apply_entrywise(f, a) - apply_entrywise(f, b) - d * fprime_b


def verify_second_order_bound(f: ScalarFunction, A, B, tol: float = MAJORIZATION_TOL,
                              psd_tol: float = PSD_TOL) -> tuple[MajorizationVerdict, MajorizationVerdict]:
    """The chained bound for the first-order Taylor remainder R = f[A] - f[B] - (A-B) o f'[B]:

        s(R) <_w c o s(D o D) <_w c o s(D^2),   D = A - B,
        c = f^[2](lambda(A), lambda(B), lambda(B)).

    Returns one verdict per link of the chain.  The second verdict's details
    also record the direct comparison s(R) against c o s(D^2) and the bare
    s(D o D) <_w s(D^2).
    """
    a, b = _pair(f, A, B, psd_tol)
    _require_norm_below("A", a, f)
    _require_norm_below("B", b, f)
    n = a.shape[0]
    la, lb = eigvals(a), eigvals(b)
    c = np.array([div_diff2(f, x, y, y) for x, y in zip(la, lb)])
    d = a - b
    lhs = singular_values(_second_order_remainder(f, a, b))
    mid = c * singular_values(d * d)
    top = c * singular_values(d @ d)
    tags = (f"{f.describe()}' in S-conv({n})", "f''(0) >= 0")
    first = weak_majorize(lhs, mid, tol, "second_order_bound", tags,
                          {"second_divided_differences": c})
    direct = weak_majorize(lhs, top, tol)
    bare = weak_majorize(singular_values(d * d), singular_values(d @ d), tol)
    second = weak_majorize(mid, top, tol, "second_order_bound_chain", tags,
                           {"remainder_vs_square": direct.holds,
                            "remainder_vs_square_margins": direct.prefix_margins,
                            "schur_square_vs_square": bare.holds})
    return first, second


def verify_diagonal_lipschitz_bound(f: ScalarFunction, A, B, tol: float = MAJORIZATION_TOL,
                                    psd_tol: float = PSD_TOL) -> MajorizationVerdict:
    """s(f[A] - f[B]) weakly majorized by (max_i f^[1](a_ii, b_ii)) s(A - B).

    Valid for n >= 3 when f is entrywise monotone of order n (and for n = 2
    when f is also continuously differentiable); entries must lie in the domain.
    """
    a, b = _pair(f, A, B, psd_tol)
    _require_entries_inside("A", a, f)
    _require_entries_inside("B", b, f)
    n = a.shape[0]
    factor = max(div_diff1(f, x, y) for x, y in zip(np.diag(a), np.diag(b)))
    lhs = singular_values(apply_entrywise(f, a) - apply_entrywise(f, b))
    rhs = factor * singular_values(a - b)
    return weak_majorize(lhs, rhs, tol, "diagonal_lipschitz_bound",
                         (f"{f.describe()} in S-mono({n})",), {"factor": factor})


def verify_diagonal_second_order_bound(f: ScalarFunction, A, B, tol: float = MAJORIZATION_TOL,
                                       psd_tol: float = PSD_TOL) -> tuple[MajorizationVerdict, MajorizationVerdict]:
    """As ``verify_second_order_bound`` with the scalar c = max_i f^[2](a_ii, b_ii, b_ii)."""
    a, b = _pair(f, A, B, psd_tol)
    _require_entries_inside("A", a, f)
    _require_entries_inside("B", b, f)
    n = a.shape[0]
    c = max(div_diff2(f, x, y, y) for x, y in zip(np.diag(a), np.diag(b)))
    d = a - b
    lhs = singular_values(_second_order_remainder(f, a, b))
    mid = c * singular_values(d * d)
    top = c * singular_values(d @ d)
    tags = (f"{f.describe()} in S-conv({n})",)
    first = weak_majorize(lhs, mid, tol, "diagonal_second_order_bound", tags, {"factor": c})
    direct = weak_majorize(lhs, top, tol)
    second = weak_majorize(mid, top, tol, "diagonal_second_order_bound_chain", tags,
                           {"factor": c, "remainder_vs_square": direct.holds,
                            "remainder_vs_square_margins": direct.prefix_margins})
    return first, second


# CLI identifiers for the verifiers
VERIFIERS = {
    "thm61": verify_spectral_domination,
    "thm63": verify_divided_difference_bound,
    "prop65": verify_second_order_bound,
    "prop66": verify_diagonal_lipschitz_bound,
    "prop67": verify_diagonal_second_order_bound,
}


def norm_inequality_report(f: ScalarFunction, A, B, norms: Sequence[str],
                           tol: float = MAJORIZATION_TOL) -> list[dict]:
    """Both sides of |||f[A] - f[B]||| <= (max_i f^[1](a_ii, b_ii)) |||A - B||| per norm.

    ``norms`` entries use the ``parse_norm`` syntax.  Each row also carries the
    coarser bound f^[1](max_i a_ii, max_i b_ii) |||A - B|||.
    """
    a = as_symmetric(A)
    b = as_symmetric(B)
    _require_entries_inside("A", a, f)
    _require_entries_inside("B", b, f)
    factor = max(div_diff1(f, x, y) for x, y in zip(np.diag(a), np.diag(b)))
    coarse = div_diff1(f, float(np.max(np.diag(a))), float(np.max(np.diag(b))))
    s_img = singular_values(apply_entrywise(f, a) - apply_entrywise(f, b))
    s_diff = singular_values(a - b)
    rows = []
    for spec in norms:
        kind, param = parse_norm(spec)
        lhs = norm_from_singular_values(s_img, kind, param)
        base = norm_from_singular_values(s_diff, kind, param)
        rhs = factor * base
        rows.append({"norm": spec, "lhs": lhs, "rhs": rhs, "slack": rhs - lhs,
                     "rhs_coarse": coarse * base,
                     "holds": rhs - lhs >= -tol * max(1.0, abs(lhs), abs(rhs))})
    return rows
