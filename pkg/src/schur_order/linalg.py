"""Dense symmetric linear algebra for small matrices.

Matrices are plain ``numpy`` float arrays.  ``as_symmetric`` validates the
symmetric-matrix invariants and hands back a read-only copy; ``as_spectrum``
does the same for non-increasing vectors.  The eigensolver is a cyclic Jacobi
method, which is accurate to machine precision and cheap at the sizes used
here (n <= ~12).
"""

from __future__ import annotations

import math
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError

PSD_TOL = 1e-9
SYMMETRY_TOL = 1e-12
EIG_TOL = 1e-12

_MAX_SWEEPS = 60


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_symmetric(M, symmetry_tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate ``M`` as a finite symmetric n x n matrix and return a read-only copy.

    The matrix is not repaired: asymmetry beyond
    ``symmetry_tol * max(1, max|M|)`` raises.
    """
    a = np.array(M, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DomainError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > symmetry_tol * scale:
        raise DomainError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    return _frozen(a)


def as_spectrum(values) -> np.ndarray:
    """Return ``values`` sorted non-increasing (stable for ties), read-only."""
    v = np.asarray(values, dtype=float).ravel()
    order = np.argsort(-v, kind="stable")
    return _frozen(v[order].copy())


def ones(n: int) -> np.ndarray:
    """The all-ones matrix J, the unit of the Schur product."""
    return np.ones((n, n))


def sym_eig(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(values, Q)`` with values non-increasing and ``Q`` orthogonal,
    columns being the matching eigenvectors, so that ``Q @ diag(values) @ Q.T``
    reconstructs ``M``.
    """
    a = np.array(as_symmetric(M), dtype=float)
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    norm = float(np.linalg.norm(a))
    if n > 1 and norm > 0.0:
        eps = np.finfo(float).eps
        negligible = 1e-3 * eps * norm
        mask = ~np.eye(n, dtype=bool)
        for _ in range(_MAX_SWEEPS):
            if math.sqrt(float(np.sum(a[mask] ** 2))) <= eps * norm:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if abs(apq) <= negligible:
                        a[p, q] = a[q, p] = 0.0
                        continue
                    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if abs(tau) > 1e150:
                        t = 0.5 / tau
                    else:
                        t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                    c = 1.0 / math.sqrt(1.0 + t * t)
                    s = t * c
                    cp = a[:, p].copy()
                    cq = a[:, q]
                    a[:, p] = c * cp - s * cq
                    a[:, q] = s * cp + c * cq
                    rp = a[p, :].copy()
                    rq = a[q, :]
                    a[p, :] = c * rp - s * rq
                    a[q, :] = s * rp + c * rq
                    a[p, q] = a[q, p] = 0.0
                    vp = v[:, p].copy()
                    vq = v[:, q]
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return _frozen(w[order]), _frozen(v[:, order].copy())


def eigvals(M) -> np.ndarray:
    """Eigenvalues of a symmetric matrix in decreasing order."""
    return sym_eig(M)[0]


def op_norm_sym(M) -> float:
    w = eigvals(M)
    return float(max(abs(w[0]), abs(w[-1])))


def is_psd(M, tol: float = PSD_TOL) -> tuple[bool, float]:
    """Relative PSD test.

    True iff the smallest eigenvalue is at least ``-tol * max(1, ||M||_op)``.
    The smallest eigenvalue is returned either way.
    """
    if tol < 0:
        raise PreconditionError(f"tolerance must be nonnegative, got {tol}")
    w = eigvals(M)
    scale = max(1.0, abs(w[0]), abs(w[-1]))
    lo = float(w[-1])
    return lo >= -tol * scale, lo


def loewner_geq(A, B, tol: float = PSD_TOL) -> bool:
    """A >= B in the positive semidefinite order."""
    a = as_symmetric(A)
    b = as_symmetric(B)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return is_psd(a - b, tol)[0]


def singular_values(M) -> np.ndarray:
    """Singular values in decreasing order (one-sided Jacobi, any square matrix)."""
    u = np.array(M, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
        raise DomainError(f"expected a non-empty square matrix, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise DomainError("matrix has non-finite entries")
    n = u.shape[1]
    eps = np.finfo(float).eps
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                ui = u[:, i]
                uj = u[:, j]
                alpha = float(ui @ ui)
                beta = float(uj @ uj)
                gamma = float(ui @ uj)
                if gamma == 0.0 or abs(gamma) <= eps * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                ci = ui.copy()
                u[:, i] = c * ci - s * uj
                u[:, j] = s * ci + c * u[:, j]
        if not rotated:
            break
    return as_spectrum(np.sqrt(np.sum(u * u, axis=0)))


NORM_KINDS = ("operator", "ky_fan", "schatten", "trace", "frobenius")


def parse_norm(text: str) -> tuple[str, float | None]:
    """Parse ``"operator"``, ``"trace"``, ``"frobenius"``, ``"ky_fan:<k>"`` or ``"schatten:<p>"``."""
    kind, _, arg = text.partition(":")
    if kind not in NORM_KINDS:
        raise PreconditionError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")
    if kind in ("ky_fan", "schatten"):
        if not arg:
            raise PreconditionError(f"norm {kind!r} needs a parameter, e.g. {kind}:2")
        return kind, float(arg)
    if arg:
        raise PreconditionError(f"norm {kind!r} takes no parameter")
    return kind, None


def norm_from_singular_values(s: Sequence[float], kind: str, param: float | None = None) -> float:
    s = np.asarray(s, dtype=float)
    n = s.size
    if kind == "operator":
        return float(s[0])
    if kind == "trace":
        return float(np.sum(s))
    if kind == "frobenius":
        return float(math.sqrt(np.sum(s * s)))
    if kind == "ky_fan":
        if param is None or int(param) != param or not 1 <= param <= n:
            raise PreconditionError(f"Ky Fan index must be an integer in [1, {n}], got {param}")
        return float(np.sum(s[: int(param)]))
    if kind == "schatten":
        if param is None or not param >= 1:
            raise PreconditionError(f"Schatten exponent must be >= 1, got {param}")
        if math.isinf(param):
            return float(s[0])
        top = float(s[0])
        if top == 0.0:
            return 0.0
        return float(top * np.sum((s / top) ** param) ** (1.0 / param))
    raise PreconditionError(f"unknown norm kind {kind!r}")


def ui_norm(M, kind: str, param: float | None = None) -> float:
    """Unitarily invariant norm of ``M`` computed from its singular values.

    ``kind`` may also be a combined string such as ``"ky_fan:2"``.
    """
    if ":" in kind:
        kind, param = parse_norm(kind)
    return norm_from_singular_values(singular_values(M), kind, param)


def read_matrix_csv(path, symmetry_tol: float = 1e-9) -> np.ndarray:
    """Read the matrix CSV format: a line with ``n``, then ``n`` rows of ``n`` floats.

    The result is symmetrized as ``(M + M^T)/2``; a warning is issued if the
    asymmetry exceeded ``symmetry_tol`` relative to the largest entry.
    """
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise DomainError(f"{path}: empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise DomainError(f"{path}: first line must be the dimension n, got {lines[0]!r}") from None
    if n < 1 or len(lines) != n + 1:
        raise DomainError(f"{path}: expected {n} rows after the dimension line, got {len(lines) - 1}")
    rows = []
    for r, ln in enumerate(lines[1:], start=1):
        vals = [float(x) for x in ln.split(",")]
        if len(vals) != n:
            raise DomainError(f"{path}: row {r} has {len(vals)} entries, expected {n}")
        rows.append(vals)
    m = np.array(rows)
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{path}: non-finite entries")
    asym = float(np.max(np.abs(m - m.T)))
    if asym > symmetry_tol * max(1.0, float(np.max(np.abs(m)))):
        warnings.warn(f"{path}: asymmetry {asym:.3e} exceeds tolerance; symmetrizing", stacklevel=2)
    return as_symmetric(0.5 * (m + m.T))


def write_matrix_csv(path, M) -> None:
    m = np.asarray(M, dtype=float)
    out = [str(m.shape[0])]
    out += [",".join(repr(float(x)) for x in row) for row in m]
    Path(path).write_text("\n".join(out) + "\n")
