"""Explicit witnesses showing that class thresholds and hypotheses are sharp.

All moment-family witnesses live on the segment A_t = [1 + t i j] (i, j = 1..n),
which satisfies A_t >= A_s >= J >= 0 for t >= s >= 0.  A vector eta is chosen
orthogonal to low moment vectors (1^k, ..., n^k) so that

    <phi_p[A_t] eta, eta> = sum_k C(p, k) (sum_i i^k eta_i)^2 t^k

starts at a term with a negative binomial coefficient.  Since every entry of
A_t is positive, phi_p and psi_p agree on these matrices.  Entries of A_t stay
in [1, 2) on the scanned grid, so a search succeeds once the relevant minimum
eigenvalue is below ``-10 * check_tol`` in absolute terms; the margin
normalized by the operator norm is reported alongside.

A ``Witness`` stores the matrices and the violated quantity; ``validate``
recomputes everything with ``numpy.linalg.eigvalsh`` rather than the
package's own eigensolver.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .entrywise import apply_entrywise, functional_calculus
from .errors import PreconditionError, SearchFailure
from .linalg import eigvals, is_psd, op_norm_sym
from .majorization import verify_divided_difference_bound, verify_spectral_domination
from .scalarfn import AbsPower, ScalarFunction, SignedPower, binom
from .verdicts import SClass, jsonable

CHECK_TOL = 1e-8
SCAN_DEPTH = 40
WITNESS_PSD_TOL = 1e-9


@dataclass
class Witness:
    """A concrete violation (or, for controls, a confirmed non-violation).

    ``violated_quantity`` has sign ``expected_sign`` ("negative" for a
    violation, "positive" for a control that must hold).
    """

    kind: str
    description: str
    matrices: list
    violated_quantity: float
    expected_sign: str = "negative"
    fn: str = ""
    vector: list | None = None
    scalar_params: dict = field(default_factory=dict)
    is_control: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return jsonable({
            "kind": self.kind,
            "description": self.description,
            "fn": self.fn,
            "matrices": [np.asarray(m) for m in self.matrices],
            "vector": self.vector,
            "scalar_params": self.scalar_params,
            "violated_quantity": self.violated_quantity,
            "expected_sign": self.expected_sign,
            "is_control": self.is_control,
            "details": self.details,
        })

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls(kind=d["kind"], description=d["description"],
                   matrices=[np.array(m, dtype=float) for m in d["matrices"]],
                   violated_quantity=float(d["violated_quantity"]),
                   expected_sign=d.get("expected_sign", "negative"), fn=d.get("fn", ""),
                   vector=d.get("vector"), scalar_params=dict(d.get("scalar_params", {})),
                   is_control=bool(d.get("is_control", False)), details=dict(d.get("details", {})))

    def validate(self, rel_tol: float = 1e-6) -> tuple[bool, list[str]]:
        """Independently recompute the quantity and the matrix facts it relies on."""
        problems = []
        try:
            value, facts = _RECHECKS[self.kind](self)
        except KeyError:
            return False, [f"unknown witness kind {self.kind!r}"]
        for ok, what in facts:
            if not ok:
                problems.append(f"fact failed: {what}")
        sign_ok = value < 0 if self.expected_sign == "negative" else value >= 0
        if not sign_ok:
            problems.append(f"recomputed quantity {value!r} does not have {self.expected_sign} sign")
        if abs(value - self.violated_quantity) > rel_tol * max(1.0, abs(value)):
            problems.append(f"recomputed quantity {value!r} differs from stored {self.violated_quantity!r}")
        return not problems, problems


def save_witnesses(path, witnesses: Sequence[Witness]) -> None:
    payload = {"witnesses": [w.to_dict() for w in witnesses]}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_witnesses(path, validate: bool = True) -> list[Witness]:
    """Load a witness file; with ``validate`` every witness is re-checked and a
    failure raises ``ValueError``."""
    data = json.loads(Path(path).read_text())
    out = [Witness.from_dict(d) for d in data["witnesses"]]
    if validate:
        for i, w in enumerate(out):
            ok, problems = w.validate()
            if not ok:
                raise ValueError(f"witness {i} ({w.kind}) failed validation: {'; '.join(problems)}")
    return out


# -- independent recomputation ---------------------------------------------

def _np_fn(fn: str) -> Callable[[np.ndarray], np.ndarray]:
    """Plain numpy evaluation for power functions; other text goes through the parser."""
    head, _, arg = fn.partition(":")
    if head == "phi":
        p = float(arg)
        return (lambda x: np.ones_like(x)) if p == 0 else (lambda x: np.abs(x) ** p)
    if head == "psi":
        p = float(arg)
        return lambda x: np.sign(x) * np.abs(x) ** p
    from .dsl import parse_fn_spec
    f = parse_fn_spec(fn)
    return lambda x: np.asarray(f(x), dtype=float)


def _min_eig(M) -> float:
    return float(np.linalg.eigvalsh(np.asarray(M, dtype=float))[0])


def _psd(M, tol=WITNESS_PSD_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    return _min_eig(M) >= -tol * max(1.0, float(np.max(np.abs(np.linalg.eigvalsh(M)))))


def _recheck_midpoint(w: Witness):
    f = _np_fn(w.fn)
    a_s, a_t = w.matrices
    mid = 0.5 * (a_s + a_t)
    gap = 0.5 * (f(a_s) + f(a_t)) - f(mid)
    return _min_eig(gap), [(_psd(a_s), "A_s >= 0"), (_psd(a_t - a_s), "A_t >= A_s")]


def _recheck_positivity(w: Witness):
    f = _np_fn(w.fn)
    (a,) = w.matrices
    return _min_eig(f(a)), [(_psd(a), "A >= 0")]


def _recheck_monotonicity(w: Witness):
    f = _np_fn(w.fn)
    a, b = w.matrices
    return _min_eig(f(a) - f(b)), [(_psd(b), "B >= 0"), (_psd(a - b), "A >= B")]


def _recheck_spectral_norm(w: Witness):
    f = _np_fn(w.fn)
    (a,) = w.matrices
    p = float(w.scalar_params["p"])
    lam, q = np.linalg.eigh(a)
    a_p = (q * np.clip(lam, 0.0, None) ** p) @ q.T
    lhs = float(np.max(np.abs(np.linalg.eigvalsh(f(a)))))
    rhs = float(np.max(np.abs(np.linalg.eigvalsh(a_p))))
    return rhs - lhs, [(_psd(a), "A >= 0")]


def _recheck_divided_difference(w: Witness):
    f = _np_fn(w.fn)
    a, b = w.matrices
    la = np.sort(np.linalg.eigvalsh(a))[::-1]
    lb = np.sort(np.linalg.eigvalsh(b))[::-1]
    p = float(w.scalar_params["p"])

    def dd(x, y):
        if abs(x - y) > 1e-9:
            return float((f(np.array(x)) - f(np.array(y))) / (x - y))
        return p * abs(x) ** (p - 1) if x != 0 else 0.0

    d = np.array([dd(x, y) for x, y in zip(la, lb)])
    s_diff = np.linalg.svd(a - b, compute_uv=False)
    lhs = np.sort(np.linalg.svd(f(a) - f(b), compute_uv=False))[::-1]
    rhs = np.sort(d * s_diff)[::-1]
    margins = np.cumsum(rhs) - np.cumsum(lhs)
    return float(np.min(margins)), [(_psd(a), "A >= 0"), (_psd(b), "B >= 0")]


def _recheck_affinity(w: Witness):
    f = _np_fn(w.fn)
    x, y = w.matrices
    family = w.details["family"]
    if family == "convexity":
        lam = float(w.scalar_params["lambda"])
        gap = lam * f(x) + (1 - lam) * f(y) - f(lam * x + (1 - lam) * y)
        return _min_eig(gap), [(_psd(x), "X >= 0"), (_psd(y), "Y >= 0")]
    return _min_eig(f(x) - f(y)), [(_psd(x - y), "X >= Y")]


_RECHECKS = {
    "midpoint_convexity": _recheck_midpoint,
    "positivity": _recheck_positivity,
    "monotonicity": _recheck_monotonicity,
    "spectral_norm": _recheck_spectral_norm,
    "divided_difference": _recheck_divided_difference,
    "affinity": _recheck_affinity,
}


# -- the moment family -----------------------------------------------------

def segment_matrix(n: int, t: float) -> np.ndarray:
    """A_t = [1 + t i j] for i, j = 1..n."""
    idx = np.arange(1, n + 1, dtype=float)
    return 1.0 + t * np.outer(idx, idx)


def moment_vector(n: int, orthogonal_to: Sequence[int], normalize: int) -> np.ndarray:
    """eta with <eta, (i^k)> = 0 for k in ``orthogonal_to`` and <eta, (i^normalize)> = 1.

    eta is supported on the first r = len(orthogonal_to) + 1 coordinates,
    where the moment system is a nonsingular generalized Vandermonde matrix.
    """
    ks = list(orthogonal_to) + [normalize]
    r = len(ks)
    if r > n:
        raise PreconditionError(f"insufficient dimensions: {r} moment conditions need n >= {r}, got n = {n}")
    idx = np.arange(1, r + 1, dtype=float)
    system = np.array([idx ** k for k in ks])
    rhs = np.zeros(r)
    rhs[-1] = 1.0
    eta = np.zeros(n)
    eta[:r] = np.linalg.solve(system, rhs)
    return eta


def moment_residual(eta: np.ndarray, orthogonal_to: Sequence[int], normalize: int) -> float:
    """Largest relative violation of the moment conditions."""
    idx = np.arange(1, eta.size + 1, dtype=float)
    worst = 0.0
    for k in orthogonal_to:
        v = idx ** k
        worst = max(worst, abs(float(v @ eta)) / float(np.abs(v) @ np.abs(eta)))
    worst = max(worst, abs(float((idx ** normalize) @ eta) - 1.0))
    return worst


def quadratic_form(n: int, p: float, eta: np.ndarray, t: float) -> float:
    """<phi_p[A_t] eta, eta> = sum_ij (1 + t i j)^p eta_i eta_j."""
    return float(eta @ (segment_matrix(n, t) ** p) @ eta)


def quadratic_form_dd(n: int, p: float, eta: np.ndarray, t: float) -> float:
    """Second t-derivative of ``quadratic_form``, in closed form."""
    ij = np.outer(np.arange(1, n + 1), np.arange(1, n + 1)).astype(float)
    return float(eta @ (p * (p - 1) * ij ** 2 * (1.0 + t * ij) ** (p - 2)) @ eta)


def richardson_second_difference(g: Callable[[float], float], t: float, h: float) -> float:
    def d2(step):
        return (g(t + step) - 2.0 * g(t) + g(t - step)) / (step * step)
    return (4.0 * d2(0.5 * h) - d2(h)) / 3.0


def scan_grid(n: int, depth: int = SCAN_DEPTH) -> list[float]:
    """t = 2^-k n^-2 for k = 1..depth, largest first."""
    return [2.0 ** -k / n ** 2 for k in range(1, depth + 1)]


def _check_power(n: int, p: float, limit: float, what: str) -> None:
    if int(n) != n or n < 1:
        raise PreconditionError(f"n must be a positive integer, got {n}")
    if not p > 0:
        raise PreconditionError(f"p must be positive, got {p}")
    if float(p).is_integer():
        raise PreconditionError(f"p must not be an integer, got {p}")
    if not p < limit:
        raise PreconditionError(f"{what}, got p = {p}")


def midpoint_convexity_witness(n: int, p: float, check_tol: float = CHECK_TOL,
                               depth: int = SCAN_DEPTH) -> Witness:
    """A_t >= A_s >= 0 with phi_p[(A_s + A_t)/2] not below (phi_p[A_s] + phi_p[A_t])/2.

    Needs 0 < p < n with p not an integer.  eta kills the moments 2..[p]+1, so
    the second t-derivative of <phi_p[A_t] eta, eta> has a negative leading
    term C(p, [p]+2) ([p]+2)([p]+1) t^[p].  The grid is scanned from the
    largest t; where both the closed-form and the Richardson estimates of
    that derivative are negative, the pairs (0, t) and (t/2, t) are tried.
    """
    _check_power(n, p, n, f"need p < n = {n}")
    m = math.floor(p)
    orth = list(range(2, m + 2))
    eta = moment_vector(n, orth, m + 2)
    fn = f"phi:{float(p)!r}"
    f = AbsPower(p)
    g = lambda t: quadratic_form(n, p, eta, t)  # noqa: E731
    scanned = []
    for t in scan_grid(n, depth):
        exact = quadratic_form_dd(n, p, eta, t)
        rich = richardson_second_difference(g, t, t / 16.0)
        scanned.append(t)
        if not (exact < 0 and rich < 0):
            continue
        a_t = segment_matrix(n, t)
        for s in (0.0, 0.5 * t):
            a_s = segment_matrix(n, s)
            mid = 0.5 * (a_s + a_t)
            fa_s, fa_t = apply_entrywise(f, a_s), apply_entrywise(f, a_t)
            gap = 0.5 * (fa_s + fa_t) - apply_entrywise(f, mid)
            scale = max(1.0, op_norm_sym(fa_t))
            lo = float(eigvals(gap)[-1])
            if lo < -10 * check_tol:
                return Witness(
                    kind="midpoint_convexity",
                    description=(f"phi_{p} fails midpoint convexity on the segment [1 + t i j], "
                                 f"n = {n}, between t = {s!r} and t = {t!r}"),
                    matrices=[a_s, a_t], violated_quantity=lo, fn=fn, vector=eta.tolist(),
                    scalar_params={"n": n, "p": p, "s": s, "t": t},
                    details={"second_derivative": exact, "second_derivative_richardson": rich,
                             "leading_coefficient": binom(p, m + 2), "margin": -lo / scale,
                             "scale": scale, "moment_residual": moment_residual(eta, orth, m + 2),
                             "form_midpoint_gap": g(0.5 * (s + t)) - 0.5 * (g(s) + g(t))})
    raise SearchFailure(f"no midpoint-convexity violation found for n = {n}, p = {p} "
                        f"on {len(scanned)} grid points down to t = {scanned[-1]:.3e}; inconclusive")


def power_sharpness_witness(n: int, p: float, cls, check_tol: float = CHECK_TOL,
                            depth: int = SCAN_DEPTH) -> Witness:
    """Witness that phi_p (equally psi_p) leaves S-pos(n) for p < n-2 or S-mono(n) for p < n-1.

    S-pos: eta kills moments 0..[p]+1, so <phi_p[A_t] eta, eta> = C(p, [p]+2) t^([p]+2) + ...
    is negative for small t and phi_p[A_t] is not PSD.
    S-mono: eta kills moments 1..[p]+1, so <(phi_p[A_t] - phi_p[J]) eta, eta> has the
    same negative leading term while A_t >= J >= 0.
    """
    cls = SClass.parse(cls)
    if cls is SClass.CONV:
        return midpoint_convexity_witness(n, p, check_tol, depth)
    m = math.floor(p)
    if cls is SClass.POS:
        if n < 3:
            raise PreconditionError(f"S-pos sharpness needs n >= 3, got n = {n}")
        _check_power(n, p, n - 2, f"need p < n - 2 = {n - 2}")
        orth = list(range(0, m + 2))
    else:
        if n < 2:
            raise PreconditionError(f"S-mono sharpness needs n >= 2, got n = {n}")
        _check_power(n, p, n - 1, f"need p < n - 1 = {n - 1}")
        orth = list(range(1, m + 2))
    eta = moment_vector(n, orth, m + 2)
    f = AbsPower(p)
    fn = f"phi:{float(p)!r}"
    base = np.ones((n, n))
    f_base = apply_entrywise(f, base)
    scanned = []
    for t in scan_grid(n, depth):
        scanned.append(t)
        a_t = segment_matrix(n, t)
        fa = apply_entrywise(f, a_t)
        if cls is SClass.POS:
            target, scale = fa, max(1.0, op_norm_sym(fa))
        else:
            target, scale = fa - f_base, max(1.0, op_norm_sym(fa), op_norm_sym(f_base))
        lo = float(eigvals(target)[-1])
        if lo < -10 * check_tol:
            form = float(eta @ target @ eta)
            common = {"n": n, "p": p, "t": t}
            details = {"form_value": form, "leading_coefficient": binom(p, m + 2),
                       "margin": -lo / scale, "scale": scale,
                       "moment_residual": moment_residual(eta, orth, m + 2),
                       "also_applies_to": f"psi:{float(p)!r}"}
            if cls is SClass.POS:
                return Witness("positivity",
                               f"phi_{p}[A_t] is not PSD for the PSD matrix A_t = [1 + t i j], n = {n}",
                               [a_t], lo, fn=fn, vector=eta.tolist(), scalar_params=common,
                               details=details)
            return Witness("monotonicity",
                           f"A_t >= J >= 0 but phi_{p}[A_t] is not above phi_{p}[J], n = {n}",
                           [a_t, base], lo, fn=fn, vector=eta.tolist(), scalar_params=common,
                           details=details)
    raise SearchFailure(f"no {cls.value} violation found for phi_{p} at n = {n} "
                        f"on {len(scanned)} grid points down to t = {scanned[-1]:.3e}; inconclusive")


# -- the fixed 2 x 2 counterexamples ---------------------------------------

def divided_difference_threshold() -> float:
    """The root of 2^(2-p) = p, below which psi_p breaks the divided-difference bound on
    the fixed pair J_2 and [[1, -1], [-1, 1]]."""
    return float(brentq(lambda p: 2.0 ** (2.0 - p) - p, 1.0, 2.0, xtol=1e-15))


def norm_domination_witness(p: float = 0.5) -> Witness:
    """For 0 < p < 1 and A = J_2/2: ||phi_p[A]|| = 2^(1-p) > 1 = ||A^p||."""
    if not 0 < p < 1:
        raise PreconditionError(f"need 0 < p < 1, got {p}")
    a = np.full((2, 2), 0.5)
    f = AbsPower(p)
    lhs = op_norm_sym(apply_entrywise(f, a))
    rhs = op_norm_sym(functional_calculus(f, a))
    verdict = verify_spectral_domination(f, a)
    return Witness("spectral_norm",
                   f"phi_{p} is S-pos of order 2 but ||phi_p[A]|| > ||A^p|| for A = J/2",
                   [a], rhs - lhs, fn=f"phi:{float(p)!r}", scalar_params={"p": p, "n": 2},
                   details={"lhs_norm": lhs, "rhs_norm": rhs,
                            "spectral_domination_holds": verdict.holds,
                            "prefix_margins": verdict.prefix_margins})


def divided_difference_witness(p: float) -> Witness:
    """psi_p on A = J_2, B = [[1, -1], [-1, 1]]: the prefix-2 margin of the
    divided-difference bound is 2p 2^(p-1) - 4.  Negative below the threshold
    root; for larger p the witness is a control that must hold."""
    if not p > 0:
        raise PreconditionError(f"p must be positive, got {p}")
    a = np.ones((2, 2))
    b = np.array([[1.0, -1.0], [-1.0, 1.0]])
    f = SignedPower(p)
    verdict = verify_divided_difference_bound(f, a, b)
    quantity = float(np.min(verdict.prefix_margins))
    control = verdict.holds
    return Witness("divided_difference",
                   (f"psi_{p} on J_2 and [[1,-1],[-1,1]]: divided-difference bound "
                    + ("holds (control)" if control else "fails")),
                   [a, b], quantity, expected_sign="positive" if control else "negative",
                   fn=f"psi:{float(p)!r}", scalar_params={"p": p, "n": 2}, is_control=control,
                   details={"prefix_margins": verdict.prefix_margins, "lhs": verdict.lhs,
                            "rhs": verdict.rhs, "threshold": divided_difference_threshold(),
                            "first_violation": verdict.first_violation})


def fixed_counterexamples(p_norm: float = 0.5, p_violation: float = 1.2,
                          p_control: float = 1.5) -> list[Witness]:
    """The two fixed 2 x 2 counterexamples plus a control on the passing side."""
    return [norm_domination_witness(p_norm), divided_difference_witness(p_violation),
            divided_difference_witness(p_control)]


# -- 2 x 2 families forcing affinity ---------------------------------------

def _affinity_families(a: float, lam: float):
    z = np.zeros((2, 2))
    yield "monotone_diagonal", np.array([[a, lam * a], [lam * a, a]]), np.eye(2) * (1 - lam) * a
    yield ("monotone_offdiagonal", np.array([[lam * a, (1 - lam) * a], [(1 - lam) * a, lam * a]]),
           np.array([[0.0, a], [a, 0.0]]))
    yield "monotone_sign_upper", np.array([[a, -a], [-a, a]]), z
    yield "monotone_sign_lower", z, np.array([[-a, a], [a, -a]])


def affinity_witness(f: ScalarFunction, a: float, lam: float,
                     tol: float = CHECK_TOL) -> Witness | None:
    """Search the 2 x 2 families on which order preservation (without the
    requirement B >= 0) or convexity over PSD matrices forces f to be affine.

    The four monotonicity families compare X >= Y; the convexity family mixes
    X = [[a, -a], [-a, a]] and Y = [[a, a], [a, a]].  Returns the first family
    whose f-image inequality fails, or None when none does.
    """
    if not 0 <= a < f.alpha:
        raise PreconditionError(f"need 0 <= a < alpha = {f.alpha}, got a = {a}")
    if not 0 < lam < 1:
        raise PreconditionError(f"need 0 < lambda < 1, got {lam}")
    params = {"a": a, "lambda": lam}
    for family, x, y in _affinity_families(a, lam):
        diff = apply_entrywise(f, x) - apply_entrywise(f, y)
        lo = float(eigvals(diff)[-1])
        if lo < -tol * max(1.0, op_norm_sym(diff)):
            return Witness("affinity", f"{f.describe()} breaks the {family} family at a = {a}, lambda = {lam}",
                           [x, y], lo, fn=f.describe(), scalar_params=params,
                           details={"family": family})
    x = np.array([[a, -a], [-a, a]])
    y = np.array([[a, a], [a, a]])
    mix = lam * x + (1 - lam) * y
    gap = lam * apply_entrywise(f, x) + (1 - lam) * apply_entrywise(f, y) - apply_entrywise(f, mix)
    lo = float(eigvals(gap)[-1])
    if lo < -tol * max(1.0, op_norm_sym(gap)):
        return Witness("affinity", f"{f.describe()} breaks the convexity family at a = {a}, lambda = {lam}",
                       [x, y], lo, fn=f.describe(), scalar_params=params,
                       details={"family": "convexity"})
    return None
