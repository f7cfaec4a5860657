"""Scalar functions on a symmetric interval (-alpha, alpha).

Every function is an immutable value built from a small set of variants
(power series, the even/odd fractional powers, a few named analytic
examples, and closure under shift, sum, scaling, reflection and
differentiation).  Each variant knows its exact derivatives and, when it is
analytic on its whole domain, its Taylor coefficients at 0.

Numbers returned by ``__call__`` and ``deriv`` are plain floats for scalar
input and arrays for array input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NotAnalyticError, NotDifferentiableError, PreconditionError
from .verdicts import ClassVerdict, SClass

INF = math.inf
DD_SWITCH = 1e-6
WORKING_BOX = 10.0
GRID_SIZE = 64


def falling(p: float, k: int) -> float:
    """Falling factorial p (p-1) ... (p-k+1)."""
    out = 1.0
    for i in range(k):
        out *= p - i
    return out


def binom(p: float, k: int) -> float:
    """Generalized binomial coefficient C(p, k)."""
    return falling(p, k) / math.factorial(k)


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def _is_int(p: float) -> bool:
    return float(p).is_integer()


class ScalarFunction:
    """Base class; subclasses implement ``_value``, ``_deriv`` and friends."""

    @property
    def alpha(self) -> float:
        raise NotImplementedError

    @property
    def is_analytic(self) -> bool:
        """True when the Taylor series at 0 represents the function on all of (-alpha, alpha)."""
        return True

    def _value(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _deriv(self, x: np.ndarray, k: int) -> np.ndarray:
        raise NotImplementedError

    def _taylor(self, k: int) -> float:
        raise NotImplementedError

    def derivative(self) -> "ScalarFunction":
        return Derivative(self, 1)

    def describe(self) -> str:
        raise NotImplementedError

    # -- public API -------------------------------------------------------

    def check_domain(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        bad = ~(np.abs(arr) < self.alpha)
        if np.any(bad):
            where = np.argwhere(bad)[0]
            val = arr[tuple(where)] if arr.ndim else float(arr)
            raise DomainError(f"{val!r} outside the domain (-{_fmt(self.alpha)}, {_fmt(self.alpha)}) of {self.describe()}")
        return arr

    def __call__(self, x):
        arr = self.check_domain(x)
        out = self._value(arr)
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, x, k: int = 1):
        """Exact k-th derivative at ``x``."""
        if k < 0 or int(k) != k:
            raise PreconditionError(f"derivative order must be a nonnegative integer, got {k}")
        arr = self.check_domain(x)
        out = self._value(arr) if k == 0 else self._deriv(arr, int(k))
        return float(out) if np.ndim(out) == 0 else out

    def taylor_coeff(self, k: int) -> float:
        """f^(k)(0) / k!."""
        if k < 0:
            raise PreconditionError(f"coefficient index must be >= 0, got {k}")
        if not self.is_analytic:
            raise NotAnalyticError(f"{self.describe()} has no Taylor expansion on its domain")
        return float(self._taylor(int(k)))

    def __repr__(self) -> str:
        return f"<ScalarFunction {self.describe()}>"

    # -- arithmetic sugar -------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = PowerSeries((float(other),))
        if not isinstance(other, ScalarFunction):
            return NotImplemented
        return Sum((self, other))

    __radd__ = __add__

    def __mul__(self, c):
        if not isinstance(c, (int, float)):
            return NotImplemented
        return Scaled(float(c), self)

    __rmul__ = __mul__

    def __neg__(self):
        return Scaled(-1.0, self)

    def __sub__(self, other):
        return self + (-other)


@dataclass(frozen=True, repr=False)
class PowerSeries(ScalarFunction):
    """sum_k coeffs[k] x^k on |x| < radius."""

    coeffs: tuple
    radius: float = INF

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if not c:
            raise PreconditionError("power series needs at least one coefficient")
        if not all(math.isfinite(v) for v in c):
            raise PreconditionError("power series coefficients must be finite")
        if not self.radius > 0:
            raise PreconditionError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def alpha(self):
        return self.radius

    def _value(self, x):
        return np.polyval(self.coeffs[::-1], x)

    def _deriv(self, x, k):
        d = [c * falling(j, k) for j, c in enumerate(self.coeffs) if j >= k]
        if not d:
            return np.zeros_like(x)
        return np.polyval(d[::-1], x)

    def _taylor(self, k):
        return self.coeffs[k] if k < len(self.coeffs) else 0.0

    def derivative(self):
        d = tuple(j * c for j, c in enumerate(self.coeffs) if j >= 1) or (0.0,)
        return PowerSeries(d, self.radius)

    def describe(self):
        return "series:" + ",".join(_fmt(c) for c in self.coeffs) + "@" + _fmt(self.radius)


def _power_deriv(p: float, x: np.ndarray, k: int, odd: bool, desc: str) -> np.ndarray:
    # d^k/dx^k of |x|^p (odd=False) or sign(x)|x|^p (odd=True)
    nz = x != 0
    out = np.zeros_like(x, dtype=float)
    ax = np.abs(x[nz])
    sgn = np.sign(x[nz])
    out[nz] = falling(p, k) * ax ** (p - k) * sgn ** (k + (1 if odd else 0))
    if np.any(~nz):
        if p == 0 and not odd:
            at_zero = 0.0
        elif k < p:
            at_zero = 0.0
        elif _is_int(p) and p > 0 and (int(p) % 2 == 1) == odd:
            at_zero = float(math.factorial(int(p))) if k == p else 0.0
        else:
            raise NotDifferentiableError(f"{desc} has no derivative of order {k} at 0")
        out[~nz] = at_zero
    return out


@dataclass(frozen=True, repr=False)
class AbsPower(ScalarFunction):
    """x -> |x|^p, with the p = 0 case identically 1."""

    p: float

    def __post_init__(self):
        if not (self.p >= 0 and math.isfinite(self.p)):
            raise PreconditionError(f"exponent must be >= 0, got {self.p}")
        object.__setattr__(self, "p", float(self.p))

    @property
    def alpha(self):
        return INF

    @property
    def is_analytic(self):
        return self.p == 0 or (_is_int(self.p) and int(self.p) % 2 == 0)

    def _value(self, x):
        if self.p == 0:
            return np.ones_like(x, dtype=float)
        return np.abs(x) ** self.p

    def _deriv(self, x, k):
        return _power_deriv(self.p, x, k, odd=False, desc=self.describe())

    def _taylor(self, k):
        return 1.0 if k == int(self.p) else 0.0

    def derivative(self):
        if self.p == 0:
            return PowerSeries((0.0,))
        return Scaled(self.p, SignedPower(self.p - 1))

    def describe(self):
        return f"phi:{_fmt(self.p)}"


@dataclass(frozen=True, repr=False)
class SignedPower(ScalarFunction):
    """x -> sign(x)|x|^p; p = 0 is the sign function with sign(0) = 0."""

    p: float

    def __post_init__(self):
        if not (self.p >= 0 and math.isfinite(self.p)):
            raise PreconditionError(f"exponent must be >= 0, got {self.p}")
        object.__setattr__(self, "p", float(self.p))

    @property
    def alpha(self):
        return INF

    @property
    def is_analytic(self):
        return _is_int(self.p) and int(self.p) % 2 == 1

    def _value(self, x):
        if self.p == 0:
            return np.sign(x).astype(float)
        return np.sign(x) * np.abs(x) ** self.p

    def _deriv(self, x, k):
        if self.p == 0:
            if np.any(x == 0):
                raise NotDifferentiableError("psi:0 (sign) is not differentiable at 0")
            return np.zeros_like(x, dtype=float)
        return _power_deriv(self.p, x, k, odd=True, desc=self.describe())

    def _taylor(self, k):
        return 1.0 if k == int(self.p) else 0.0

    def derivative(self):
        if self.p == 0:
            raise NotDifferentiableError("psi:0 (sign) is not differentiable at 0")
        return Scaled(self.p, AbsPower(self.p - 1))

    def describe(self):
        return f"psi:{_fmt(self.p)}"


@dataclass(frozen=True, repr=False)
class Exp(ScalarFunction):
    @property
    def alpha(self):
        return INF

    def _value(self, x):
        return np.exp(x)

    def _deriv(self, x, k):
        return np.exp(x)

    def _taylor(self, k):
        return 1.0 / math.factorial(k)

    def derivative(self):
        return self

    def describe(self):
        return "exp"


@dataclass(frozen=True, repr=False)
class NegLog1m(ScalarFunction):
    """x -> -log(1 - x) on (-1, 1)."""

    @property
    def alpha(self):
        return 1.0

    def _value(self, x):
        return -np.log1p(-x)

    def _deriv(self, x, k):
        return math.factorial(k - 1) / (1.0 - x) ** k

    def _taylor(self, k):
        return 0.0 if k == 0 else 1.0 / k

    def describe(self):
        return "neglog1m"


@dataclass(frozen=True, repr=False)
class NegPower(ScalarFunction):
    """x -> -(1 - x)^p on (-1, 1), for 0 < p < 1."""

    p: float

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise PreconditionError(f"negpow needs 0 < p < 1, got {self.p}")
        object.__setattr__(self, "p", float(self.p))

    @property
    def alpha(self):
        return 1.0

    def _value(self, x):
        return -((1.0 - x) ** self.p)

    def _deriv(self, x, k):
        return -((-1.0) ** k) * falling(self.p, k) * (1.0 - x) ** (self.p - k)

    def _taylor(self, k):
        if k == 0:
            return -1.0
        return (-1.0) ** (k - 1) * binom(self.p, k)

    def describe(self):
        return f"negpow:{_fmt(self.p)}"


@dataclass(frozen=True, repr=False)
class Shifted(ScalarFunction):
    """x -> inner(x + a); the domain shrinks to keep x + a inside inner's."""

    inner: ScalarFunction
    a: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        if not self.inner.alpha - abs(self.a) > 0:
            raise PreconditionError(f"shift {self.a} leaves no domain for {self.inner.describe()}")

    @property
    def alpha(self):
        return self.inner.alpha - abs(self.a)

    @property
    def is_analytic(self):
        return self.inner.is_analytic

    def _value(self, x):
        return self.inner._value(x + self.a)

    def _deriv(self, x, k):
        return self.inner._deriv(x + self.a, k)

    def _taylor(self, k):
        x = np.asarray(self.a)
        d = self.inner._value(x) if k == 0 else self.inner._deriv(x, k)
        return float(d) / math.factorial(k)

    def derivative(self):
        return Shifted(self.inner.derivative(), self.a)

    def describe(self):
        return f"shift:{_fmt(self.a)}:{self.inner.describe()}"


@dataclass(frozen=True, repr=False)
class Sum(ScalarFunction):
    terms: tuple

    def __post_init__(self):
        terms = []
        for t in self.terms:
            terms.extend(t.terms if isinstance(t, Sum) else [t])
        if not terms:
            raise PreconditionError("empty sum")
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def alpha(self):
        return min(t.alpha for t in self.terms)

    @property
    def is_analytic(self):
        return all(t.is_analytic for t in self.terms)

    def _value(self, x):
        return sum(t._value(x) for t in self.terms)

    def _deriv(self, x, k):
        return sum(t._deriv(x, k) for t in self.terms)

    def _taylor(self, k):
        return sum(t._taylor(k) for t in self.terms)

    def derivative(self):
        return Sum(tuple(t.derivative() for t in self.terms))

    def describe(self):
        return "sum:(" + "|".join(t.describe() for t in self.terms) + ")"


@dataclass(frozen=True, repr=False)
class Scaled(ScalarFunction):
    c: float
    inner: ScalarFunction

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))

    @property
    def alpha(self):
        return self.inner.alpha

    @property
    def is_analytic(self):
        return self.inner.is_analytic

    def _value(self, x):
        return self.c * self.inner._value(x)

    def _deriv(self, x, k):
        return self.c * self.inner._deriv(x, k)

    def _taylor(self, k):
        return self.c * self.inner._taylor(k)

    def derivative(self):
        return Scaled(self.c, self.inner.derivative())

    def describe(self):
        return f"scale:{_fmt(self.c)}:{self.inner.describe()}"


@dataclass(frozen=True, repr=False)
class Reflected(ScalarFunction):
    """x -> inner(-x)."""

    inner: ScalarFunction

    @property
    def alpha(self):
        return self.inner.alpha

    @property
    def is_analytic(self):
        return self.inner.is_analytic

    def _value(self, x):
        return self.inner._value(-x)

    def _deriv(self, x, k):
        return (-1.0) ** k * self.inner._deriv(-x, k)

    def _taylor(self, k):
        return (-1.0) ** k * self.inner._taylor(k)

    def derivative(self):
        return Scaled(-1.0, Reflected(self.inner.derivative()))

    def describe(self):
        return f"reflect:{self.inner.describe()}"


@dataclass(frozen=True, repr=False)
class Derivative(ScalarFunction):
    """The ``order``-th derivative of ``inner`` as a function in its own right."""

    inner: ScalarFunction
    order: int = 1

    def __post_init__(self):
        if self.order < 1:
            raise PreconditionError("derivative order must be >= 1")

    @property
    def alpha(self):
        return self.inner.alpha

    @property
    def is_analytic(self):
        return self.inner.is_analytic

    def _value(self, x):
        return self.inner._deriv(x, self.order)

    def _deriv(self, x, k):
        return self.inner._deriv(x, self.order + k)

    def _taylor(self, k):
        m = self.order
        return self.inner._taylor(k + m) * falling(k + m, m)

    def derivative(self):
        return Derivative(self.inner, self.order + 1)

    def describe(self):
        return f"deriv:{self.order}:{self.inner.describe()}"


# -- coefficient certification ---------------------------------------------

def certify_class_by_coeffs(f: ScalarFunction, cls, depth: int = 64,
                            coeff_tol: float = 1e-12) -> ClassVerdict:
    """Sufficient test for class membership on the whole domain via Taylor signs.

    Passes when every scanned coefficient from the class's starting index
    (0, 1 or 2) is >= -coeff_tol.  A negative coefficient is conclusive the
    other way, since the characterization is an equivalence.
    """
    cls = SClass.parse(cls)
    if not f.is_analytic:
        raise NotAnalyticError(f"{f.describe()} is not analytic on its domain; no coefficient certificate")
    start = cls.first_coefficient
    coeffs = [f.taylor_coeff(k) for k in range(start, depth)]
    worst = min(coeffs) if coeffs else 0.0
    for k, c in enumerate(coeffs, start=start):
        if c < -coeff_tol:
            return ClassVerdict(False, c, witness={"k": k, "coefficient": c},
                                details={"method": "taylor", "depth": depth})
    return ClassVerdict(True, worst, details={"method": "taylor", "depth": depth})


# -- divided differences ---------------------------------------------------

def _close(a: float, b: float, dd_switch: float) -> bool:
    return abs(a - b) <= dd_switch * max(1.0, abs(a), abs(b))


def div_diff1(f: ScalarFunction, a: float, b: float, dd_switch: float = DD_SWITCH) -> float:
    """First divided difference, with f'((a+b)/2) for (nearly) coincident points."""
    a, b = float(a), float(b)
    if not _close(a, b, dd_switch):
        return (f(a) - f(b)) / (a - b)
    return f.deriv(0.5 * (a + b), 1)


def div_diff2(f: ScalarFunction, a: float, b: float, c: float,
              dd_switch: float = DD_SWITCH) -> float:
    """Second divided difference, symmetric in its arguments.

    Nearly coincident points are merged at their mean; the merged forms
    (f(z)-f(m)-f'(m)(z-m))/(z-m)^2 and f''(m)/2 are accurate to second
    order in the merged spread.
    """
    x, y, z = sorted((float(a), float(b), float(c)))
    lo_close = _close(x, y, dd_switch)
    hi_close = _close(y, z, dd_switch)
    if lo_close and hi_close:
        return 0.5 * f.deriv((x + y + z) / 3.0, 2)
    if lo_close or hi_close:
        if lo_close:
            m, far = 0.5 * (x + y), z
        else:
            m, far = 0.5 * (y + z), x
        h = far - m
        return (f(far) - f(m) - f.deriv(m, 1) * h) / (h * h)
    return (div_diff1(f, x, y, dd_switch) - div_diff1(f, y, z, dd_switch)) / (x - z)


# -- grid-based order-2 checks ---------------------------------------------

def working_alpha(alpha: float, box: float = WORKING_BOX) -> float:
    return min(alpha, box) if math.isinf(alpha) else alpha


def default_grid(alpha: float, size: int = GRID_SIZE, box: float = WORKING_BOX) -> np.ndarray:
    """Log-spaced points in (0, alpha), with alpha = inf replaced by ``box``."""
    top = working_alpha(alpha, box)
    return np.geomspace(top * 1e-4, top * (1 - 1e-3), size)


def _grid(f_alpha: float, grid) -> np.ndarray:
    g = default_grid(f_alpha) if grid is None else np.sort(np.asarray(grid, dtype=float).ravel())
    if g.size == 0:
        raise PreconditionError("empty grid")
    if np.any(g <= 0) or np.any(g >= f_alpha):
        raise PreconditionError("grid must lie inside (0, alpha)")
    return g


def check_phi_class(f: ScalarFunction, grid=None, tol: float = 1e-9) -> ClassVerdict:
    """Grid check that f restricted to (0, alpha) is nonnegative, non-decreasing
    and sqrt-submultiplicative: f(sqrt(st)) <= sqrt(f(s) f(t)).

    A pass means "holds on the grid", not a proof.
    """
    g = _grid(f.alpha, grid)
    v = np.asarray(f(g), dtype=float)
    scale = max(1.0, float(np.max(np.abs(v))))
    lo = float(np.min(v))
    if lo < -tol * scale:
        i = int(np.argmin(v))
        return ClassVerdict(False, lo / scale, witness={"check": "nonnegative", "t": g[i], "value": v[i]})
    if np.all(v <= tol * scale):
        return ClassVerdict(True, 0.0, details={"identically_zero": True})
    steps = np.diff(v)
    if steps.size and float(np.min(steps)) < -tol * scale:
        i = int(np.argmin(steps))
        return ClassVerdict(False, float(steps[i]) / scale,
                            witness={"check": "non-decreasing", "points": [g[i], g[i + 1]],
                                     "values": [v[i], v[i + 1]]})
    s, t = np.meshgrid(g, g, indexing="ij")
    mid = np.sqrt(s * t)
    lhs = np.asarray(f(mid), dtype=float)
    rhs = np.sqrt(np.outer(v, v)) * (1 + tol)
    gap = (rhs - lhs) / np.maximum(1.0, np.abs(rhs))
    worst = np.unravel_index(int(np.argmin(gap)), gap.shape)
    margin = float(gap[worst])
    if margin < 0:
        return ClassVerdict(False, margin,
                            witness={"check": "sqrt-submultiplicative", "points": [s[worst], t[worst]],
                                     "lhs": lhs[worst], "rhs": rhs[worst]})
    return ClassVerdict(True, margin, details={"grid_size": int(g.size)})


def check_spos2(f: ScalarFunction, grid=None, tol: float = 1e-9) -> ClassVerdict:
    """Grid check of the order-2 characterization of entrywise positivity.

    Combines ``check_phi_class`` on (0, alpha), ``0 <= f(0) <= f(0+)`` with
    f(0+) read off the smallest grid point, and ``|f(-t)| <= f(t)``.
    """
    g = _grid(f.alpha, grid)
    phi = check_phi_class(f, g, tol)
    if not phi.holds:
        return phi
    v = np.asarray(f(g), dtype=float)
    scale = max(1.0, float(np.max(np.abs(v))))
    f0 = f(0.0)
    right = float(v[0])
    if f0 < -tol * scale or f0 > right + tol * scale:
        gap = min(f0, right - f0) / scale
        return ClassVerdict(False, gap, witness={"check": "0 <= f(0) <= f(0+)", "f0": f0, "f0_plus": right})
    neg = np.abs(np.asarray(f(-g), dtype=float))
    gaps = (v - neg) / scale
    i = int(np.argmin(gaps))
    if gaps[i] < -tol:
        return ClassVerdict(False, float(gaps[i]),
                            witness={"check": "|f(-t)| <= f(t)", "t": g[i], "f(t)": v[i], "|f(-t)|": neg[i]})
    return ClassVerdict(True, min(phi.margin, float(gaps[i])), details={"grid_size": int(g.size)})


def check_midpoint_convexity(g: Callable, grid: Sequence[float], tol: float = 1e-9) -> ClassVerdict:
    """g((s+t)/2) <= (g(s)+g(t))/2 over all grid pairs, for any vectorized callable."""
    pts = np.sort(np.asarray(grid, dtype=float).ravel())
    if pts.size == 0:
        raise PreconditionError("empty grid")
    s, t = np.meshgrid(pts, pts, indexing="ij")
    lhs = np.asarray(g(0.5 * (s + t)), dtype=float)
    rhs = 0.5 * (np.asarray(g(s), dtype=float) + np.asarray(g(t), dtype=float))
    scale = np.maximum(1.0, np.abs(rhs))
    gap = (rhs - lhs) / scale
    worst = np.unravel_index(int(np.argmin(gap)), gap.shape)
    margin = float(gap[worst])
    if margin < -tol:
        return ClassVerdict(False, margin, witness={"points": [s[worst], t[worst]],
                                                    "lhs": lhs[worst], "rhs": rhs[worst]})
    return ClassVerdict(True, margin)


def even_odd_split(f: ScalarFunction) -> tuple[ScalarFunction, ScalarFunction]:
    """Even and odd parts (f(x) +- f(-x)) / 2."""
    zero = PowerSeries((0.0,), f.alpha)
    if isinstance(f, AbsPower):
        return f, zero
    if isinstance(f, SignedPower):
        return zero, f
    r = Reflected(f)
    return Scaled(0.5, Sum((f, r))), Scaled(0.5, Sum((f, Scaled(-1.0, r))))


def monomial(k: int) -> PowerSeries:
    """x^k as a power series."""
    return PowerSeries(tuple([0.0] * k + [1.0]))
