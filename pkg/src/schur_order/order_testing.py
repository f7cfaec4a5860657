"""Randomized testing of entrywise positivity, monotonicity and convexity.

Every trial draws from its own generator ``default_rng([seed, trial])`` so a
verdict depends only on the configuration, never on the order in which trials
run.  A passing verdict is evidence over the sampled instances, not a proof.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Mapping

import numpy as np

from .entrywise import apply_entrywise
from .errors import DomainError, PreconditionError
from .linalg import PSD_TOL, _frozen, as_symmetric, eigvals, is_psd, sym_eig
from .scalarfn import WORKING_BOX, ScalarFunction
from .verdicts import ClassVerdict, SClass

HEADROOM = 0.95
SCALE_RANGE = (1e-3, 1.0)
INCREMENT_SHAPES = ("full", "rank_one", "zero")


@dataclass(frozen=True)
class TrialConfig:
    n: int
    alpha: float = math.inf
    trials: int = 500
    seed: int = 0
    psd_tol: float = PSD_TOL
    check_tol: float = 1e-8
    lambdas: tuple = (0.25, 0.5, 0.75)
    weights: tuple = (0.6, 0.3, 0.1)
    headroom: float = HEADROOM
    box: float = WORKING_BOX

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        object.__setattr__(self, "weights", tuple(float(x) for x in self.weights))
        object.__setattr__(self, "alpha", float(self.alpha))
        if int(self.n) != self.n or self.n < 1:
            raise PreconditionError(f"n must be a positive integer, got {self.n}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise PreconditionError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2 ** 64:
            raise PreconditionError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if not (self.psd_tol > 0 and self.check_tol > 0):
            raise PreconditionError("tolerances must be positive")
        if not self.alpha > 0:
            raise PreconditionError(f"alpha must be positive, got {self.alpha}")
        if not all(0 <= x <= 1 for x in self.lambdas):
            raise PreconditionError(f"lambdas must lie in [0, 1], got {self.lambdas}")
        if len(self.weights) != 3 or min(self.weights) < 0 or sum(self.weights) <= 0:
            raise PreconditionError(f"weights must be three nonnegative numbers, got {self.weights}")
        if not 0 < self.headroom < 1:
            raise PreconditionError(f"headroom must lie in (0, 1), got {self.headroom}")

    @classmethod
    def from_mapping(cls, data: Mapping, **overrides) -> "TrialConfig":
        """Build from a config mapping; unknown keys are rejected."""
        known = {f.name for f in fields(cls)}
        merged = {**dict(data), **{k: v for k, v in overrides.items() if v is not None}}
        unknown = sorted(set(merged) - known)
        if unknown:
            raise PreconditionError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**merged)

    def replace(self, **changes) -> "TrialConfig":
        return TrialConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alpha"] = "inf" if math.isinf(self.alpha) else self.alpha
        return d


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


def working_alpha(alpha: float, box: float = WORKING_BOX) -> float:
    return box if math.isinf(alpha) else alpha


def _gram(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.standard_normal((rank or n, n))
    m = g.T @ g
    return 0.5 * (m + m.T)


def _rescale(m: np.ndarray, target: float) -> np.ndarray:
    top = float(np.max(np.diag(m)))
    return m if top == 0.0 else m * (target / top)


def sample_psd(n: int, alpha: float, rng: np.random.Generator,
               headroom: float = HEADROOM, box: float = WORKING_BOX) -> np.ndarray:
    """Random PSD matrix with entries in (-alpha*headroom, alpha*headroom).

    A Gram matrix G^T G of an n x n standard normal G, rescaled so that its
    largest diagonal entry is ``headroom * alpha * s`` with s log-uniform in
    [1e-3, 1].  Entries of a PSD matrix are bounded by its largest diagonal.
    """
    if n < 1 or not alpha > 0:
        raise PreconditionError(f"need n >= 1 and alpha > 0, got n={n}, alpha={alpha}")
    top = headroom * working_alpha(alpha, box)
    s = math.exp(rng.uniform(math.log(SCALE_RANGE[0]), math.log(SCALE_RANGE[1])))
    return as_symmetric(_rescale(_gram(n, rng), top * s))


def sample_psd_spectral(n: int, alpha: float, rng: np.random.Generator,
                        headroom: float = HEADROOM, box: float = WORKING_BOX) -> np.ndarray:
    """Like ``sample_psd`` but with the operator norm (not the largest diagonal)
    equal to ``headroom * alpha * s``, for inequalities that need ||A|| < alpha."""
    if n < 1 or not alpha > 0:
        raise PreconditionError(f"need n >= 1 and alpha > 0, got n={n}, alpha={alpha}")
    top = headroom * working_alpha(alpha, box)
    s = math.exp(rng.uniform(math.log(SCALE_RANGE[0]), math.log(SCALE_RANGE[1])))
    m = _gram(n, rng)
    return as_symmetric(m * (top * s / float(eigvals(m)[0])))


@dataclass(frozen=True)
class PsdPair:
    """A >= B >= 0 with entries inside (-alpha, alpha), with recorded certificates."""

    A: np.ndarray
    B: np.ndarray
    alpha: float
    shape: str = "full"
    min_eig_B: float = field(default=0.0)
    min_eig_diff: float = field(default=0.0)

    def check(self, tol: float = PSD_TOL) -> bool:
        """Re-verify the invariants from scratch."""
        okb = is_psd(self.B, tol)[0]
        okd = is_psd(np.asarray(self.A) - np.asarray(self.B), tol)[0]
        bound = max(float(np.max(np.abs(self.A))), float(np.max(np.abs(self.B))))
        return okb and okd and bound < self.alpha


def sample_psd_pair(n: int, alpha: float, rng: np.random.Generator,
                    weights=(0.6, 0.3, 0.1), headroom: float = HEADROOM,
                    box: float = WORKING_BOX, bound: str = "entries") -> PsdPair:
    """B = u * Gram, A = B + P with P full-rank Gram, rank one, or zero.

    The pair is then rescaled jointly so A's largest diagonal entry is
    ``headroom * alpha * s`` (s log-uniform as in ``sample_psd``).  With
    ``bound="spectral"`` the operator norm of A is scaled instead, which
    also bounds ||B|| since A >= B >= 0.
    """
    if bound not in ("entries", "spectral"):
        raise PreconditionError(f"bound must be 'entries' or 'spectral', got {bound!r}")
    if n < 1 or not alpha > 0:
        raise PreconditionError(f"need n >= 1 and alpha > 0, got n={n}, alpha={alpha}")
    w = np.asarray(weights, dtype=float)
    shape = INCREMENT_SHAPES[int(rng.choice(3, p=w / w.sum()))]
    b = _gram(n, rng) * rng.uniform(0.05, 1.0)
    if shape == "full":
        p = _gram(n, rng) * rng.uniform(0.05, 1.0)
    elif shape == "rank_one":
        p = _gram(n, rng, rank=1) * rng.uniform(0.05, 1.0)
    else:
        p = np.zeros((n, n))
    a = b + p
    top = headroom * working_alpha(alpha, box)
    s = math.exp(rng.uniform(math.log(SCALE_RANGE[0]), math.log(SCALE_RANGE[1])))
    size = float(np.max(np.diag(a))) if bound == "entries" else float(eigvals(0.5 * (a + a.T))[0])
    k = top * s / size
    a, b, p = a * k, b * k, p * k
    # A is formed as B + P after scaling so that A - B is exactly the PSD increment
    a = b + p
    A = as_symmetric(a)
    B = as_symmetric(b)
    return PsdPair(A, B, float(alpha), shape, float(eigvals(B)[-1]), float(eigvals(A - B)[-1]))


def chain_decompose(A, B, tol: float = PSD_TOL) -> list[np.ndarray]:
    """A = A_0 >= A_1 >= ... >= A_n = B with rank-one (or zero) steps.

    A_k = B + Q diag(0,..,0, lam_{k+1},..,lam_n) Q^T where lam are the
    decreasing eigenvalues of A - B.  The endpoints are returned exactly.
    """
    a = as_symmetric(A)
    b = as_symmetric(B)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    ok, lo = is_psd(a - b, tol)
    if not ok:
        raise PreconditionError(f"A - B is not positive semidefinite (min eigenvalue {lo:.3e})")
    lam, q = sym_eig(a - b)
    n = a.shape[0]
    chain = [a]
    for k in range(1, n):
        tail = np.where(np.arange(n) >= k, lam, 0.0)
        m = b + (q * tail) @ q.T
        chain.append(as_symmetric(0.5 * (m + m.T)))
    chain.append(b)
    return chain


def _psd_margin(M: np.ndarray, scale: float) -> tuple[float, float]:
    lo = float(eigvals(M)[-1])
    return lo, lo / scale


def _opnorm(M) -> float:
    w = eigvals(M)
    return float(max(abs(w[0]), abs(w[-1])))


def _effective_alpha(f: ScalarFunction, cfg: TrialConfig) -> float:
    return min(cfg.alpha, f.alpha)


def _check_trial(f: ScalarFunction, cls: SClass, pair: PsdPair, cfg: TrialConfig):
    """Return (normalized margin, witness fields) for one sampled pair."""
    A, B = pair.A, pair.B
    fA = apply_entrywise(f, A)
    if cls is SClass.POS:
        worst = None
        for name, M in (("A", A), ("B", B)):
            fm = fA if name == "A" else apply_entrywise(f, B)
            scale = max(1.0, _opnorm(fm))
            lo, margin = _psd_margin(fm, scale)
            if worst is None or margin < worst[0]:
                worst = (margin, {"matrix": M, "image": fm, "min_eig": lo})
        return worst
    fB = apply_entrywise(f, B)
    if cls is SClass.MONO:
        scale = max(1.0, _opnorm(fA), _opnorm(fB))
        lo, margin = _psd_margin(fA - fB, scale)
        return margin, {"A": A, "B": B, "min_eig": lo}
    worst = None
    for lam in cfg.lambdas:
        mix = as_symmetric(lam * A + (1 - lam) * B)
        fmix = apply_entrywise(f, mix)
        rhs = lam * fA + (1 - lam) * fB
        scale = max(1.0, _opnorm(fA), _opnorm(fB), _opnorm(fmix))
        lo, margin = _psd_margin(rhs - fmix, scale)
        if worst is None or margin < worst[0]:
            worst = (margin, {"A": A, "B": B, "lambda": lam, "min_eig": lo})
    return worst


def test_class(f: ScalarFunction, cls, cfg: TrialConfig) -> ClassVerdict:
    """Randomized test of class membership of order ``cfg.n``.

    S-pos checks f[M] >= 0; S-mono checks f[A] >= f[B]; S-conv checks
    f[lam A + (1-lam) B] <= lam f[A] + (1-lam) f[B] for each configured lam.
    The normalized margin is min eigenvalue / max(1, operator norms involved);
    a trial fails when it drops below ``-cfg.check_tol``.  Stops at the first
    failing trial.
    """
    cls = SClass.parse(cls)
    alpha = _effective_alpha(f, cfg)
    worst = math.inf
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        pair = sample_psd_pair(cfg.n, alpha, rng, cfg.weights, cfg.headroom, cfg.box)
        try:
            margin, wit = _check_trial(f, cls, pair, cfg)
        except DomainError as exc:
            raise RuntimeError(f"sampler produced an out-of-domain instance: {exc}") from exc
        worst = min(worst, margin)
        if margin < -cfg.check_tol:
            wit = {"trial": trial, "shape": pair.shape, "margin": margin, **wit}
            return ClassVerdict(False, margin, witness=wit,
                                details=_details(f, cls, cfg, trial + 1))
    return ClassVerdict(True, worst, details=_details(f, cls, cfg, cfg.trials))


test_class.__test__ = False  # not a pytest test despite the name


def _details(f, cls, cfg, ran) -> dict:
    return {"fn": f.describe(), "class": cls.value, "n": cfg.n, "seed": cfg.seed,
            "trials_run": ran, "weights": list(cfg.weights), "lambdas": list(cfg.lambdas)}


def cross_check_derivative_relation(f: ScalarFunction, cfg: TrialConfig,
                                    relation: str = "conv-mono") -> ClassVerdict:
    """Compare the verdict for f with the verdict for f' under the same seed.

    ``relation`` is ``"conv-mono"`` (f S-conv vs f' S-mono, any n >= 2) or
    ``"mono-pos"`` (f S-mono vs f' S-pos, n >= 3).  The two memberships are
    equivalent, so ``holds`` reports whether the testers agree.
    """
    pairs = {"conv-mono": (SClass.CONV, SClass.MONO), "mono-pos": (SClass.MONO, SClass.POS)}
    if relation not in pairs:
        raise PreconditionError(f"unknown relation {relation!r}; expected one of {sorted(pairs)}")
    if relation == "mono-pos" and cfg.n < 3:
        raise PreconditionError("the S-mono / S-pos derivative relation needs n >= 3")
    if cfg.n < 2:
        raise PreconditionError("the derivative relations need n >= 2")
    cf, cd = pairs[relation]
    fprime = f.derivative()
    # share the domain so that both testers see the same sampled pairs
    shared = cfg.replace(alpha=min(cfg.alpha, f.alpha, fprime.alpha))
    vf = test_class(f, cf, shared)
    vd = test_class(fprime, cd, shared)
    details = {"relation": relation, "f": vf.to_dict(), "f_prime": vd.to_dict(),
               "f_prime_fn": fprime.describe()}
    margin = min(vf.margin, vd.margin)
    if vf.holds == vd.holds:
        return ClassVerdict(True, margin, details=details)
    return ClassVerdict(False, margin, witness={"f_holds": vf.holds, "f_prime_holds": vd.holds},
                        details=details)


def doubling_embedding(A, B) -> np.ndarray:
    """The block matrix [[A, B], [B, B]], PSD exactly when A >= B >= 0."""
    a = as_symmetric(A)
    b = as_symmetric(B)
    return _frozen(np.block([[a, b], [b, b]]))


def check_doubling_inclusion(f: ScalarFunction, cfg: TrialConfig) -> ClassVerdict:
    """For sampled A >= B >= 0, check the embedding is PSD, its f-image is PSD,
    and f[A] >= f[B] as the compression of that image implies.
    """
    alpha = _effective_alpha(f, cfg)
    worst = math.inf
    for trial in range(cfg.trials):
        pair = sample_psd_pair(cfg.n, alpha, trial_rng(cfg.seed, trial), cfg.weights,
                               cfg.headroom, cfg.box)
        big = doubling_embedding(pair.A, pair.B)
        ok_big, lo_big = is_psd(big, cfg.psd_tol)
        fbig = apply_entrywise(f, big)
        fA, fB = apply_entrywise(f, pair.A), apply_entrywise(f, pair.B)
        scale_img = max(1.0, _opnorm(fbig))
        scale_diff = max(1.0, _opnorm(fA), _opnorm(fB))
        m_img = _psd_margin(fbig, scale_img)[1]
        m_diff = _psd_margin(fA - fB, scale_diff)[1]
        margin = min(m_img, m_diff)
        worst = min(worst, margin)
        if not ok_big or margin < -cfg.check_tol:
            return ClassVerdict(False, margin,
                                witness={"trial": trial, "A": pair.A, "B": pair.B,
                                         "embedding_psd": ok_big, "embedding_min_eig": lo_big},
                                details={"n": cfg.n, "seed": cfg.seed})
    return ClassVerdict(True, worst, details={"n": cfg.n, "seed": cfg.seed, "trials_run": cfg.trials})
