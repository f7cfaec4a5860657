"""Command-line front end: ``schur-order classify | verify | counterexample | replay``.

Every run emits one JSON report (to ``--out`` or standard output) and a short
human summary on standard error.  Reports are deterministic for a given seed
and configuration: keys are sorted and timings are omitted unless
``--timing`` is passed.

Exit codes: 0 ran clean, 1 violation under a hypothesis that is certified,
known or asserted with ``--assume-valid``, 2 usage or configuration error,
3 inconclusive search.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .counterexamples import (affinity_witness, fixed_counterexamples, load_witnesses,
                              midpoint_convexity_witness, power_sharpness_witness, save_witnesses)
from .dsl import parse_fn_spec
from .errors import FnSpecError, SchurOrderError, SearchFailure
from .linalg import read_matrix_csv
from .majorization import VERIFIERS
from .order_testing import TrialConfig, sample_psd_pair, sample_psd_spectral, test_class, trial_rng
from .scalarfn import AbsPower, Scaled, ScalarFunction, SignedPower, certify_class_by_coeffs
from .verdicts import SClass, jsonable

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
SEED_ENV = "SCHUR_ORDER_SEED"
CONFIG_KEYS = ("alpha", "trials", "seed", "psd_tol", "check_tol", "lambdas", "weights", "headroom", "box")


class UsageError(SchurOrderError):
    """Bad command line or configuration (exit 2)."""


# -- hypotheses --------------------------------------------------------------

# class required of f (or of f') by each verifier
HYPOTHESES = {
    "thm61": ("f", SClass.MONO, None),
    "thm63": ("f", SClass.CONV, 1),
    "prop65": ("f'", SClass.CONV, 2),
    "prop66": ("f", SClass.MONO, None),
    "prop67": ("f", SClass.CONV, None),
}


def _power_parts(f: ScalarFunction):
    """The exponent p when f = c * phi_p or c * psi_p with c > 0, else None."""
    c = 1.0
    while isinstance(f, Scaled):
        c *= f.c
        f = f.inner
    if isinstance(f, (AbsPower, SignedPower)) and c > 0:
        return f.p
    return None


def _power_threshold(cls: SClass, n: int) -> float:
    return {SClass.POS: n - 2, SClass.MONO: n - 1, SClass.CONV: n}[cls]


def class_status(f: ScalarFunction, cls: SClass, n: int) -> tuple[str, str]:
    """How much is known about f belonging to the class of order n.

    Returns (status, reason) with status one of certified, known, refuted, unknown.
    """
    if f.is_analytic:
        v = certify_class_by_coeffs(f, cls)
        if v.holds:
            return "certified", "nonnegative Taylor coefficients"
        return "refuted", f"Taylor coefficient {v.witness['k']} is {v.witness['coefficient']!r}"
    p = _power_parts(f)
    if p is not None:
        need = _power_threshold(cls, n)
        if p >= need:
            return "known", f"power exponent {p} >= {need}"
        if not float(p).is_integer() and p > 0 and (cls is not SClass.POS or n >= 3):
            return "refuted", f"non-integer power exponent {p} < {need}"
    return "unknown", "no certificate available"


def hypothesis_status(theorem: str, f: ScalarFunction, n: int) -> tuple[str, str]:
    """Status of the class hypothesis a verifier relies on, for order n."""
    which, cls, dorder = HYPOTHESES[theorem]
    target = f.derivative() if which == "f'" else f
    status, reason = class_status(target, cls, n)
    reason = f"{which} in {cls.value}({n}): {reason}"
    if status not in ("certified", "known"):
        return status, reason
    if n < 3 and theorem == "prop67":
        return "unknown", f"needs n >= 3; {reason}"
    if n < 3 and theorem == "prop66" and not f.is_analytic:
        return "unknown", f"n = 2 also needs a continuous derivative; {reason}"
    if dorder is not None:
        try:
            d = f.deriv(0.0, dorder)
        except SchurOrderError:
            return "unknown", f"derivative of order {dorder} at 0 unavailable"
        if d < 0:
            return "refuted", f"derivative of order {dorder} at 0 is {d!r} < 0"
    return status, reason


# -- report plumbing ---------------------------------------------------------

def config_hash(payload: dict) -> str:
    text = json.dumps(jsonable(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


class Report:
    def __init__(self, command: str, argv: list[str], seed: int, config: dict, timing: bool):
        self.command = command
        self.argv = argv
        self.seed = seed
        self.config = config
        self.hash = config_hash({"command": command, "seed": seed, **config})
        self.timing = timing
        self.records: list[dict] = []

    def add(self, module: str, check: str, holds, runtime: float | None = None, **fields) -> dict:
        rec = {"module": module, "check": check, "holds": holds, "seed": self.seed,
               "config_hash": self.hash,
               "runtime_ms": round(runtime * 1e3, 3) if (self.timing and runtime is not None) else None,
               **fields}
        self.records.append(jsonable(rec))
        return rec

    def to_dict(self, exit_code: int) -> dict:
        holds = [r["holds"] for r in self.records]
        return {
            "tool": "schur-order",
            "tool_version": __version__,
            "command": self.command,
            "argv": self.argv,
            "seed": self.seed,
            "config": jsonable(self.config),
            "config_hash": self.hash,
            "records": self.records,
            "summary": {"records": len(holds), "holds": sum(h is True for h in holds),
                        "violations": sum(h is False for h in holds),
                        "undetermined": sum(h is None for h in holds)},
            "exit_code": exit_code,
        }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True) + "\n"


# -- argument parsing ----------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d, help="64-bit seed (env SCHUR_ORDER_SEED overrides)")
    parser.add_argument("--tol", type=float, default=d, help="check tolerance (default 1e-8)")
    parser.add_argument("--trials", type=int, default=d, help="randomized trials per check")
    parser.add_argument("--config", default=d, help="TOML key = value file with trial settings")
    parser.add_argument("--out", default=d, help="write the JSON report here instead of stdout")
    parser.add_argument("--timing", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="record runtime_ms (makes reports non-reproducible byte for byte)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schur-order",
                                     description="Entrywise matrix functions under the PSD order.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    p = sub.add_parser("classify", parents=[common], help="test all three classes for a function")
    p.add_argument("--fn", required=True, help="function text, e.g. phi:1.5 or exp")
    p.add_argument("--n", required=True, action="append", help="order(s); repeat or comma-separate")

    p = sub.add_parser("verify", parents=[common], help="check a majorization inequality")
    p.add_argument("theorem", choices=sorted(VERIFIERS))
    p.add_argument("--fn", required=True)
    p.add_argument("--A", dest="A", help="matrix CSV file")
    p.add_argument("--B", dest="B", help="matrix CSV file (pair inequalities)")
    p.add_argument("--sample", help="sampled instances, e.g. n=3,trials=50")
    p.add_argument("--assume-valid", action="store_true",
                   help="treat the hypothesis as valid even without a certificate")

    p = sub.add_parser("counterexample", parents=[common], help="construct a witness")
    p.add_argument("kind", choices=["lemma52", "fh", "remark64", "prop12"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--class", dest="cls", default="spos")
    p.add_argument("--fn")
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--witness-out", default="witness.json", help="witness JSON file (default witness.json)")

    p = sub.add_parser("replay", parents=[common], help="re-run a report or re-validate a witness file")
    p.add_argument("file")
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise UsageError(f"{path}: unknown config keys {', '.join(unknown)}")
    if isinstance(data.get("alpha"), str):
        data["alpha"] = float(data["alpha"])
    return data


def _settings(args, env_seed: str | None) -> dict:
    cfg = _load_config(getattr(args, "config", None))
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if env_seed is not None:
        try:
            cfg["seed"] = int(env_seed)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from None
    if getattr(args, "trials", None) is not None:
        cfg["trials"] = args.trials
    if getattr(args, "tol", None) is not None:
        cfg["check_tol"] = args.tol
    cfg.setdefault("seed", 0)
    return cfg


def _trial_config(settings: dict, n: int, **extra) -> TrialConfig:
    try:
        return TrialConfig.from_mapping({**settings, **extra}, n=n)
    except SchurOrderError as exc:
        raise UsageError(str(exc)) from None
    except TypeError as exc:
        raise UsageError(f"bad config value: {exc}") from None


def _parse_fn(text: str) -> ScalarFunction:
    try:
        return parse_fn_spec(text)
    except FnSpecError as exc:
        raise UsageError(f"cannot parse function: {exc}") from None


def _parse_orders(values) -> list[int]:
    out = []
    for v in values:
        for part in str(v).split(","):
            try:
                n = int(part)
            except ValueError:
                raise UsageError(f"bad order {part!r}") from None
            if n < 1:
                raise UsageError(f"order must be >= 1, got {n}")
            out.append(n)
    return out


def _parse_sample(text: str) -> dict:
    out = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep or key not in ("n", "trials"):
            raise UsageError(f"bad --sample item {item!r}; expected n=<int> or trials=<int>")
        try:
            out[key] = int(val)
        except ValueError:
            raise UsageError(f"bad --sample value {item!r}") from None
    if "n" not in out:
        raise UsageError("--sample needs n=<int>")
    return out


# -- commands ------------------------------------------------------------------

def cmd_classify(args, settings, report: Report) -> int:
    f = _parse_fn(args.fn)
    for n in _parse_orders(args.n):
        cfg = _trial_config(settings, n)
        for cls in SClass:
            if f.is_analytic:
                t0 = time.perf_counter()
                cert = certify_class_by_coeffs(f, cls)
                report.add("scalarfn", "coefficient_certificate", cert.holds, time.perf_counter() - t0,
                           fn=f.describe(), n=n, **{"class": cls.value}, margin=cert.margin,
                           witness=cert.witness)
            t0 = time.perf_counter()
            v = test_class(f, cls, cfg)
            report.add("order-testing", "test_class", v.holds, time.perf_counter() - t0,
                       fn=f.describe(), n=n, **{"class": cls.value}, margin=v.margin,
                       witness=v.witness, trials_run=v.details["trials_run"],
                       weights=list(cfg.weights))
    return EXIT_OK


def _instances(args, settings, theorem: str, f: ScalarFunction):
    """Yield (label, A, B) for the verify command."""
    pair = theorem != "thm61"
    if args.sample:
        if args.A or args.B:
            raise UsageError("use either --sample or matrix files, not both")
        spec = _parse_sample(args.sample)
        trials = spec.get("trials", settings.get("trials", 50))
        cfg = _trial_config(settings, spec["n"], trials=trials)
        alpha = min(cfg.alpha, f.alpha)
        for i in range(cfg.trials):
            rng = trial_rng(cfg.seed, i)
            if pair:
                bound = "spectral" if theorem in ("thm63", "prop65") else "entries"
                pp = sample_psd_pair(cfg.n, alpha, rng, cfg.weights, cfg.headroom, cfg.box, bound)
                yield f"sample:{i}", pp.A, pp.B
            else:
                yield f"sample:{i}", sample_psd_spectral(cfg.n, alpha, rng, cfg.headroom, cfg.box), None
        return
    if not args.A or (pair and not args.B):
        raise UsageError("need --A" + (" and --B" if pair else "") + " or --sample")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            a = read_matrix_csv(args.A)
            b = read_matrix_csv(args.B) if pair else None
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except OSError as exc:
        raise UsageError(f"cannot read matrix file: {exc}") from None
    except SchurOrderError as exc:
        raise UsageError(str(exc)) from None
    yield "files", a, b


def cmd_verify(args, settings, report: Report) -> int:
    f = _parse_fn(args.fn)
    verifier = VERIFIERS[args.theorem]
    tol = settings.get("check_tol")
    kw = {} if tol is None else {"tol": tol}
    violated_valid = False
    for label, a, b in _instances(args, settings, args.theorem, f):
        n = a.shape[0]
        status, reason = hypothesis_status(args.theorem, f, n)
        asserted = args.assume_valid or status in ("certified", "known")
        t0 = time.perf_counter()
        try:
            out = verifier(f, a, **kw) if b is None else verifier(f, a, b, **kw)
        except SchurOrderError as exc:
            report.add("majorization", args.theorem, None, time.perf_counter() - t0, instance=label,
                       n=n, fn=f.describe(), error=str(exc), hypothesis=status)
            continue
        elapsed = time.perf_counter() - t0
        verdicts = out if isinstance(out, tuple) else (out,)
        for v in verdicts:
            rec = v.to_record()
            report.add("majorization", args.theorem, v.holds, elapsed, instance=label, n=n,
                       fn=f.describe(), part=v.name, prefix_margins=rec["prefix_margins"],
                       first_violation=v.first_violation, lhs=rec["lhs"], rhs=rec["rhs"],
                       assumptions=rec["assumptions"], hypothesis=status,
                       hypothesis_reason=reason, hypothesis_asserted=asserted)
            if not v.holds and asserted:
                violated_valid = True
    return EXIT_VIOLATION if violated_valid else EXIT_OK


def cmd_counterexample(args, settings, report: Report) -> int:
    tol = settings.get("check_tol", 1e-8)
    t0 = time.perf_counter()
    try:
        if args.kind == "lemma52":
            if args.n is None or args.p is None:
                raise UsageError("lemma52 needs --n and --p")
            witnesses = [midpoint_convexity_witness(args.n, args.p, check_tol=tol)]
        elif args.kind == "fh":
            if args.n is None or args.p is None:
                raise UsageError("fh needs --n and --p")
            try:
                cls = SClass.parse(args.cls)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            witnesses = [power_sharpness_witness(args.n, args.p, cls, check_tol=tol)]
        elif args.kind == "remark64":
            witnesses = fixed_counterexamples()
        else:
            if not args.fn:
                raise UsageError("prop12 needs --fn")
            w = affinity_witness(_parse_fn(args.fn), args.a, args.lam, tol)
            witnesses = [] if w is None else [w]
    except SearchFailure as exc:
        report.add("counterexamples", args.kind, None, time.perf_counter() - t0, error=str(exc))
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    elapsed = time.perf_counter() - t0
    save_witnesses(args.witness_out, witnesses)
    if not witnesses:
        report.add("counterexamples", args.kind, True, elapsed, witness_file=args.witness_out,
                   description="no violation in any family")
    for w in witnesses:
        ok, problems = w.validate()
        report.add("counterexamples", args.kind, w.is_control, elapsed, witness_kind=w.kind,
                   description=w.description, violated_quantity=w.violated_quantity,
                   expected_sign=w.expected_sign, is_control=w.is_control,
                   scalar_params=w.scalar_params, vector=w.vector, validated=ok,
                   problems=problems, witness_file=args.witness_out)
    return EXIT_OK


def _strip_volatile(report: dict) -> dict:
    out = dict(report)
    out["records"] = [{k: v for k, v in r.items() if k != "runtime_ms"} for r in report["records"]]
    out.pop("argv", None)
    return out


def cmd_replay(args, settings, report: Report) -> int:
    try:
        data = json.loads(Path(args.file).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {args.file}: {exc}") from None
    if "witnesses" in data:
        witnesses = load_witnesses(args.file, validate=False)
        bad = 0
        for i, w in enumerate(witnesses):
            ok, problems = w.validate()
            bad += not ok
            report.add("counterexamples", "replay_witness", ok, index=i, witness_kind=w.kind,
                       problems=problems)
        return EXIT_OK if bad == 0 else EXIT_VIOLATION
    if "argv" not in data:
        raise UsageError(f"{args.file} is neither a report nor a witness file")
    argv = _replay_argv(data["argv"], data["seed"])
    rerun, _ = run(argv, env_seed=None)
    same = dumps(_strip_volatile(rerun)) == dumps(_strip_volatile(data))
    report.add("cli", "replay_report", same, original_hash=data.get("config_hash"),
               replay_hash=rerun.get("config_hash"), records=len(data.get("records", [])))
    return EXIT_OK if same else EXIT_VIOLATION


def _replay_argv(argv: list[str], seed: int) -> list[str]:
    """Drop output-file flags and pin the recorded seed."""
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in ("--out", "--seed"):
            skip = True
            continue
        if tok.startswith(("--out=", "--seed=")):
            continue
        out.append(tok)
    return ["--seed", str(seed), *out]


COMMANDS = {"classify": cmd_classify, "verify": cmd_verify,
            "counterexample": cmd_counterexample, "replay": cmd_replay}


def execute(argv: list[str], env_seed: str | None = None):
    """Parse and run one command; returns (parsed args, report dict, exit code)."""
    args = build_parser().parse_args(argv)
    settings = _settings(args, env_seed)
    config = {k: v for k, v in settings.items() if k != "seed"}
    config.update({k: v for k, v in vars(args).items()
                   if k not in ("seed", "tol", "trials", "config", "out", "timing", "command")})
    report = Report(args.command, list(argv), int(settings["seed"]), config, bool(args.timing))
    code = COMMANDS[args.command](args, settings, report)
    return args, report.to_dict(code), code


def run(argv: list[str], env_seed: str | None = None) -> tuple[dict, int]:
    """Run one command in-process; returns (report dict, exit code)."""
    _, report, code = execute(argv, env_seed)
    return report, code


def _summary(report: dict) -> str:
    s = report["summary"]
    return (f"{report['command']}: {s['records']} records, {s['holds']} hold, "
            f"{s['violations']} violated, {s['undetermined']} undetermined; exit {report['exit_code']}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, report, code = execute(argv, env_seed=os.environ.get(SEED_ENV))
    except SystemExit as exc:  # argparse usage errors and --help
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except SchurOrderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(_summary(report), file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
