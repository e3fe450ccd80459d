"""``certkit`` command line.

Every subcommand writes its report to stdout (or ``--output``) and a
``seed=... queries=...`` line to stderr.  Exit status: 0 on success, 1 on
usage errors, 2 when no verified certificate could be produced.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import secrets
import sys
from typing import Any, Sequence

import numpy as np

from .certify import CertifyConfig, certify, find_arbitrary_certificate, trim_certificate
from .errors import CertificationError, CertkitError
from .exact import ExactProfile
from .experiments import (
    BoundValues,
    lower_bound_formulas,
    measure_local_search_success,
    measure_random_examples_success,
    query_scaling_benchmark,
    records_to_csv,
    write_csv,
)
from .functions import BooleanOracle, FunctionSpec, build_function
from .learners import certify_from_samples, draw_uniform_samples, read_samples, write_samples


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _bits(text: str) -> list[int]:
    if not text or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"expected a 0/1 string, got {text!r}")
    return [int(c) for c in text]


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser, fmt: str) -> None:
    p.add_argument("--seed", type=int, help="RNG seed (default: $CERTKIT_SEED, else fresh entropy)")
    p.add_argument("--workers", type=int, default=1, help="estimator threads; 1 is bit-reproducible")
    p.add_argument("--format", choices=("json", "csv"), default=fmt)
    p.add_argument("--output", help="write the report here instead of stdout")


def _add_certify_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True, help="upper bound on C(f)")
    p.add_argument("--eps", type=float, help="critical-probability accuracy (default 1/(40k^3))")
    p.add_argument("--delta", type=float, help="failure probability (default 1/n^2)")
    p.add_argument("--mode", choices=("deterministic_update", "reestimate"), default="deterministic_update")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="certkit", description="Certificates for monotone Boolean functions from value queries.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="certificate for a given input, trimmed")
    p.add_argument("--spec", required=True)
    p.add_argument("--input", type=_bits, required=True)
    _add_certify_params(p)
    _add_common(p, "json")

    p = sub.add_parser("find-any", help="arbitrary certificate (coordinates all fixed to one bit)")
    p.add_argument("--spec", required=True)
    _add_certify_params(p)
    _add_common(p, "json")

    p = sub.add_parser("trim", help="remove unneeded coordinates from a certificate")
    p.add_argument("--spec", required=True)
    p.add_argument("--input", type=_bits, required=True)
    p.add_argument("--coords", type=_int_list, required=True, help="comma-separated coordinates, e.g. 1,2,5")
    _add_common(p, "json")

    p = sub.add_parser("oracle", help="exact profile of a small function")
    p.add_argument("--spec", required=True)
    p.add_argument("--p", type=float, default=0.5, help="bias for Phi and the influences")
    _add_common(p, "json")

    p = sub.add_parser("learn", help="size-k certificate from uniform random examples")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="draw --m live samples from this function")
    src.add_argument("--samples", help="read samples from a 'bits label' file")
    p.add_argument("--input", type=_bits, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, default=0, help="number of live samples (with --spec)")
    p.add_argument("--value", type=int, choices=(0, 1), help="f(x*); queried when --spec is given")
    p.add_argument("--all", action="store_true", help="report every surviving set")
    p.add_argument("--emit-samples", help="also write the drawn samples to this file")
    _add_common(p, "json")

    p = sub.add_parser("bench", help="query scaling of certify versus the trim-everything baseline")
    p.add_argument("--family", choices=("conjunction", "dictator"), default="conjunction")
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated dimensions")
    p.add_argument("--trials", type=int, default=5)
    _add_certify_params(p)
    _add_common(p, "csv")

    p = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    for name in ("n", "k", "l", "q"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    _add_common(p, "csv")

    p = sub.add_parser("adversary", help="lower-bound experiments against random hard instances")
    p.add_argument("--experiment", choices=("local-search", "random-examples"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    _add_common(p, "csv")
    return parser


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("CERTKIT_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"CERTKIT_SEED must be an integer, got {env!r}") from None
    return secrets.randbits(63)


def _load(path: str) -> BooleanOracle:
    try:
        return build_function(FunctionSpec.load(path))
    except OSError as exc:
        raise UsageError(f"cannot read spec {path}: {exc}") from exc


def _check_input(oracle: BooleanOracle, x: Sequence[int]) -> None:
    if len(x) != oracle.n:
        raise UsageError(f"--input has {len(x)} bits but the function has n={oracle.n}")


def _config(args: argparse.Namespace, seed: int) -> CertifyConfig:
    try:
        return CertifyConfig(
            k=args.k, delta=args.delta, mode=args.mode, eps_progress=args.eps, seed=seed, workers=args.workers
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _require_monotone(oracle: BooleanOracle) -> None:
    if not oracle.monotone_declared:
        raise UsageError("this subcommand needs a monotone function")


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _render(report: dict[str, Any] | list[dict[str, Any]], fmt: str, columns: Sequence[str] | None = None) -> str:
    rows = report if isinstance(report, list) else [report]
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2) + "\n"
    flat = [{k: (json.dumps(_jsonable(v)) if isinstance(v, (dict, list, tuple, np.ndarray)) else v)
             for k, v in r.items()} for r in rows]
    buf = io.StringIO()
    write_csv(flat, buf, columns or list(flat[0]))
    return buf.getvalue()


def _run(args: argparse.Namespace, seed: int) -> tuple[str, int]:
    rng = np.random.default_rng(seed)
    cmd = args.command

    if cmd == "certify":
        f = _load(args.spec)
        _require_monotone(f)
        _check_input(f, args.input)
        res = certify(f, args.input, _config(args, seed), rng)
        return _render(res.to_dict(), args.format), f.query_count

    if cmd == "find-any":
        f = _load(args.spec)
        _require_monotone(f)
        res = find_arbitrary_certificate(f, _config(args, seed), rng)
        report = {
            "coords": list(res.coords), "polarity": res.polarity, "iterations": res.iterations,
            "queries": res.queries_spent, "mode": args.mode, "seed": seed,
        }
        return _render(report, args.format), f.query_count

    if cmd == "trim":
        f = _load(args.spec)
        _require_monotone(f)
        _check_input(f, args.input)
        bad = [i for i in args.coords if not 1 <= i <= f.n]
        if bad:
            raise UsageError(f"coordinates {bad} outside [1, {f.n}]")
        cert = trim_certificate(f, args.input, args.coords)
        report = cert.to_dict()
        report.update(queries=f.query_count, seed=seed)
        return _render(report, args.format), f.query_count

    if cmd == "oracle":
        f = _load(args.spec)
        if not 0 <= args.p <= 1:
            raise UsageError("--p must lie in [0, 1]")
        prof = ExactProfile(f)
        stats = prof.certificate_stats()
        report = {"n": prof.n, "monotone": prof.is_monotone, "constant": prof.is_constant, **stats}
        report["p_critical"] = (
            prof.critical_probability() if prof.is_monotone and not prof.is_constant else None
        )
        report["p"] = args.p
        report["phi"] = prof.phi(args.p)
        report["flip_influences"] = prof.flip_influences(args.p)
        report["rerandomized_influences"] = prof.rerandomized_influences(args.p)
        return _render(report, args.format), f.query_count

    if cmd == "learn":
        n = len(args.input)
        queries = 0
        if args.spec:
            f = _load(args.spec)
            _check_input(f, args.input)
            value = f.evaluate(args.input) if args.value is None else args.value
            samples = draw_uniform_samples(f, args.m, rng)
            queries = f.query_count
        else:
            if args.value is None:
                raise UsageError("--value is required with --samples")
            value = args.value
            samples = read_samples(args.samples)
            if samples and len(samples[0].x) != n:
                raise UsageError(f"samples have n={len(samples[0].x)} but --input has {n} bits")
        if args.emit_samples:
            write_samples(samples, args.emit_samples)
        found = certify_from_samples(samples, args.input, value, args.k, mode="all" if args.all else "first")
        report = {"k": args.k, "m": len(samples), "value": value, "seed": seed, "queries": queries}
        if args.all:
            report["survivors"] = [list(s) for s in found]
        else:
            report["coords"] = None if found is None else list(found)
        return _render(report, args.format), queries

    if cmd == "bench":
        config = _config(args, seed)
        recs = query_scaling_benchmark(args.family, args.k, args.n, args.trials, config, rng)
        for r in recs:
            r.seed = seed
        if args.format == "csv":
            return records_to_csv(recs), sum(int(r.mean_queries * r.trials) for r in recs)
        return _render([r.to_dict() for r in recs], "json"), sum(int(r.mean_queries * r.trials) for r in recs)

    if cmd == "bounds":
        vals = lower_bound_formulas(args.n, args.k, args.l, args.q, args.m)
        return _render(vals.to_dict(), args.format, BoundValues.COLUMNS), 0

    if cmd == "adversary":
        if args.experiment == "local-search":
            rec = measure_local_search_success(args.n, args.q, args.l, args.trials, rng)
        else:
            rec = measure_random_examples_success(args.n, args.k, args.m, args.trials, rng)
        rec.seed = seed
        spent = int(round(rec.mean_queries * rec.trials))
        if args.format == "csv":
            return records_to_csv([rec]), spent
        return _render(rec.to_dict(), "json"), spent

    raise UsageError(f"unknown subcommand {cmd!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed = resolve_seed(args.seed)
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be at least 1")
        text, queries = _run(args, seed)
    except UsageError as exc:
        print(f"certkit: error: {exc}", file=sys.stderr)
        return 1
    except CertificationError as exc:
        print(f"certkit: certification failed: {exc}", file=sys.stderr)
        return 2
    except (CertkitError, ValueError) as exc:
        print(f"certkit: error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"seed={seed} queries={queries}", file=sys.stderr)
    return 0


def run_cli(argv: Sequence[str] | None = None) -> int:
    """Entry point that returns the exit status instead of raising ``SystemExit``."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
