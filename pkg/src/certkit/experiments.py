"""Adversarial instances, lower-bound experiments, bound formulas and query-scaling runs."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence, TextIO

import numpy as np

from .certify import CertifyConfig, certify, trim_certificate
from .functions import BooleanOracle, FunctionSpec, build_function
from .learners import certify_from_samples, check_enumeration_budget, draw_uniform_samples, success_bound

ADVERSARY_KINDS = ("dictator", "conjunction", "subcube")
CSV_COLUMNS = (
    "experiment", "n", "k", "l", "q", "m", "trials", "successes",
    "rate", "bound", "mean_queries", "std_queries", "seed",
)


def _rng(rng: np.random.Generator | int | None) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), rng


@dataclass
class AdversaryInstance:
    """A randomly drawn hard instance together with the hidden choice behind it.

    ``hidden`` is ``{"index": i}`` (dictator), ``{"coords": [...]}``
    (conjunction) or ``{"fixed": {i: b}}`` (subcube).
    """

    kind: str
    n: int
    k: int
    hidden: dict[str, Any]
    oracle: BooleanOracle

    @property
    def spec(self) -> FunctionSpec:
        if self.kind == "dictator":
            return FunctionSpec.dictator(self.n, self.hidden["index"])
        if self.kind == "conjunction":
            return FunctionSpec.conjunction(self.n, self.hidden["coords"])
        return FunctionSpec.subcube(self.n, self.hidden["fixed"])

    def regenerate(self) -> BooleanOracle:
        """A fresh oracle rebuilt from ``hidden`` alone."""
        return build_function(self.spec)


def gen_adversary(kind: str, n: int, k: int, rng: np.random.Generator) -> AdversaryInstance:
    """Draw a uniform dictator, a uniform ``k``-variable conjunction, or a uniform subcube indicator fixing ``k`` coordinates."""
    if kind not in ADVERSARY_KINDS:
        raise ValueError(f"kind must be one of {ADVERSARY_KINDS}, got {kind!r}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if kind == "dictator":
        hidden: dict[str, Any] = {"index": int(rng.integers(1, n + 1))}
    else:
        coords = sorted(int(i) + 1 for i in rng.choice(n, size=k, replace=False))
        if kind == "conjunction":
            hidden = {"coords": coords}
        else:
            bits = rng.integers(0, 2, size=k)
            hidden = {"fixed": {i: int(b) for i, b in zip(coords, bits)}}
    inst = AdversaryInstance(kind, n, 1 if kind == "dictator" else k, hidden, None)  # type: ignore[arg-type]
    inst.oracle = inst.regenerate()
    return inst


@dataclass
class ExperimentRecord:
    experiment: str
    n: int
    k: int
    l: int
    q: int
    m: int
    trials: int
    successes: int
    mean_queries: float
    std_queries: float
    bound_value: float
    seed: int | None = None
    extra: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0 <= self.successes <= self.trials:
            raise ValueError("need 0 <= successes <= trials")
        if min(self.n, self.k, self.l, self.q, self.m) < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def std_error(self) -> float:
        """Binomial standard error of :attr:`rate`."""
        return math.sqrt(self.rate * (1 - self.rate) / self.trials) if self.trials else 0.0

    def row(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment, "n": self.n, "k": self.k, "l": self.l, "q": self.q, "m": self.m,
            "trials": self.trials, "successes": self.successes, "rate": self.rate, "bound": self.bound_value,
            "mean_queries": self.mean_queries, "std_queries": self.std_queries,
            "seed": "" if self.seed is None else self.seed,
        }

    def to_dict(self) -> dict[str, Any]:
        d = self.row()
        d.update(self.extra)
        return d


def _fmt(v: Any) -> Any:
    return f"{v:.6g}" if isinstance(v, float) else v


def write_csv(rows: Iterable[dict[str, Any]], out: TextIO, columns: Sequence[str]) -> None:
    writer = csv.DictWriter(out, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _fmt(row.get(c, "")) for c in columns})


def records_to_csv(records: Iterable[ExperimentRecord], out: TextIO | None = None) -> str:
    buf = out if out is not None else io.StringIO()
    write_csv((r.row() for r in records), buf, CSV_COLUMNS)
    return buf.getvalue() if out is None else ""


def _record(experiment: str, queries: Sequence[int], successes: int, bound: float, seed: int | None, **params: int):
    q = np.asarray(queries, dtype=float)
    return ExperimentRecord(
        experiment=experiment,
        n=params.get("n", 0), k=params.get("k", 0), l=params.get("l", 0), q=params.get("q", 0), m=params.get("m", 0),
        trials=len(queries), successes=successes,
        mean_queries=float(q.mean()) if len(q) else 0.0,
        std_queries=float(q.std()) if len(q) else 0.0,
        bound_value=bound, seed=seed,
    )


# --- local search ---------------------------------------------------------------


def local_search_trial(n: int, q: int, l: int, rng: np.random.Generator) -> tuple[bool, int]:
    """One run of the reference local search against a random dictator.

    Queries ``x* = 1^n`` and then ``q - 1`` of its Hamming neighbours in a
    random order; outputs the sensitive coordinate if one was seen, padded
    with not-yet-queried coordinates to ``l`` coordinates.  Returns
    ``(output certifies x*, queries spent)``.
    """
    inst = gen_adversary("dictator", n, 1, rng)
    f = inst.oracle
    order = [int(j) + 1 for j in rng.permutation(n)]
    probed = order[: min(q - 1, n)]
    points = np.ones((1 + len(probed), n), dtype=np.uint8)
    for row, j in enumerate(probed, start=1):
        points[row, j - 1] = 0
    values = f.evaluate_batch(points)
    sensitive = [j for j, v in zip(probed, values[1:]) if v != values[0]]
    unqueried = order[len(probed):]
    output = (sensitive + unqueried)[:l]
    return inst.hidden["index"] in output, f.query_count


def measure_local_search_success(
    n: int, q: int, l: int, trials: int, rng: np.random.Generator | int | None
) -> ExperimentRecord:
    if q < 1 or l < 1:
        raise ValueError("need q >= 1 and l >= 1")
    gen, seed = _rng(rng)
    outcomes = [local_search_trial(n, q, l, gen) for _ in range(trials)]
    wins = sum(ok for ok, _ in outcomes)
    bound = (l + q - 1) / n
    return _record("local_search", [c for _, c in outcomes], wins, bound, seed, n=n, k=1, l=l, q=q)


# --- random examples ------------------------------------------------------------


def measure_random_examples_success(
    n: int, k: int, m: int, trials: int, rng: np.random.Generator | int | None
) -> ExperimentRecord:
    """Random conjunctions of ``k`` variables, ``x* = 1^n``, ``m`` uniform examples per trial.

    A trial succeeds when the returned set contains the hidden conjunction
    (the only size-``k`` certificate of ``x*``).
    """
    check_enumeration_budget(n, k)
    gen, seed = _rng(rng)
    x_star = [1] * n
    wins, spent = 0, []
    for _ in range(trials):
        inst = gen_adversary("conjunction", n, k, gen)
        f = inst.oracle
        value = f.evaluate(x_star)
        samples = draw_uniform_samples(f, m, gen)
        found = certify_from_samples(samples, x_star, value, k, mode="first")
        wins += found is not None and set(inst.hidden["coords"]) <= set(found)
        spent.append(f.query_count)
    return _record("random_examples", spent, wins, success_bound(n, k, m), seed, n=n, k=k, m=m)


# --- closed-form bounds -----------------------------------------------------------


def _clip(v: Fraction) -> Fraction:
    return min(Fraction(1), max(Fraction(0), v))


@dataclass(frozen=True)
class BoundValues:
    """Exact values of the lower/upper bound expressions for one parameter set.

    ``local_search`` is ``(l+q-1)/n``; ``subcube_local`` is
    ``2^q C(l,k) / C(n,k)``; ``subcube_query`` is ``q 2^-k + k l / n``;
    ``random_examples`` is ``1 - (1-2^-k)^m C(n,k)``.
    """

    n: int
    k: int
    l: int
    q: int
    m: int
    local_search: Fraction
    subcube_local: Fraction
    subcube_query: Fraction
    random_examples: Fraction

    FIELDS = ("local_search", "subcube_local", "subcube_query", "random_examples")
    COLUMNS = ("n", "k", "l", "q", "m", "claim72", "claim74", "claim62", "claim61",
               "claim72_clipped", "claim74_clipped", "claim62_clipped", "claim61_clipped")

    def clipped(self, name: str) -> Fraction:
        return _clip(getattr(self, name))

    def to_dict(self) -> dict[str, Any]:
        names = dict(zip(self.FIELDS, ("claim72", "claim74", "claim62", "claim61")))
        d: dict[str, Any] = {"n": self.n, "k": self.k, "l": self.l, "q": self.q, "m": self.m}
        for f, short in names.items():
            d[short] = float(getattr(self, f))
        for f, short in names.items():
            d[short + "_clipped"] = float(self.clipped(f))
        return d


def lower_bound_formulas(n: int, k: int, l: int, q: int, m: int = 0) -> BoundValues:
    if min(n, k, l, q, m) < 0:
        raise ValueError("parameters must be nonnegative")
    if k > l or l > n:
        raise ValueError(f"need k <= l <= n, got k={k}, l={l}, n={n}")
    if n == 0:
        raise ValueError("n must be positive")
    return BoundValues(
        n, k, l, q, m,
        local_search=Fraction(l + q - 1, n),
        subcube_local=Fraction(2**q * math.comb(l, k), math.comb(n, k)),
        subcube_query=q * Fraction(1, 2**k) + Fraction(k * l, n),
        random_examples=1 - (1 - Fraction(1, 2**k)) ** m * math.comb(n, k),
    )


# --- query scaling ---------------------------------------------------------------


def query_scaling_benchmark(
    family: str,
    k: int,
    n_list: Sequence[int],
    trials: int,
    config: CertifyConfig,
    rng: np.random.Generator | int | None,
) -> list[ExperimentRecord]:
    """Queries of :func:`certify` versus the trim-everything baseline on ``x* = 1^n``.

    The baseline trims the certificate made of all ``n`` coordinates, which
    costs about ``n`` queries.  Two records per ``n``: ``certify`` and
    ``angluin``; a success is a certificate equal to the hidden variable set.
    """
    if family not in ("conjunction", "dictator"):
        raise ValueError(f"unsupported family {family!r}")
    gen, seed = _rng(rng)
    out = []
    for n in n_list:
        if n < 2 * k:
            raise ValueError(f"need n >= 2k, got n={n}, k={k}")
        x_star = [1] * n
        runs: dict[str, tuple[list[int], list[int], int]] = {"certify": ([], [], 0), "angluin": ([], [], 0)}
        for _ in range(trials):
            inst = gen_adversary(family, n, k, gen)
            truth = set(inst.hidden.get("coords", [inst.hidden.get("index")]))
            f = inst.oracle
            res = certify(f, x_star, config, gen)
            cert = res.certificate
            spent, sizes, wins = runs["certify"]
            runs["certify"] = (spent + [res.queries], sizes + [cert.size], wins + (set(cert.coords) == truth))

            g = inst.regenerate()
            base = trim_certificate(g, x_star, range(1, n + 1))
            spent, sizes, wins = runs["angluin"]
            runs["angluin"] = (spent + [g.query_count], sizes + [base.size], wins + (set(base.coords) == truth))
        for name, (spent, sizes, wins) in runs.items():
            rec = _record(name, spent, wins, float("nan"), seed, n=n, k=k)
            rec.extra["mean_size"] = float(np.mean(sizes))
            out.append(rec)
    return out
