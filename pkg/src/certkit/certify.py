"""Certificate search for monotone functions.

``find_arbitrary_certificate`` walks the critical probability towards 0 or 1
by fixing the most influential coordinate; ``find_input_certificate`` repeats
that on restrictions by ``x*`` until ``f`` is constant; ``trim_certificate``
removes coordinates that are not needed; ``certify`` chains the three.

Termination is always decided by the exact constancy test for monotone
functions, so a returned certificate is valid whatever the estimators did;
estimation quality only affects the size and the number of iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .errors import CertificationError, IterationCapExceeded, VerificationFailed
from .functions import (
    BooleanOracle,
    Certificate,
    _require_monotone,
    test_constant_monotone,
    verify_certificate,
)
from .pbias import estimate_influences, find_critical_probability

MODES = ("reestimate", "deterministic_update")


def default_eps(k: int) -> float:
    return 1.0 / (40 * k**3)


def default_delta(n: int) -> float:
    return 1.0 / max(n, 2) ** 2


@dataclass(frozen=True)
class CertifyConfig:
    """Parameters of the certification pipeline.

    ``eps_progress`` is the critical-probability accuracy (and, in
    ``deterministic_update`` mode, the per-iteration step); influences are
    estimated to ``k * eps_progress``.  ``None`` for ``delta`` means
    ``1/n^2`` for the oracle at hand.
    """

    k: int
    delta: float | None = None
    mode: str = "deterministic_update"
    eps_progress: float | None = None
    seed: int | None = None
    workers: int = 1
    max_iterations: int | None = None
    max_rounds: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        eps = self.eps
        if not 0 < eps < 1:
            raise ValueError(f"eps_progress must lie in (0, 1), got {eps}")
        if self.mode == "deterministic_update" and eps > default_eps(self.k) * (1 + 1e-12):
            raise ValueError(
                f"deterministic_update needs eps_progress <= 1/(40k^3) = {default_eps(self.k):.3g}, got {eps}"
            )

    @property
    def eps(self) -> float:
        return default_eps(self.k) if self.eps_progress is None else float(self.eps_progress)

    def delta_for(self, n: int) -> float:
        return default_delta(n) if self.delta is None else self.delta

    @property
    def iteration_cap(self) -> int:
        return self.max_iterations if self.max_iterations is not None else 200 * self.k**3

    @property
    def round_cap(self) -> int:
        return self.max_rounds if self.max_rounds is not None else 10 * self.k


@dataclass
class ArbitraryCertResult:
    """Fixing every coordinate of ``coords`` to ``polarity`` makes ``f`` constant ``polarity``.

    ``trace`` holds ``(coordinate, bias used for the influences, critical
    probability estimate or None)`` per iteration.
    """

    coords: tuple[int, ...]
    polarity: int
    iterations: int
    queries_spent: int
    trace: list[tuple[int, float, float | None]] = field(default_factory=list)

    @property
    def assignments(self) -> dict[int, int]:
        return {i: self.polarity for i in self.coords}


def _iteration_bound(eps: float, free: int) -> int:
    return max(1, min(math.ceil(1 / (2 * eps)) + 1, free))


def find_arbitrary_certificate(
    oracle: BooleanOracle,
    config: CertifyConfig,
    rng: np.random.Generator,
    delta: float | None = None,
) -> ArbitraryCertResult:
    """Find a set of coordinates whose fixing to one bit makes ``f`` constant.

    The polarity is set by the first critical-probability estimate (``0`` if
    it is at least one half) and kept for the whole run.  ``delta`` overrides
    the config's failure probability for this call.
    """
    _require_monotone(oracle)
    start = oracle.query_count
    f = oracle
    const = test_constant_monotone(f)
    if const is not None:
        return ArbitraryCertResult((), const, 0, oracle.query_count - start)

    k, eps = config.k, config.eps
    delta = config.delta_for(oracle.n) if delta is None else delta
    bound = _iteration_bound(eps, len(f.free_coords()))
    per_delta = delta / (2 * bound) if config.mode == "reestimate" else delta / (bound + 1)

    coords: list[int] = []
    trace: list[tuple[int, float, float | None]] = []
    polarity: int | None = None
    first_estimate = 0.0
    for t in range(1, config.iteration_cap + 1):
        estimate = None
        if config.mode == "reestimate" or t == 1:
            estimate = find_critical_probability(f, k, eps, per_delta, rng, config.workers)
        if polarity is None:
            first_estimate = estimate
            polarity = 0 if estimate >= 0.5 else 1
        if config.mode == "reestimate":
            bias = estimate
        elif polarity == 0:
            bias = first_estimate - eps + (t - 1) * eps
        else:
            bias = first_estimate + eps - (t - 1) * eps
        bias = min(1.0, max(0.0, bias))

        free = f.free_coords()
        infl = estimate_influences(f, bias, k * eps, per_delta, rng, coords=free, workers=config.workers)
        i = infl.argmax(free)
        coords.append(i)
        trace.append((i, bias, estimate))
        f = f.restrict({i: polarity})
        const = test_constant_monotone(f)
        if const is not None:
            if const != polarity:
                raise CertificationError(f"restriction to {polarity} became constant {const}; oracle is not monotone")
            return ArbitraryCertResult(tuple(coords), polarity, t, oracle.query_count - start, trace)
    raise IterationCapExceeded(
        f"no certificate after {config.iteration_cap} iterations (k={k} may be below C(f))"
    )


def _check_input(oracle: BooleanOracle, x_star: Sequence[int]) -> np.ndarray:
    x = np.asarray(x_star, dtype=np.int64).reshape(-1)
    if x.shape[0] != oracle.n:
        raise ValueError(f"input has length {x.shape[0]}, expected {oracle.n}")
    if ((x != 0) & (x != 1)).any():
        raise ValueError("inputs must be 0/1")
    return x.astype(np.uint8)


@dataclass
class _InputSearch:
    certificate: Certificate
    rounds: int
    iterations: int


def _input_search(
    oracle: BooleanOracle, x_star: Sequence[int], config: CertifyConfig, rng: np.random.Generator
) -> _InputSearch:
    _require_monotone(oracle)
    x = _check_input(oracle, x_star)
    value = oracle.evaluate(x)
    sub_delta = config.delta_for(oracle.n) / (2 * config.k)

    f = oracle
    chosen: list[int] = []
    rounds = iterations = 0
    while (const := test_constant_monotone(f)) is None:
        if rounds >= config.round_cap:
            raise IterationCapExceeded(f"input certificate not found within {config.round_cap} rounds")
        res = find_arbitrary_certificate(f, config, rng, delta=sub_delta)
        rounds += 1
        iterations += res.iterations
        chosen.extend(res.coords)
        f = f.restrict({i: int(x[i - 1]) for i in res.coords})
    if const != value:
        raise CertificationError("restriction by x* is constant but disagrees with f(x*); oracle is not monotone")
    return _InputSearch(Certificate.from_input(x, chosen, value), rounds, iterations)


def find_input_certificate(
    oracle: BooleanOracle, x_star: Sequence[int], config: CertifyConfig, rng: np.random.Generator
) -> Certificate:
    """Certificate for ``x_star`` built from repeated arbitrary certificates.

    Each round finds an arbitrary certificate of the current restriction and
    then fixes its coordinates to their values in ``x_star``.  Spends one extra
    query on ``f(x_star)``.
    """
    return _input_search(oracle, x_star, config, rng).certificate


def trim_certificate(
    oracle: BooleanOracle, x_star: Sequence[int], coords: Sequence[int], value: int | None = None
) -> Certificate:
    """Drop every coordinate of ``coords`` that the certificate does not need.

    Keeps the extremal point ``z`` (``x*`` on the set, the non-claimed bit
    elsewhere) and, in ascending order, tries moving each coordinate of ``z``
    to the non-claimed bit; the coordinate is dropped if ``f(z)`` is
    unchanged.  Coordinates where ``x*`` already holds the non-claimed bit
    are dropped without a query.  Every surviving coordinate is sensitive at
    the final ``z``.  Queries: one for ``f(x*)`` unless ``value`` is given,
    one to verify the input set, at most one per coordinate.
    """
    _require_monotone(oracle)
    x = _check_input(oracle, x_star)
    if value is None:
        value = oracle.evaluate(x)
    cert = Certificate.from_input(x, coords, value)
    if not verify_certificate(oracle, cert):
        raise CertificationError("the input set is not a certificate for x*")

    other = 1 - value
    z = cert.extremal_point(oracle.n)
    kept = []
    for i in cert.coords:
        if z[i - 1] == other:
            continue
        z[i - 1] = other
        if oracle.evaluate(z) == value:
            continue
        z[i - 1] = 1 - other
        kept.append(i)
    return Certificate.from_input(x, kept, value)


@dataclass
class CertifyResult:
    certificate: Certificate
    queries: int
    iterations: int
    rounds: int
    untrimmed: Certificate
    trim_queries: int
    mode: str
    seed: int | None

    @property
    def untrimmed_size(self) -> int:
        return self.untrimmed.size

    def to_dict(self) -> dict[str, Any]:
        d = self.certificate.to_dict()
        d.update(
            queries=self.queries,
            iterations=self.iterations,
            rounds=self.rounds,
            untrimmed_size=self.untrimmed_size,
            trim_queries=self.trim_queries,
            mode=self.mode,
            seed=self.seed,
        )
        return d


def certify(
    oracle: BooleanOracle,
    x_star: Sequence[int],
    config: CertifyConfig,
    rng: np.random.Generator | None = None,
) -> CertifyResult:
    """Input certificate followed by trimming and a final one-query check.

    Raises :class:`VerificationFailed` if the final check fails.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    start = oracle.query_count
    search = _input_search(oracle, x_star, config, rng)
    found = search.certificate
    before_trim = oracle.query_count
    cert = trim_certificate(oracle, x_star, found.coords, found.claimed_value)
    trim_queries = oracle.query_count - before_trim
    if not verify_certificate(oracle, cert):
        raise VerificationFailed(f"trimmed certificate {cert.to_dict()} failed verification")
    return CertifyResult(
        certificate=cert,
        queries=oracle.query_count - start,
        iterations=search.iterations,
        rounds=search.rounds,
        untrimmed=found,
        trim_queries=trim_queries,
        mode=config.mode,
        seed=config.seed,
    )


def certify_unknown_k(
    oracle: BooleanOracle,
    x_star: Sequence[int],
    config: CertifyConfig,
    rng: np.random.Generator | None = None,
) -> CertifyResult:
    """Run :func:`certify` with ``k = 1, 2, 4, ...`` (capped at ``n``).

    Stops at the first ``k`` whose run finishes and whose trimmed size is at
    most ``k``; a config without an explicit ``eps_progress`` uses the default
    step for each ``k``.  Queries from failed attempts are included.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    start = oracle.query_count
    k = 1
    last: CertifyResult | None = None
    while True:
        attempt = replace(config, k=k)
        try:
            last = certify(oracle, x_star, attempt, rng)
        except IterationCapExceeded:
            last = None
        if last is not None and (last.certificate.size <= k or k >= oracle.n):
            last.queries = oracle.query_count - start
            return last
        if k >= oracle.n:
            raise IterationCapExceeded(f"no certificate found up to k = n = {oracle.n}")
        k = min(2 * k, oracle.n)
