"""p-biased sampling and the estimation subroutines of the certifier.

All randomness comes from a caller-supplied ``numpy.random.Generator``.  A
sample set draws one 63-bit seed from it and splits into fixed-size row
chunks; the bits of coordinate ``i`` in chunk ``c`` come from their own
stream ``SeedSequence(seed, spawn_key=(c, i))``.  Columns are produced only
when the oracle reads them, so an oracle that looks at three coordinates of
``{0,1}^4096`` pays for three.  Results do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

import numpy as np

from ._bits import Batch, bernoulli_words, popcount, unpack_bits
from .errors import ConstantFunctionError
from .functions import BooleanOracle, test_constant_monotone

CHUNK_ROWS = 1 << 18

T = TypeVar("T")


def check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return p


def sample_count(eps: float, delta: float) -> int:
    """Hoeffding: ``ceil(ln(2/delta) / (2 eps^2))`` samples give ``+-eps`` w.p. ``1-delta``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return max(1, math.ceil(math.log(2.0 / delta) / (2.0 * eps * eps)))


@dataclass(frozen=True)
class EstimationParams:
    eps: float
    delta: float

    def __post_init__(self) -> None:
        sample_count(self.eps, self.delta)

    @property
    def sample_count(self) -> int:
        return sample_count(self.eps, self.delta)


class PBiasedBatch(Batch):
    """One chunk of a p-biased sample set with lazily generated columns."""

    def __init__(self, n: int, p: float, rows: int, seed: int, chunk: int = 0):
        self.n = n
        self.p = p
        self.rows = rows
        self.seed = seed
        self.chunk = chunk
        self._cols: dict[int, np.ndarray] = {}

    def _generate(self, i: int) -> np.ndarray:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.chunk, i))
        return bernoulli_words(np.random.Generator(np.random.PCG64(ss)), self.p, self.rows)

    def column(self, i: int) -> np.ndarray:
        col = self._cols.get(i)
        if col is None:
            col = self._cols[i] = self._generate(i)
        return col

    def peek(self, i: int) -> np.ndarray:
        """Like :meth:`column` but does not keep a freshly generated column."""
        col = self._cols.get(i)
        return col if col is not None else self._generate(i)


def pbiased_chunks(n: int, p: float, rows: int, rng: np.random.Generator) -> list[PBiasedBatch]:
    """Split a sample set of ``rows`` p-biased inputs into lazily generated chunks."""
    p = check_probability(p)
    seed = int(rng.integers(0, 2**63))
    out = []
    for c, start in enumerate(range(0, rows, CHUNK_ROWS)):
        out.append(PBiasedBatch(n, p, min(CHUNK_ROWS, rows - start), seed, c))
    return out


def _map_chunks(fn: Callable[[PBiasedBatch], T], chunks: Sequence[PBiasedBatch], workers: int) -> list[T]:
    if workers <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def sample_pbiased(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """One draw from ``{0,1}^n_p`` as a uint8 vector (index ``i-1`` is coordinate ``i``)."""
    p = check_probability(p)
    return unpack_bits(bernoulli_words(rng, p, n), n)


def estimate_phi(
    oracle: BooleanOracle, p: float, params: EstimationParams, rng: np.random.Generator, workers: int = 1
) -> float:
    """Empirical mean of ``f`` over ``params.sample_count`` p-biased inputs."""
    m = params.sample_count
    chunks = pbiased_chunks(oracle.n, p, m, rng)
    ones = _map_chunks(lambda c: popcount(oracle.evaluate_packed(c)), chunks, workers)
    return sum(ones) / m


def half_point_plan(k: int, eps: float, delta: float) -> tuple[int, EstimationParams]:
    """Number of Phi-estimates and per-estimate parameters used by :func:`find_half_point`.

    The grid of ``ceil(3k/eps)`` intervals is refined to the next power of two
    so that binary search always makes exactly ``log2`` of that many probes.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    ratio = 3 * k / eps
    probes = max(1, math.ceil(math.log2(ratio)))
    confidence_split = math.ceil(math.log2(ratio) + 1)
    return probes, EstimationParams(eps / 3, delta / confidence_split)


def find_half_point(
    oracle: BooleanOracle,
    k: int,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    workers: int = 1,
) -> float:
    """Find ``p`` with ``Phi_f(p) = 1/2 +- eps`` w.p. ``>= 1 - delta``.

    Needs ``k >= C(f)``: ``Phi_f`` is then ``k``-Lipschitz, so every point of
    a grid cell of width ``eps/(3k)`` around the crossing has ``Phi`` within
    ``eps/3`` of one half.  Binary search over the cell endpoints with
    ``+-eps/3`` estimates, ties moving right, and the midpoint of the final
    cell is returned.
    """
    if test_constant_monotone(oracle) is not None:
        raise ConstantFunctionError("a constant function has no half point")
    probes, params = half_point_plan(k, eps, delta)
    cells = 1 << probes
    lo, hi = 0, cells
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if estimate_phi(oracle, mid / cells, params, rng, workers) <= 0.5:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / (2 * cells)


def find_critical_probability(
    oracle: BooleanOracle,
    k: int,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    workers: int = 1,
) -> float:
    """``p(f) +- eps`` w.p. ``>= 1 - delta``, via a half point at accuracy ``eps/8``.

    Near the crossing ``Phi' >= Var >= 1/4 - (eps/8)^2``, so a Phi-error of
    ``eps/8`` moves ``p`` by at most ``eps/(2 - eps^2/8) < eps``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return find_half_point(oracle, k, eps / 8, delta, rng, workers)


@dataclass
class InfluenceEstimates:
    """Rerandomized influence estimates at bias ``p``.

    ``values[i-1]`` estimates ``Inf~_{i,p}``; ``radius[i-1]`` is the Hoeffding
    half-width actually achieved for that coordinate at the per-estimate
    confidence used (it depends on the size of the sub-sample).
    """

    values: np.ndarray
    p: float
    eps: float
    radius: np.ndarray
    sample_size: int

    @property
    def n(self) -> int:
        return len(self.values)

    def flip(self) -> np.ndarray:
        """Flip-influence view ``Inf~ / (4p(1-p))``."""
        if self.p in (0.0, 1.0):
            raise ValueError("flip influence cannot be recovered at p in {0, 1}")
        return self.values / (4 * self.p * (1 - self.p))

    def argmax(self, coords: Iterable[int] | None = None) -> int:
        """Coordinate with the largest estimate, lowest index on ties."""
        cs = list(range(1, self.n + 1)) if coords is None else sorted(coords)
        if not cs:
            raise ValueError("no coordinates to choose from")
        vals = self.values[np.asarray(cs) - 1]
        return cs[int(np.argmax(vals))]


def influence_sample_size(n: int, eps: float, delta: float) -> int:
    """Shared sample size ``2 m(eps/8, delta/(n+1))`` used by :func:`estimate_influences`."""
    return 2 * sample_count(eps / 8, delta / (n + 1))


def estimate_influences(
    oracle: BooleanOracle,
    p: float,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    coords: Iterable[int] | None = None,
    workers: int = 1,
) -> InfluenceEstimates:
    """Estimate ``Inf~_{i,p}`` for every coordinate from one shared sample.

    Uses ``Inf~_i = 4(1-p)(E[f] - E[f_{x_i=0}]) = 4p(E[f_{x_i=1}] - E[f])``
    (valid for monotone ``f``): the side ``b`` holding at least half of the
    sample estimates ``E[f_{x_i=b}]`` without further queries.  Coordinates
    outside ``coords`` are reported as 0.  At ``p`` in ``{0, 1}`` every
    rerandomized influence is 0 and nothing is queried.
    """
    p = check_probability(p)
    n = oracle.n
    cs = list(range(1, n + 1)) if coords is None else sorted(set(coords))
    values = np.zeros(n)
    radius = np.zeros(n)
    if p in (0.0, 1.0):
        return InfluenceEstimates(values, p, eps, radius, 0)
    total = influence_sample_size(n, eps, delta)
    per_delta = delta / (n + 1)
    chunks = pbiased_chunks(n, p, total, rng)

    def tally(chunk: PBiasedBatch) -> tuple[int, np.ndarray, np.ndarray]:
        y = oracle.evaluate_packed(chunk)
        c1 = np.empty(len(cs), dtype=np.int64)
        s1 = np.empty(len(cs), dtype=np.int64)
        for j, i in enumerate(cs):
            col = chunk.peek(i)
            c1[j] = popcount(col)
            s1[j] = popcount(col & y)
        return popcount(y), c1, s1

    parts = _map_chunks(tally, chunks, workers)
    ones = sum(t[0] for t in parts)
    c1 = sum(t[1] for t in parts) if parts else np.zeros(len(cs), dtype=np.int64)
    s1 = sum(t[2] for t in parts) if parts else np.zeros(len(cs), dtype=np.int64)
    c0 = total - c1
    s0 = ones - s1

    mean = ones / total
    log_term = math.log(2.0 / per_delta)
    r_mean = math.sqrt(log_term / (2 * total))
    use_one = c1 > c0
    with np.errstate(divide="ignore", invalid="ignore"):
        est1 = 4 * p * (s1 / c1 - mean)
        est0 = 4 * (1 - p) * (mean - s0 / c0)
        r1 = 4 * p * (np.sqrt(log_term / (2 * c1)) + r_mean)
        r0 = 4 * (1 - p) * (np.sqrt(log_term / (2 * c0)) + r_mean)
    idx = np.asarray(cs, dtype=np.int64) - 1
    values[idx] = np.clip(np.where(use_one, est1, est0), 0.0, 1.0)
    radius[idx] = np.where(use_one, r1, r0)
    return InfluenceEstimates(values, p, eps, radius, total)
