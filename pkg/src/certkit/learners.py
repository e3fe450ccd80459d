"""Certificates from uniform random examples, for arbitrary (not necessarily monotone) functions.

Every size-``k`` coordinate set is a candidate; a labelled example ``(x, y)``
rules a candidate out when ``x`` agrees with ``x*`` on it but ``y`` differs
from ``f(x*)``.  Candidates are visited in colexicographic order, so "the
first survivor" is well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EnumerationBudgetExceeded
from .functions import BooleanOracle

MAX_LEARN_DIM = 30
MAX_CANDIDATES = 10**7


@dataclass(frozen=True)
class LabeledSample:
    x: tuple[int, ...]
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1) or any(b not in (0, 1) for b in self.x):
            raise ValueError("samples must be 0/1 vectors with 0/1 labels")

    def to_line(self) -> str:
        return "".join(map(str, self.x)) + f" {self.label}"

    @classmethod
    def from_line(cls, line: str) -> LabeledSample:
        parts = line.split()
        if len(parts) != 2 or set(parts[0]) - {"0", "1"} or parts[1] not in ("0", "1"):
            raise ValueError(f"malformed sample line: {line!r}")
        return cls(tuple(int(c) for c in parts[0]), int(parts[1]))


def draw_uniform_samples(oracle: BooleanOracle, m: int, rng: np.random.Generator) -> list[LabeledSample]:
    """``m`` uniform inputs labelled by the oracle (``m`` queries)."""
    if m < 0:
        raise ValueError(f"sample count must be nonnegative, got {m}")
    if m == 0:
        return []
    xs = rng.integers(0, 2, size=(m, oracle.n), dtype=np.uint8)
    labels = oracle.evaluate_batch(xs)
    return [LabeledSample(tuple(int(b) for b in row), int(y)) for row, y in zip(xs, labels)]


def write_samples(samples: Iterable[LabeledSample], path: str | Path) -> None:
    Path(path).write_text("".join(s.to_line() + "\n" for s in samples))


def read_samples(path: str | Path, oracle: BooleanOracle | None = None) -> list[LabeledSample]:
    """Parse a "bits label" file; with ``oracle``, every label is checked (one query each)."""
    samples = [LabeledSample.from_line(line) for line in Path(path).read_text().splitlines() if line.strip()]
    if samples and len({len(s.x) for s in samples}) != 1:
        raise ValueError("samples have different dimensions")
    if oracle is not None and samples:
        labels = oracle.evaluate_batch(np.array([s.x for s in samples], dtype=np.uint8))
        bad = [i for i, (s, y) in enumerate(zip(samples, labels)) if s.label != y]
        if bad:
            raise ValueError(f"{len(bad)} sample labels disagree with the function (first at line {bad[0] + 1})")
    return samples


def colex_subsets(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All ``k``-subsets of ``{1..n}`` in colexicographic order, as ascending tuples."""
    if k == 0:
        yield ()
        return
    for top in range(k, n + 1):
        for rest in colex_subsets(top - 1, k - 1):
            yield rest + (top,)


def check_enumeration_budget(n: int, k: int) -> int:
    count = math.comb(n, k)
    if n > MAX_LEARN_DIM or count > MAX_CANDIDATES:
        raise EnumerationBudgetExceeded(
            f"C({n}, {k}) = {count} candidate sets exceeds the budget (n <= {MAX_LEARN_DIM}, <= {MAX_CANDIDATES})"
        )
    return count


def certify_from_samples(
    samples: Sequence[LabeledSample],
    x_star: Sequence[int],
    value_at_star: int,
    k: int,
    mode: str = "first",
) -> tuple[int, ...] | list[tuple[int, ...]] | None:
    """Size-``k`` coordinate sets not ruled out by ``samples``.

    ``mode="first"`` returns the first survivor in colex order (or ``None``);
    ``mode="all"`` returns the list of every survivor.
    """
    if mode not in ("first", "all"):
        raise ValueError(f"mode must be 'first' or 'all', got {mode!r}")
    x = tuple(int(b) for b in x_star)
    n = len(x)
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    check_enumeration_budget(n, k)
    for s in samples:
        if len(s.x) != n:
            raise ValueError(f"sample of length {len(s.x)} does not match n={n}")

    # bit r of agree[i] is set when sample r contradicts f(x*) and agrees with x* at i
    agree = [0] * (n + 1)
    contradicting = [s for s in samples if s.label != value_at_star]
    for r, s in enumerate(contradicting):
        bit = 1 << r
        for i in range(n):
            if s.x[i] == x[i]:
                agree[i + 1] |= bit
    everyone = (1 << len(contradicting)) - 1

    survivors: list[tuple[int, ...]] = []

    def walk(size: int, top: int, alive: int, chosen: tuple[int, ...]) -> bool:
        # extend ``chosen`` (all elements > top) by ``size`` elements from 1..top
        if size == 0:
            if alive == 0:
                survivors.append(chosen)
                return mode == "first"
            return False
        for t in range(size, top + 1):
            still = alive & agree[t]
            if still == 0 and mode == "all":
                survivors.extend(rest + (t,) + chosen for rest in colex_subsets(t - 1, size - 1))
                continue
            if walk(size - 1, t - 1, still, (t,) + chosen):
                return True
        return False

    walk(k, n, everyone, ())
    if mode == "first":
        return survivors[0] if survivors else None
    return survivors


def success_bound(n: int, k: int, m: int) -> float:
    """``1 - (1 - 2^-k)^m * C(n, k)`` (may be negative).

    Random conjunctions with ``x* = 1^n`` succeed less often than this; see
    :func:`guaranteed_success_bound` for the expression the elimination
    argument actually gives.
    """
    return 1.0 - (1.0 - 2.0**-k) ** m * math.comb(n, k)


def guaranteed_success_bound(n: int, k: int, m: int) -> float:
    """``1 - (1 - 4^-k)^m * C(n, k)``.

    A non-certificate ``S`` is ruled out by one example only if the example
    agrees with ``x*`` on ``S`` (probability ``2^-k``) and then lands on the
    other value of the nonconstant restriction (probability at least
    ``2^-k``), so ``4^-k`` is what the elimination argument supports.
    """
    return 1.0 - (1.0 - 4.0**-k) ** m * math.comb(n, k)
