"""Boolean functions behind a counted query interface.

Coordinates are 1-based throughout, matching ``[n] = {1, ..., n}``.  Every
oracle evaluates on packed column batches (see :mod:`certkit._bits`) and
charges one query per input row.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from ._bits import Batch, DenseBatch, HypercubeBatch, OverrideBatch, as_batch, pack_bits, unpack_bits
from .errors import DimensionError, NotMonotoneError, SpecError

MAX_TABLE_DIM = 24

KINDS = ("conjunction", "dictator", "majority", "tribes", "monotone_dnf", "truth_table", "subcube", "constant")


@dataclass(frozen=True)
class FunctionSpec:
    """Serializable description of one of the built-in function families.

    Only the fields relevant to ``kind`` are used: ``vars`` (conjunction),
    ``index`` (dictator), ``width``/``count`` (tribes), ``terms``
    (monotone_dnf), ``bits`` (truth_table, coordinate 1 is the most
    significant bit of the row index), ``fixed`` (subcube), ``value``
    (constant).
    """

    kind: str
    n: int
    vars: tuple[int, ...] = ()
    index: int = 0
    width: int = 0
    count: int = 0
    terms: tuple[tuple[int, ...], ...] = ()
    bits: str = ""
    fixed: tuple[tuple[int, int], ...] = ()
    value: int = 0

    @classmethod
    def conjunction(cls, n: int, vars: Iterable[int]) -> FunctionSpec:
        return cls("conjunction", n, vars=tuple(sorted(set(vars))))

    @classmethod
    def dictator(cls, n: int, index: int) -> FunctionSpec:
        return cls("dictator", n, index=index)

    @classmethod
    def majority(cls, n: int) -> FunctionSpec:
        return cls("majority", n)

    @classmethod
    def tribes(cls, n: int, width: int, count: int) -> FunctionSpec:
        return cls("tribes", n, width=width, count=count)

    @classmethod
    def monotone_dnf(cls, n: int, terms: Iterable[Iterable[int]]) -> FunctionSpec:
        return cls("monotone_dnf", n, terms=tuple(tuple(sorted(set(t))) for t in terms))

    @classmethod
    def truth_table(cls, n: int, bits: str | Sequence[int]) -> FunctionSpec:
        if not isinstance(bits, str):
            bits = "".join(str(int(b)) for b in bits)
        return cls("truth_table", n, bits=bits)

    @classmethod
    def subcube(cls, n: int, fixed: Mapping[int, int]) -> FunctionSpec:
        return cls("subcube", n, fixed=tuple(sorted((int(i), int(b)) for i, b in fixed.items())))

    @classmethod
    def constant(cls, n: int, value: int) -> FunctionSpec:
        return cls("constant", n, value=int(value))

    def validate(self) -> None:
        n = self.n
        if self.kind not in KINDS:
            raise SpecError(f"unknown kind {self.kind!r}")
        if not isinstance(n, int) or n < 1:
            raise SpecError(f"dimension must be a positive integer, got {n!r}")

        def check(coords: Iterable[int]) -> None:
            for i in coords:
                if not 1 <= i <= n:
                    raise SpecError(f"coordinate {i} outside [1, {n}]")

        if self.kind == "conjunction":
            check(self.vars)
        elif self.kind == "dictator":
            check([self.index])
        elif self.kind == "majority":
            if n % 2 == 0:
                raise SpecError("majority needs odd n")
        elif self.kind == "tribes":
            if self.width < 1 or self.count < 1:
                raise SpecError("tribes needs width >= 1 and count >= 1")
            if self.width * self.count > n:
                raise SpecError(f"tribes {self.width}x{self.count} does not fit in n={n}")
        elif self.kind == "monotone_dnf":
            for t in self.terms:
                check(t)
        elif self.kind == "truth_table":
            if n > MAX_TABLE_DIM:
                raise SpecError(f"truth_table limited to n <= {MAX_TABLE_DIM}")
            if len(self.bits) != 1 << n or set(self.bits) - {"0", "1"}:
                raise SpecError(f"truth_table needs exactly 2^{n} characters from '01'")
        elif self.kind == "subcube":
            coords = [i for i, _ in self.fixed]
            check(coords)
            if len(set(coords)) != len(coords):
                raise SpecError("subcube coordinates repeat")
            if any(b not in (0, 1) for _, b in self.fixed):
                raise SpecError("subcube bits must be 0 or 1")
        elif self.kind == "constant":
            if self.value not in (0, 1):
                raise SpecError("constant value must be 0 or 1")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "n": self.n}
        if self.kind == "conjunction":
            d["vars"] = list(self.vars)
        elif self.kind == "dictator":
            d["index"] = self.index
        elif self.kind == "tribes":
            d["width"] = self.width
            d["count"] = self.count
        elif self.kind == "monotone_dnf":
            d["terms"] = [list(t) for t in self.terms]
        elif self.kind == "truth_table":
            d["bits"] = self.bits
        elif self.kind == "subcube":
            d["fixed"] = {str(i): b for i, b in self.fixed}
        elif self.kind == "constant":
            d["value"] = self.value
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> FunctionSpec:
        try:
            kind, n = d["kind"], d["n"]
            if kind == "conjunction":
                spec = cls.conjunction(n, d["vars"])
            elif kind == "dictator":
                spec = cls.dictator(n, d["index"])
            elif kind == "majority":
                spec = cls.majority(n)
            elif kind == "tribes":
                spec = cls.tribes(n, d["width"], d["count"])
            elif kind == "monotone_dnf":
                spec = cls.monotone_dnf(n, d["terms"])
            elif kind == "truth_table":
                spec = cls.truth_table(n, d["bits"])
            elif kind == "subcube":
                spec = cls.subcube(n, {int(k): int(v) for k, v in d["fixed"].items()})
            elif kind == "constant":
                spec = cls.constant(n, d["value"])
            else:
                raise SpecError(f"unknown kind {kind!r}")
        except (KeyError, TypeError, AttributeError) as exc:
            raise SpecError(f"malformed spec: {exc}") from exc
        spec.validate()
        return spec

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> FunctionSpec:
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> FunctionSpec:
        return cls.from_json(Path(path).read_text())


class QueryCounter:
    """Thread-safe running total of evaluated inputs."""

    def __init__(self) -> None:
        self._value = 0
        self._lock = threading.Lock()

    def add(self, k: int) -> None:
        with self._lock:
            self._value += k

    @property
    def value(self) -> int:
        return self._value


PackedFn = Callable[[Batch], np.ndarray]


class BooleanOracle:
    """Query access to ``f: {0,1}^n -> {0,1}``.

    ``query_count`` is shared with every restriction derived from this
    oracle, so it always reports the total number of inputs evaluated.
    """

    def __init__(
        self,
        n: int,
        fn: PackedFn,
        *,
        monotone: bool = False,
        spec: FunctionSpec | None = None,
        counter: QueryCounter | None = None,
    ):
        self.n = n
        self._fn = fn
        self.monotone_declared = monotone
        self.spec = spec
        self.counter = counter if counter is not None else QueryCounter()
        self._extremes: dict[int, int] = {}
        self._lock = threading.Lock()

    @property
    def query_count(self) -> int:
        return self.counter.value

    @property
    def assignments(self) -> Mapping[int, int]:
        return {}

    @property
    def root(self) -> BooleanOracle:
        return self

    def free_coords(self) -> list[int]:
        fixed = self.assignments
        return [i for i in range(1, self.n + 1) if i not in fixed]

    def evaluate_packed(self, batch: Batch) -> np.ndarray:
        if batch.n != self.n:
            raise ValueError(f"batch has dimension {batch.n}, oracle has {self.n}")
        out = self._fn(batch) & batch.ones()
        self.counter.add(batch.rows)
        return out

    def evaluate_batch(self, xs: Batch | np.ndarray | Sequence[Sequence[int]]) -> np.ndarray:
        batch = as_batch(xs)
        return unpack_bits(self.evaluate_packed(batch), batch.rows)

    def evaluate(self, x: Sequence[int] | np.ndarray) -> int:
        arr = np.asarray(x, dtype=np.int64).reshape(-1)
        if arr.shape[0] != self.n:
            raise ValueError(f"input has length {arr.shape[0]}, expected {self.n}")
        if ((arr != 0) & (arr != 1)).any():
            raise ValueError("inputs must be 0/1")
        return int(self.evaluate_packed(DenseBatch(arr[None, :]))[0] & np.uint64(1))

    def extremes(self) -> tuple[int, int]:
        """``(f(0^n), f(1^n))``, each queried at most once per oracle frame."""
        with self._lock:
            for b in (0, 1):
                if b not in self._extremes:
                    self._extremes[b] = self.evaluate(np.full(self.n, b))
            return self._extremes[0], self._extremes[1]

    def restrict(self, assignments: Mapping[int, int]) -> RestrictedOracle:
        return restrict(self, assignments)

    def __repr__(self) -> str:
        what = self.spec.to_json() if self.spec is not None else "opaque"
        return f"{type(self).__name__}(n={self.n}, {what})"


class RestrictedOracle(BooleanOracle):
    """``f`` with some coordinates overridden on every query; dimension stays ``n``."""

    def __init__(self, root: BooleanOracle, assignments: Mapping[int, int]):
        self._root = root
        self._assignments = dict(assignments)
        fixed = self._assignments
        super().__init__(
            root.n,
            lambda batch: root._fn(OverrideBatch(batch, fixed)),
            monotone=root.monotone_declared,
            spec=root.spec,
            counter=root.counter,
        )

    @property
    def assignments(self) -> Mapping[int, int]:
        return dict(self._assignments)

    @property
    def root(self) -> BooleanOracle:
        return self._root

    def __repr__(self) -> str:
        return f"RestrictedOracle({self._root!r}, {self._assignments})"


def restrict(oracle: BooleanOracle, assignments: Mapping[int, int]) -> RestrictedOracle:
    """Return ``f`` with ``x_i = b`` forced for each ``i -> b``.

    Restrictions compose into a single frame over the root oracle; a later
    assignment to an already-fixed coordinate must agree with it.
    """
    merged = dict(oracle.assignments)
    for i, b in assignments.items():
        i, b = int(i), int(b)
        if not 1 <= i <= oracle.n:
            raise SpecError(f"coordinate {i} outside [1, {oracle.n}]")
        if b not in (0, 1):
            raise SpecError(f"restriction value must be 0 or 1, got {b}")
        if merged.get(i, b) != b:
            raise SpecError(f"coordinate {i} already fixed to {merged[i]}")
        merged[i] = b
    return RestrictedOracle(oracle.root, merged)


# --- evaluators -------------------------------------------------------------


def _and(batch: Batch, coords: Iterable[int]) -> np.ndarray:
    acc = batch.ones()
    for i in coords:
        acc &= batch.column(i)
    return acc


def _count_ones(batch: Batch, coords: Iterable[int]) -> np.ndarray:
    total = np.zeros(batch.rows, dtype=np.int32)
    for i in coords:
        total += unpack_bits(batch.column(i), batch.rows)
    return total


def _evaluator(spec: FunctionSpec) -> PackedFn:
    kind, n = spec.kind, spec.n
    if kind == "conjunction":
        return lambda b: _and(b, spec.vars)
    if kind == "dictator":
        return lambda b: b.column(spec.index).copy()
    if kind == "majority":
        return lambda b: pack_bits(_count_ones(b, range(1, n + 1)) > n // 2)
    if kind in ("tribes", "monotone_dnf"):
        if kind == "tribes":
            w = spec.width
            terms = [tuple(range(j * w + 1, (j + 1) * w + 1)) for j in range(spec.count)]
        else:
            terms = [tuple(t) for t in spec.terms]

        def dnf(b: Batch) -> np.ndarray:
            acc = b.zeros()
            for t in terms:
                acc |= _and(b, t)
            return acc

        return dnf
    if kind == "truth_table":
        table = np.frombuffer(spec.bits.encode(), dtype=np.uint8) - ord("0")

        def lookup(b: Batch) -> np.ndarray:
            index = np.zeros(b.rows, dtype=np.int64)
            for i in range(1, n + 1):
                index = (index << 1) | unpack_bits(b.column(i), b.rows)
            return pack_bits(table[index])

        return lookup
    if kind == "subcube":

        def cube(b: Batch) -> np.ndarray:
            acc = b.ones()
            for i, bit in spec.fixed:
                col = b.column(i)
                acc &= col if bit else ~col
            return acc

        return cube
    if kind == "constant":
        return (lambda b: b.ones()) if spec.value else (lambda b: b.zeros())
    raise SpecError(f"unknown kind {kind!r}")


def _table_is_monotone(table: np.ndarray, n: int) -> bool:
    cube = table.reshape((2,) * n) if n else table
    for axis in range(n):
        lo = np.take(cube, 0, axis=axis)
        hi = np.take(cube, 1, axis=axis)
        if (lo > hi).any():
            return False
    return True


def build_function(spec: FunctionSpec) -> BooleanOracle:
    """Build a fresh (query count 0) oracle for ``spec``."""
    spec.validate()
    if spec.kind == "truth_table":
        table = np.frombuffer(spec.bits.encode(), dtype=np.uint8) - ord("0")
        monotone = _table_is_monotone(table, spec.n)
    elif spec.kind == "subcube":
        monotone = all(b == 1 for _, b in spec.fixed)
    else:
        monotone = True
    return BooleanOracle(spec.n, _evaluator(spec), monotone=monotone, spec=spec)


def from_callable(
    fn: Callable[[np.ndarray], Any], n: int, *, vectorized: bool = False, monotone: bool = False
) -> BooleanOracle:
    """Wrap an opaque evaluator.

    With ``vectorized=False`` ``fn`` receives one uint8 vector of length ``n``;
    otherwise it receives a ``(rows, n)`` array and returns ``rows`` labels.
    ``monotone`` is the caller's declaration and is not checked here.
    """

    def packed(batch: Batch) -> np.ndarray:
        rows = batch.dense()
        if vectorized:
            labels = np.asarray(fn(rows), dtype=np.uint8).reshape(-1)
        else:
            labels = np.fromiter((int(fn(r)) for r in rows), dtype=np.uint8, count=batch.rows)
        if labels.shape[0] != batch.rows or (labels > 1).any():
            raise ValueError("evaluator must return one 0/1 label per row")
        return pack_bits(labels)

    return BooleanOracle(n, packed, monotone=monotone)


# --- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Coordinates ``coords`` fixed to ``values`` force ``f = claimed_value``."""

    coords: tuple[int, ...]
    values: Mapping[int, int] = field(hash=False)
    claimed_value: int

    def __post_init__(self) -> None:
        if set(self.values) != set(self.coords):
            raise ValueError("values must be defined exactly on coords")

    @classmethod
    def from_input(cls, x_star: Sequence[int], coords: Iterable[int], claimed_value: int) -> Certificate:
        cs = tuple(sorted(set(int(i) for i in coords)))
        return cls(cs, {i: int(x_star[i - 1]) for i in cs}, int(claimed_value))

    @property
    def size(self) -> int:
        return len(self.coords)

    def extremal_point(self, n: int) -> np.ndarray:
        """Values on ``coords``, the non-claimed bit elsewhere."""
        z = np.full(n, 1 - self.claimed_value, dtype=np.uint8)
        for i in self.coords:
            z[i - 1] = self.values[i]
        return z

    def to_dict(self) -> dict[str, Any]:
        return {
            "coords": list(self.coords),
            "values": {str(i): self.values[i] for i in self.coords},
            "claimed_value": self.claimed_value,
        }


def _require_monotone(oracle: BooleanOracle) -> None:
    if not oracle.monotone_declared:
        raise NotMonotoneError("operation requires an oracle declared monotone")


def test_constant_monotone(oracle: BooleanOracle) -> int | None:
    """The constant value of a monotone ``f``, or ``None`` if nonconstant.

    ``f`` is constant iff ``f(0^n) = f(1^n)``; both values are cached on the
    oracle frame.
    """
    _require_monotone(oracle)
    lo, hi = oracle.extremes()
    return lo if lo == hi else None


test_constant_monotone.__test__ = False  # not a pytest test


def verify_certificate(oracle: BooleanOracle, cert: Certificate) -> bool:
    """One-query check, sound and complete for monotone ``f``.

    The extremal point of the certified subcube (values on ``coords``, the
    opposite of the claimed bit elsewhere) is below (claim 1) or above
    (claim 0) every other point of the subcube.
    """
    _require_monotone(oracle)
    return oracle.evaluate(cert.extremal_point(oracle.n)) == cert.claimed_value


def full_table(oracle: BooleanOracle) -> np.ndarray:
    """All ``2^n`` values (charged as ``2^n`` queries), coordinate 1 as MSB."""
    if oracle.n > MAX_TABLE_DIM:
        raise DimensionError(f"exhaustive evaluation limited to n <= {MAX_TABLE_DIM}, got {oracle.n}")
    batch = HypercubeBatch(oracle.n)
    return oracle.evaluate_batch(batch)


def check_monotone_exhaustive(oracle: BooleanOracle) -> bool:
    """True iff ``f(x) <= f(x + e_i)`` on every edge of the hypercube."""
    return _table_is_monotone(full_table(oracle), oracle.n)
