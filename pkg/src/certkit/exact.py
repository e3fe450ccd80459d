"""Brute-force ground truth for small dimensions.

Everything here starts from the full truth table (``2^n`` queries, or a
table passed in directly) and is exact up to floating-point rounding.
Polynomials in ``p`` are stored as counts per Hamming weight, so evaluating
at a new bias is ``O(n)``.
"""

from __future__ import annotations

import itertools
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ConstantFunctionError, DimensionError, NotMonotoneError
from .functions import MAX_TABLE_DIM, BooleanOracle, _table_is_monotone, full_table

MAX_CERT_DIM = 16
MAX_RM_DIM = 20
IDENTITY_TOL = 1e-9


def _weight_poly(counts: np.ndarray, p: float, n: int) -> float:
    """``sum_w counts[w] p^w (1-p)^(n-w)``."""
    w = np.arange(len(counts))
    return float(np.sum(counts * np.power(p, w) * np.power(1.0 - p, n - w)))


class ExactProfile:
    """Exact quantities of one function ``f: {0,1}^n -> {0,1}``.

    Built from an oracle (all ``2^n`` inputs are queried once) or from a
    uint8 truth table indexed with coordinate 1 as the most significant bit.
    """

    def __init__(self, f: BooleanOracle | np.ndarray | Sequence[int], n: int | None = None):
        if isinstance(f, BooleanOracle):
            if f.n > MAX_TABLE_DIM:
                raise DimensionError(f"exact analysis limited to n <= {MAX_TABLE_DIM}, got {f.n}")
            table = full_table(f)
            n = f.n
        else:
            table = np.asarray(f, dtype=np.uint8).reshape(-1)
            if n is None:
                n = int(table.shape[0]).bit_length() - 1
            if table.shape[0] != 1 << n:
                raise ValueError(f"table length {table.shape[0]} is not 2^{n}")
            if n > MAX_TABLE_DIM:
                raise DimensionError(f"exact analysis limited to n <= {MAX_TABLE_DIM}, got {n}")
        self.n = n
        self.table = table

    # --- structure -----------------------------------------------------------

    @cached_property
    def cube(self) -> np.ndarray:
        """The table as an ``(2,)*n`` array; axis ``i-1`` is coordinate ``i``."""
        return self.table.reshape((2,) * self.n)

    @cached_property
    def weights(self) -> np.ndarray:
        """Hamming weight of every row index."""
        return np.bitwise_count(np.arange(1 << self.n, dtype=np.uint64)).astype(np.int64)

    @cached_property
    def is_monotone(self) -> bool:
        return _table_is_monotone(self.table, self.n)

    @property
    def is_constant(self) -> bool:
        return bool(self.table.min() == self.table.max())

    def value(self, x: Sequence[int]) -> int:
        return int(self.cube[tuple(int(b) for b in x)])

    def _flip_table(self, i: int) -> np.ndarray:
        """``f(x^{+i})`` for every ``x`` (same row indexing)."""
        return np.flip(self.cube, axis=i - 1).reshape(-1)

    # --- expectation ---------------------------------------------------------

    @cached_property
    def phi_counts(self) -> np.ndarray:
        """Number of 1-inputs per Hamming weight: ``Phi_f(p) = sum_w N_w p^w (1-p)^(n-w)``."""
        return np.bincount(self.weights[self.table == 1], minlength=self.n + 1)

    def phi(self, p: float) -> float:
        return _weight_poly(self.phi_counts, p, self.n)

    def variance(self, p: float) -> float:
        mu = self.phi(p)
        return mu * (1.0 - mu)

    # --- influences ------------------------------------------------------------

    @cached_property
    def _sensitive_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Per coordinate and weight, the number of ``x`` with ``f(x) != f(x^{+i})``,
        split by ``x_i = 0`` and ``x_i = 1``."""
        n = self.n
        zero = np.zeros((n, n + 1), dtype=np.int64)
        one = np.zeros((n, n + 1), dtype=np.int64)
        index = np.arange(1 << n, dtype=np.int64)
        for i in range(1, n + 1):
            differs = self.table != self._flip_table(i)
            bit = ((index >> (n - i)) & 1).astype(bool)
            zero[i - 1] = np.bincount(self.weights[differs & ~bit], minlength=n + 1)
            one[i - 1] = np.bincount(self.weights[differs & bit], minlength=n + 1)
        return zero, one

    def flip_influences(self, p: float) -> np.ndarray:
        """``Inf+_{i,p} = Pr_p[f(x) != f(x^{+i})]`` by direct summation over ``x``."""
        zero, one = self._sensitive_counts
        return np.array([_weight_poly(zero[i] + one[i], p, self.n) for i in range(self.n)])

    def rerandomized_influences(self, p: float) -> np.ndarray:
        """``Inf~_{i,p} = 2 Pr_p[f(x) != f(x^{~i})]``; the resampled bit differs
        from ``x_i`` with probability ``p`` (if ``x_i = 0``) or ``1-p``."""
        zero, one = self._sensitive_counts
        return np.array(
            [2 * (p * _weight_poly(zero[i], p, self.n) + (1 - p) * _weight_poly(one[i], p, self.n)) for i in range(self.n)]
        )

    @cached_property
    def sensitivities(self) -> np.ndarray:
        """``Sens_f(x)`` for every row index."""
        sens = np.zeros(1 << self.n, dtype=np.int64)
        for i in range(1, self.n + 1):
            sens += self.table != self._flip_table(i)
        return sens

    def sensitivity(self, x: Sequence[int]) -> int:
        return int(self.sensitivities.reshape((2,) * self.n)[tuple(int(b) for b in x)])

    def expected_sensitivity(self, p: float) -> float:
        counts = np.bincount(self.weights, weights=self.sensitivities, minlength=self.n + 1)
        return _weight_poly(counts, p, self.n)

    def restriction_phi(self, i: int, b: int, p: float) -> float:
        """``Phi_{f_{x_i=b}}(p)``, computed on the subcube table."""
        sub = np.take(self.cube, b, axis=i - 1).reshape(-1)
        if self.n == 1:
            return float(sub[0])
        return ExactProfile(sub, self.n - 1).phi(p)

    # --- certificates ---------------------------------------------------------

    @cached_property
    def monochromatic(self) -> np.ndarray:
        """Value of ``f`` on every subcube, or -1 if not constant there.

        Shape ``(3,)*n``; index 0/1 fixes a coordinate, 2 leaves it free.
        """
        if self.n > MAX_CERT_DIM:
            raise DimensionError(f"certificate analysis limited to n <= {MAX_CERT_DIM}, got {self.n}")
        mono = self.cube.astype(np.int8)
        for axis in range(self.n):
            a0 = np.take(mono, 0, axis=axis)
            a1 = np.take(mono, 1, axis=axis)
            merged = np.where(a0 == a1, a0, np.int8(-1))
            mono = np.concatenate([mono, np.expand_dims(merged, axis)], axis=axis)
        return mono

    @cached_property
    def _free_dims(self) -> np.ndarray:
        free = np.zeros((3,) * self.n, dtype=np.int8)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = 3
            free += np.array([0, 0, 1], dtype=np.int8).reshape(shape)
        return free

    @cached_property
    def certificate_complexities(self) -> np.ndarray:
        """``C(f, x)`` for every row index.

        ``n`` minus the dimension of the largest monochromatic subcube
        containing ``x``: largest dimensions are pushed from each subcube down
        to its faces one axis at a time.
        """
        best = np.where(self.monochromatic >= 0, self._free_dims, np.int8(-1))
        for axis in range(self.n):
            free = [slice(None)] * self.n
            free[axis] = slice(2, 3)
            for b in (0, 1):
                face = [slice(None)] * self.n
                face[axis] = slice(b, b + 1)
                np.maximum(best[tuple(face)], best[tuple(free)], out=best[tuple(face)])
        points = best[(slice(0, 2),) * self.n].reshape(-1)
        return self.n - points.astype(np.int64)

    def certificate_stats(self) -> dict[str, int]:
        cx = self.certificate_complexities
        c0 = int(cx[self.table == 0].max()) if (self.table == 0).any() else 0
        c1 = int(cx[self.table == 1].max()) if (self.table == 1).any() else 0
        return {"C": max(c0, c1), "C0": c0, "C1": c1}

    def certificate_complexity(self) -> int:
        return self.certificate_stats()["C"]

    def is_certificate(self, x: Sequence[int], coords: Sequence[int]) -> bool:
        """Exhaustive VALID: ``f`` is constant on ``{y : y_S = x_S}``."""
        index = tuple(int(x[i - 1]) if i in set(coords) else slice(None) for i in range(1, self.n + 1))
        sub = self.cube[index]
        return bool(np.all(sub == sub.flat[0]))

    def minimal_certificates(self, value: int) -> list[dict[int, int]]:
        """All inclusion-minimal ``value``-certificates as coordinate->bit maps.

        These are the maximal subcubes on which ``f`` equals ``value``.
        """
        mono = self.monochromatic
        out = []
        for idx in zip(*np.nonzero(mono == value)):
            maximal = True
            for axis, v in enumerate(idx):
                if v != 2:
                    up = list(idx)
                    up[axis] = 2
                    if mono[tuple(up)] == value:
                        maximal = False
                        break
            if maximal:
                out.append({axis + 1: int(v) for axis, v in enumerate(idx) if v != 2})
        return out

    # --- critical probability -------------------------------------------------

    def critical_probability(self, tol: float = 1e-12) -> float:
        """Unique ``p`` with ``Phi_f(p) = 1/2`` for monotone nonconstant ``f``."""
        if self.is_constant:
            raise ConstantFunctionError("a constant function has no critical probability")
        if not self.is_monotone:
            raise NotMonotoneError("critical probability needs a monotone function")
        lo, hi = 0.0, 1.0
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if self.phi(mid) < 0.5:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    def check_identities(self, p: float, tol: float = IDENTITY_TOL) -> None:
        """Raise ``AssertionError`` unless total flip influence equals expected
        sensitivity and total rerandomized influence is at least the variance."""
        flip = self.flip_influences(p)
        rer = self.rerandomized_influences(p)
        if abs(flip.sum() - self.expected_sensitivity(p)) > tol:
            raise AssertionError("total flip influence differs from expected sensitivity")
        if rer.sum() < self.variance(p) - tol:
            raise AssertionError("total rerandomized influence below variance")


def _profile(f: BooleanOracle | ExactProfile) -> ExactProfile:
    return f if isinstance(f, ExactProfile) else ExactProfile(f)


def exact_phi(f: BooleanOracle | ExactProfile, p: float) -> float:
    return _profile(f).phi(p)


def exact_influences(f: BooleanOracle | ExactProfile, p: float) -> dict[str, object]:
    """Per-coordinate flip and rerandomized influences with their totals.

    The totals are checked against ``E_p[Sens]`` and ``Var_p[f]`` before
    returning.
    """
    prof = _profile(f)
    flip = prof.flip_influences(p)
    rer = prof.rerandomized_influences(p)
    prof.check_identities(p)
    return {
        "flip": flip,
        "rerandomized": rer,
        "total_flip": float(flip.sum()),
        "total_rerandomized": float(rer.sum()),
    }


def exact_sensitivity(f: BooleanOracle | ExactProfile, x: Sequence[int]) -> int:
    return _profile(f).sensitivity(x)


def exact_certificate_stats(f: BooleanOracle | ExactProfile) -> dict[str, object]:
    prof = _profile(f)
    stats: dict[str, object] = dict(prof.certificate_stats())
    stats["per_input"] = prof.certificate_complexities
    return stats


def exact_critical_probability(f: BooleanOracle | ExactProfile, tol: float = 1e-12) -> float:
    return _profile(f).critical_probability(tol)


def russo_margulis_residual(f: BooleanOracle | ExactProfile, p: float, h: float) -> float:
    """``|central difference of Phi at p - total flip influence at p|``."""
    prof = _profile(f)
    if prof.n > MAX_RM_DIM:
        raise DimensionError(f"limited to n <= {MAX_RM_DIM}")
    if not prof.is_monotone:
        raise NotMonotoneError("Russo-Margulis needs a monotone function")
    if not 0 < h <= min(p, 1 - p):
        raise ValueError(f"need 0 < h <= min(p, 1-p), got h={h}, p={p}")
    slope = (prof.phi(p + h) - prof.phi(p - h)) / (2 * h)
    return abs(slope - float(prof.flip_influences(p).sum()))


def certificate_complexity_at(f: BooleanOracle | ExactProfile, x: Sequence[int]) -> int:
    """``C(f, x)`` by enumerating coordinate sets in increasing size.

    Independent of the subcube sweep behind :meth:`ExactProfile.certificate_complexities`;
    sizes below ``Sens_f(x)`` are skipped since no such set can certify.
    """
    prof = _profile(f)
    for size in range(prof.sensitivity(x), prof.n + 1):
        for coords in itertools.combinations(range(1, prof.n + 1), size):
            if prof.is_certificate(x, coords):
                return size
    return prof.n


def monotone_tables(n: int) -> list[np.ndarray]:
    """Truth tables of all monotone functions on ``n`` variables.

    Uses ``f = (f_{x_1=0}, f_{x_1=1})`` with ``f_{x_1=0} <= f_{x_1=1}``.
    Counts: 2, 3, 6, 20, 168, 7581 for ``n = 0..5``.
    """
    if n == 0:
        return [np.array([0], dtype=np.uint8), np.array([1], dtype=np.uint8)]
    smaller = monotone_tables(n - 1)
    stacked = np.stack(smaller)
    out = []
    for lo in smaller:
        ok = np.all(lo <= stacked, axis=1)
        for hi in stacked[ok]:
            out.append(np.concatenate([lo, hi]))
    return out
