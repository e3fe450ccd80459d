import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from certkit import ExactProfile, FunctionSpec, LabeledSample, build_function, certify_from_samples, draw_uniform_samples
from certkit.errors import EnumerationBudgetExceeded
from certkit.experiments import measure_random_examples_success
from certkit.learners import colex_subsets, guaranteed_success_bound, read_samples, success_bound, write_samples
from certkit.exact import monotone_tables


def test_conjunction_survivor_from_samples():
    f = build_function(FunctionSpec.conjunction(10, [2, 5]))
    samples = draw_uniform_samples(f, 2000, np.random.default_rng(0))
    assert (2, 5) in certify_from_samples(samples, [1] * 10, 1, 2, mode="all")
    assert certify_from_samples(samples, [1] * 10, 1, 2) == (2, 5)


def test_no_samples_keeps_every_candidate():
    assert certify_from_samples([], [1] * 6, 1, 2) == (1, 2)
    assert len(certify_from_samples([], [1] * 6, 1, 2, mode="all")) == math.comb(6, 2)


def test_contradicting_sample_eliminates_agreeing_set():
    sample = LabeledSample((1, 1, 0, 0), 0)
    survivors = certify_from_samples([sample], [1, 1, 1, 1], 1, 2, mode="all")
    assert (1, 2) not in survivors
    assert (1, 3) in survivors
    # agreeing label eliminates nothing
    assert len(certify_from_samples([LabeledSample((1, 1, 0, 0), 1)], [1, 1, 1, 1], 1, 2, mode="all")) == 6


def test_colex_order():
    assert list(colex_subsets(4, 2)) == [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]
    assert list(colex_subsets(3, 0)) == [()]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_survivors_match_definition(seed):
    rng = np.random.default_rng(seed)
    n, k, m = int(rng.integers(1, 8)), 0, int(rng.integers(0, 15))
    k = int(rng.integers(0, n + 1))
    xs = rng.integers(0, 2, (m, n))
    ys = rng.integers(0, 2, m)
    x_star = rng.integers(0, 2, n)
    value = int(rng.integers(0, 2))
    samples = [LabeledSample(tuple(map(int, a)), int(b)) for a, b in zip(xs, ys)]
    expected = [
        c for c in itertools.combinations(range(1, n + 1), k)
        if not any(s.label != value and all(s.x[i - 1] == x_star[i - 1] for i in c) for s in samples)
    ]
    expected.sort(key=lambda c: c[::-1])
    assert certify_from_samples(samples, x_star, value, k, mode="all") == expected
    assert certify_from_samples(samples, x_star, value, k) == (expected[0] if expected else None)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_true_certificates_survive_every_sample(n):
    # the whole cube, correctly labelled, is the most adversarial sample set
    rng = np.random.default_rng(n)
    for _ in range(3):
        table = rng.integers(0, 2, 2**n).astype(np.uint8)
        prof = ExactProfile(table, n)
        samples = [LabeledSample(x, int(table[r])) for r, x in enumerate(itertools.product([0, 1], repeat=n))]
        x_star = tuple(int(b) for b in rng.integers(0, 2, n))
        k = min(3, n)
        survivors = set(certify_from_samples(samples, x_star, prof.value(x_star), k, mode="all"))
        truth = {c for c in itertools.combinations(range(1, n + 1), k) if prof.is_certificate(x_star, c)}
        assert survivors == truth


def small_tables():
    for n in range(1, 5):
        for code in range(1, 2 ** (2**n) - 1):
            yield n, np.array([(code >> r) & 1 for r in range(2**n)], dtype=np.uint8)
    for table in monotone_tables(5):
        yield 5, table
    rng = np.random.default_rng(5)
    for _ in range(3000):
        yield 5, rng.integers(0, 2, 32).astype(np.uint8)


def test_both_values_have_mass_at_least_two_to_minus_c():
    for n, table in small_tables():
        prof = ExactProfile(table, n)
        if prof.is_constant:
            continue
        floor = 2.0 ** -prof.certificate_complexity()
        mass = table.mean()
        assert mass >= floor and 1 - mass >= floor


def test_draw_uniform_samples():
    rng = np.random.default_rng(1)
    assert draw_uniform_samples(build_function(FunctionSpec.dictator(3, 1)), 0, rng) == []
    ones = draw_uniform_samples(build_function(FunctionSpec.constant(5, 1)), 10_000, rng)
    assert {s.label for s in ones} == {1}
    f = build_function(FunctionSpec.dictator(8, 1))
    labels = [s.label for s in draw_uniform_samples(f, 100_000, rng)]
    assert f.query_count == 100_000
    assert abs(np.mean(labels) - 0.5) <= 0.01


def test_sample_file_round_trip(tmp_path):
    f = build_function(FunctionSpec.majority(5))
    samples = draw_uniform_samples(f, 40, np.random.default_rng(2))
    path = tmp_path / "s.txt"
    write_samples(samples, path)
    assert path.read_text().splitlines()[0].count(" ") == 1
    assert read_samples(path, oracle=f) == samples
    path.write_text("0110 1\n01x0 1\n")
    with pytest.raises(ValueError):
        read_samples(path)
    path.write_text("00000 1\n")
    with pytest.raises(ValueError):
        read_samples(path, oracle=f)


def test_enumeration_budget():
    with pytest.raises(EnumerationBudgetExceeded):
        certify_from_samples([], [1] * 31, 1, 1)
    with pytest.raises(EnumerationBudgetExceeded):
        certify_from_samples([], [1] * 30, 1, 10)


def test_bound_expressions():
    assert success_bound(16, 3, 100) == pytest.approx(1 - 0.875**100 * 560)
    assert success_bound(16, 3, 0) == 1 - 560
    assert guaranteed_success_bound(16, 3, 1000) == pytest.approx(1 - (63 / 64) ** 1000 * 560)


def test_success_rate_meets_supported_bound():
    rec = measure_random_examples_success(16, 3, 1000, 200, 21)
    bound = guaranteed_success_bound(16, 3, 1000)
    se = math.sqrt(bound * (1 - bound) / rec.trials)
    assert rec.rate >= bound - 3 * se - 1e-12
    assert rec.mean_queries == 1001
