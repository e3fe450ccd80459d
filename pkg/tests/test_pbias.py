import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from certkit import (
    EstimationParams,
    ExactProfile,
    FunctionSpec,
    build_function,
    estimate_influences,
    estimate_phi,
    find_critical_probability,
    find_half_point,
    sample_pbiased,
)
from certkit.errors import ConstantFunctionError
from certkit.pbias import half_point_plan, influence_sample_size, pbiased_chunks, sample_count
from conftest import random_dnf


def fn(spec):
    return build_function(spec)


def test_sample_pbiased_extremes_and_mean():
    rng = np.random.default_rng(0)
    assert sample_pbiased(50, 0.0, rng).tolist() == [0] * 50
    assert sample_pbiased(50, 1.0, rng).tolist() == [1] * 50
    bits = sample_pbiased(100_000, 0.5, rng)
    assert abs(bits.mean() - 0.5) <= 0.01


def test_sample_pbiased_rejects_bad_probability():
    with pytest.raises(ValueError):
        sample_pbiased(3, 1.5, np.random.default_rng(0))


def test_sample_count_formula():
    assert sample_count(0.1, 0.05) == math.ceil(math.log(40) / 0.02)
    assert EstimationParams(0.02, 0.001).sample_count == math.ceil(math.log(2000) / (2 * 0.02**2))
    with pytest.raises(ValueError):
        EstimationParams(0.0, 0.1)
    with pytest.raises(ValueError):
        EstimationParams(0.1, 1.0)


@given(st.floats(1e-3, 0.9), st.floats(1e-3, 0.9), st.floats(1e-6, 0.5), st.floats(1e-6, 0.5))
def test_sample_count_nonincreasing(e1, e2, d1, d2):
    lo_e, hi_e = sorted((e1, e2))
    lo_d, hi_d = sorted((d1, d2))
    assert sample_count(hi_e, hi_d) <= sample_count(lo_e, lo_d)
    assert sample_count(hi_e, hi_d) >= 1


def test_chunks_cover_rows_and_reproduce():
    chunks = pbiased_chunks(5, 0.3, 600_000, np.random.default_rng(3))
    assert sum(c.rows for c in chunks) == 600_000
    again = pbiased_chunks(5, 0.3, 600_000, np.random.default_rng(3))
    assert np.array_equal(chunks[1].column(4), again[1].column(4))
    assert not np.array_equal(chunks[1].column(4), chunks[1].column(5))


def test_estimate_phi_examples_and_query_count():
    rng = np.random.default_rng(1)
    params = EstimationParams(0.02, 0.001)
    f = fn(FunctionSpec.conjunction(6, [1, 2]))
    assert 0.23 <= estimate_phi(f, 0.5, params, rng) <= 0.27
    assert f.query_count == params.sample_count
    assert abs(estimate_phi(fn(FunctionSpec.dictator(3, 1)), 0.3, params, rng) - 0.3) <= 0.02
    assert estimate_phi(fn(FunctionSpec.constant(4, 1)), 0.42, params, rng) == 1.0


def test_estimate_phi_is_unbiased():
    rng = np.random.default_rng(2)
    params = EstimationParams(0.25, 0.5)
    m = params.sample_count
    for spec in [FunctionSpec.tribes(6, 2, 3), FunctionSpec.majority(5), FunctionSpec.monotone_dnf(12, [[1, 2, 3], [4, 5], [6]])]:
        f = fn(spec)
        exact = ExactProfile(fn(spec)).phi(0.35)
        runs = np.array([estimate_phi(f, 0.35, params, rng) for _ in range(10_000)])
        se = math.sqrt(exact * (1 - exact) / (m * len(runs)))
        assert abs(runs.mean() - exact) <= 3 * se


def test_estimate_phi_coverage():
    rng = np.random.default_rng(3)
    delta = 0.1
    hits = 0
    for _ in range(200):
        spec = random_dnf(rng, 3, 12)
        p = float(rng.uniform(0.05, 0.95))
        eps = float(rng.uniform(0.02, 0.1))
        est = estimate_phi(fn(spec), p, EstimationParams(eps, delta), rng)
        hits += abs(est - ExactProfile(fn(spec)).phi(p)) <= eps
    assert hits >= 200 * (1 - 2 * delta)


def test_half_point_examples_and_query_budget():
    rng = np.random.default_rng(4)
    f = fn(FunctionSpec.dictator(4, 1))
    assert 0.4 <= find_half_point(f, 1, 0.1, 0.01, rng) <= 0.6
    probes, params = half_point_plan(1, 0.1, 0.01)
    assert probes == math.ceil(math.log2(30))
    assert f.query_count == 2 + probes * params.sample_count

    assert 0.45 <= find_half_point(fn(FunctionSpec.majority(3)), 2, 0.05, 0.01, rng) <= 0.55
    p = find_half_point(fn(FunctionSpec.conjunction(5, [1, 2])), 2, 0.05, 0.01, rng)
    assert 0.45 <= p * p <= 0.55


def test_half_point_rejects_constant():
    with pytest.raises(ConstantFunctionError):
        find_half_point(fn(FunctionSpec.constant(3, 0)), 1, 0.1, 0.1, np.random.default_rng(0))


def test_critical_probability_examples():
    rng = np.random.default_rng(5)
    p = find_critical_probability(fn(FunctionSpec.conjunction(8, [1, 2])), 2, 0.02, 0.01, rng)
    assert abs(p - 2**-0.5) <= 0.02
    assert abs(find_critical_probability(fn(FunctionSpec.dictator(3, 1)), 1, 0.05, 0.01, rng) - 0.5) <= 0.05
    assert abs(find_critical_probability(fn(FunctionSpec.majority(3)), 2, 0.05, 0.01, rng) - 0.5) <= 0.05
    with pytest.raises(ValueError):
        find_critical_probability(fn(FunctionSpec.majority(3)), 2, 1.0, 0.01, rng)


def test_critical_probability_coverage():
    rng = np.random.default_rng(6)
    delta, eps = 0.1, 0.1
    hits = trials = 0
    while trials < 200:
        spec = random_dnf(rng, 3, 10)
        prof = ExactProfile(fn(spec))
        trials += 1
        p = find_critical_probability(fn(spec), prof.certificate_complexity(), eps, delta, rng)
        hits += abs(p - prof.critical_probability()) <= eps
    assert hits >= trials * (1 - 2 * delta)


def test_influence_examples_and_query_count():
    rng = np.random.default_rng(7)
    f = fn(FunctionSpec.dictator(6, 1))
    est = estimate_influences(f, 0.5, 0.05, 0.01, rng)
    assert f.query_count == influence_sample_size(6, 0.05, 0.01) == 2 * sample_count(0.05 / 8, 0.01 / 7)
    assert abs(est.values[0] - 1.0) <= 0.05
    assert np.all(est.values[1:] <= 0.05)
    maj = estimate_influences(fn(FunctionSpec.majority(3)), 0.5, 0.05, 0.01, rng)
    assert np.all(np.abs(maj.values - 0.5) <= 0.05)
    const = estimate_influences(fn(FunctionSpec.constant(4, 1)), 0.3, 0.05, 0.01, rng)
    assert np.all(const.values == 0)


def test_influences_at_degenerate_bias():
    f = fn(FunctionSpec.majority(3))
    est = estimate_influences(f, 0.0, 0.1, 0.1, np.random.default_rng(0))
    assert f.query_count == 0 and np.all(est.values == 0)
    with pytest.raises(ValueError):
        est.flip()


def test_influence_coverage_against_exact():
    rng = np.random.default_rng(8)
    delta = 0.1
    hits = 0
    for _ in range(100):
        spec = random_dnf(rng, 3, 10)
        p = float(rng.uniform(0.1, 0.9))
        eps = 0.1
        est = estimate_influences(fn(spec), p, eps, delta, rng)
        exact = 4 * p * (1 - p) * ExactProfile(fn(spec)).flip_influences(p)
        assert np.all((0 <= est.values) & (est.values <= 1))
        assert np.allclose(est.flip() * 4 * p * (1 - p), est.values)
        hits += bool(np.all(np.abs(est.values - exact) <= eps))
    assert hits >= 100 * (1 - 2 * delta)


def test_influence_subset_and_argmax_ties():
    est = estimate_influences(fn(FunctionSpec.majority(5)), 0.5, 0.1, 0.1, np.random.default_rng(9), coords=[2, 4])
    assert est.values[0] == est.values[2] == est.values[4] == 0
    est.values[:] = [0.2, 0.5, 0.5, 0.1, 0.5]
    assert est.argmax() == 2
    assert est.argmax([3, 5]) == 3


def test_results_do_not_depend_on_worker_count():
    spec = FunctionSpec.tribes(9, 3, 3)
    params = EstimationParams(0.002, 0.01)  # spans several chunks
    one = estimate_phi(fn(spec), 0.6, params, np.random.default_rng(10), workers=1)
    three = estimate_phi(fn(spec), 0.6, params, np.random.default_rng(10), workers=3)
    assert one == three
    a = estimate_influences(fn(spec), 0.6, 0.01, 0.01, np.random.default_rng(11), workers=1)
    b = estimate_influences(fn(spec), 0.6, 0.01, 0.01, np.random.default_rng(11), workers=2)
    assert np.array_equal(a.values, b.values)
