import numpy as np
import pytest

from certkit import ExactProfile, FunctionSpec

_criteria: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of a numbered acceptance criterion for the summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _criteria[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        passed, detail = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def random_dnf(rng: np.random.Generator, n_low: int = 4, n_high: int = 14) -> FunctionSpec:
    """Monotone DNF with at most 3 terms of width at most 4."""
    n = int(rng.integers(n_low, n_high + 1))
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        width = int(rng.integers(1, min(4, n) + 1))
        terms.append((rng.choice(n, size=width, replace=False) + 1).tolist())
    return FunctionSpec.monotone_dnf(n, terms)


def family_specs(max_n: int = 12) -> list[FunctionSpec]:
    """The named test families up to dimension ``max_n``."""
    specs = []
    for n in range(1, max_n + 1):
        specs.append(FunctionSpec.dictator(n, 1))
        specs.append(FunctionSpec.conjunction(n, range(1, n + 1)))
        specs.append(FunctionSpec.conjunction(n, range(1, min(n, 2) + 1)))
        if n % 2:
            specs.append(FunctionSpec.majority(n))
    for w, s in [(1, 2), (2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (4, 3), (3, 4), (2, 6)]:
        if w * s <= max_n:
            specs.append(FunctionSpec.tribes(w * s, w, s))
    specs.append(FunctionSpec.monotone_dnf(12, [[1, 2, 3], [3, 4], [5, 6, 7, 8], [2, 9, 12]]))
    specs.append(FunctionSpec.monotone_dnf(10, [[1], [2, 3], [4, 5, 6]]))
    specs.append(FunctionSpec.subcube(7, {2: 1, 5: 1, 6: 1}))
    return specs


def spec_id(spec: FunctionSpec) -> str:
    return spec.to_json().replace(" ", "")


def check_identities(prof, p, tol=1e-10):
    n = prof.n
    flip = prof.flip_influences(p)
    rer = prof.rerandomized_influences(p)
    phi = prof.phi(p)
    assert abs(flip.sum() - prof.expected_sensitivity(p)) <= tol
    for i in range(1, n + 1):
        hi = prof.restriction_phi(i, 1, p)
        lo = prof.restriction_phi(i, 0, p)
        # monotone: f_{x_i=1} != f_{x_i=0} exactly when f_{x_i=1} = 1 and f_{x_i=0} = 0
        assert abs(flip[i - 1] - (hi - lo)) <= tol
        assert abs(rer[i - 1] - 4 * p * (1 - p) * flip[i - 1]) <= tol
        assert abs(phi - (lo + p * flip[i - 1])) <= tol
        assert abs(phi - (hi - (1 - p) * flip[i - 1])) <= tol
    assert rer.sum() >= phi * (1 - phi) - tol


def critical_or_limit(prof):
    if prof.is_constant:
        return 1.0 if prof.table[0] == 0 else 0.0
    return prof.critical_probability(tol=1e-13)


def sub_profile(prof, i, b):
    sub = np.take(prof.cube, b, axis=i - 1).reshape(-1)
    return ExactProfile(sub, prof.n - 1)
