from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bessplan.scenarios import choose_k, kmeans_reduce, silhouette_score


def synthetic_days(rng, count, sunny):
    base = np.sin(np.linspace(0, np.pi, 24)) ** 1.5
    amp = 0.9 if sunny else 0.15
    return [amp * base + rng.normal(0, 0.01, 24) for _ in range(count)]


def test_saturated_clustering():
    rng = np.random.default_rng(3)
    days = synthetic_days(rng, 4, sunny=True)
    result = kmeans_reduce(days, k=4, seed=0)
    assert result.counts == (1, 1, 1, 1)
    assert sorted(result.medoid_indices) == [0, 1, 2, 3]


def test_two_separated_groups_recovered():
    rng = np.random.default_rng(7)
    sunny = synthetic_days(rng, 10, sunny=True)
    overcast = synthetic_days(rng, 8, sunny=False)
    result = kmeans_reduce(sunny + overcast, k=2, seed=1)
    labels = result.assignments
    assert len(set(labels[:10])) == 1
    assert len(set(labels[10:])) == 1
    assert labels[0] != labels[10]
    assert sorted(result.counts) == [8, 10]


def test_beats_random_assignment_baseline():
    rng = np.random.default_rng(11)
    days = [rng.uniform(0, 1, 24) for _ in range(30)]
    x = np.asarray(days)
    result = kmeans_reduce(days, k=5, seed=2)

    def wcss(assign):
        total = 0.0
        for c in range(5):
            members = x[assign == c]
            if len(members):
                total += ((members - members.mean(axis=0)) ** 2).sum()
        return total

    for trial in range(20):
        random_assign = np.random.default_rng(trial).integers(0, 5, size=30)
        assert result.inertia <= wcss(random_assign) + 1e-9


def test_determinism():
    rng = np.random.default_rng(5)
    days = synthetic_days(rng, 12, sunny=True) + synthetic_days(rng, 12, sunny=False)
    a = kmeans_reduce(days, k=3, seed=9)
    b = kmeans_reduce(days, k=3, seed=9)
    assert a.medoid_indices == b.medoid_indices
    assert a.counts == b.counts
    np.testing.assert_array_equal(a.assignments, b.assignments)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        kmeans_reduce([], k=1)
    with pytest.raises(ValueError):
        kmeans_reduce([np.ones(24)], k=0)
    with pytest.raises(ValueError):
        kmeans_reduce([np.ones(24)], k=2)


def test_choose_k_finds_two_groups():
    rng = np.random.default_rng(13)
    days = synthetic_days(rng, 9, sunny=True) + synthetic_days(rng, 9, sunny=False)
    assert choose_k(days, k_max=6, seed=4) == 2


def test_silhouette_bounds():
    rng = np.random.default_rng(17)
    x = np.vstack([rng.normal(0, 0.1, (6, 4)), rng.normal(5, 0.1, (6, 4))])
    labels = np.array([0] * 6 + [1] * 6)
    score = silhouette_score(x, labels)
    assert 0.9 < score <= 1.0


@settings(max_examples=20, deadline=None)
@given(
    n=st.integers(min_value=3, max_value=20),
    k=st.integers(min_value=1, max_value=5),
    seed=st.integers(min_value=0, max_value=1000),
)
def test_counts_conserve_membership(n, k, seed):
    if k > n:
        k = n
    rng = np.random.default_rng(seed)
    days = [rng.uniform(0, 1, 24) for _ in range(n)]
    result = kmeans_reduce(days, k=k, seed=seed)
    assert sum(result.counts) == n
    assert len(result.medoid_indices) == k
    assert all(0 <= i < n for i in result.medoid_indices)
