"""Deterministic k-means with medoid extraction and silhouette-based k choice."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KmeansResult:
    medoid_indices: tuple[int, ...]
    counts: tuple[int, ...]
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float

    @property
    def k(self) -> int:
        return len(self.medoid_indices)

    def medoids(self, candidates) -> list:
        return [candidates[i] for i in self.medoid_indices]


def kmeans_reduce(candidates, k: int, seed: int = 0, max_iter: int = 300) -> KmeansResult:
    """Cluster 24-h (or any fixed-length) profiles and return medoids + counts.

    Deterministic under a fixed seed: k-means++ seeding from a seeded
    generator, Lloyd iterations with first-index tie-breaking, empty clusters
    reseeded to the farthest point.  Medoids are the actual members closest to
    each final centroid.
    """
    x = np.asarray([np.asarray(c, dtype=float).ravel() for c in candidates])
    n = len(x)
    if n == 0:
        raise ValueError("empty candidate set")
    if not 0 < k <= n:
        raise ValueError(f"k={k} outside 1..{n}")

    if k == n:
        order = np.arange(n)
        return KmeansResult(tuple(order), tuple([1] * n), order.copy(), x.copy(), 0.0)

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp(x, k, rng)
    assignments = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        dist = _sq_distances(x, centroids)
        new_assign = np.argmin(dist, axis=1)
        for c in range(k):
            if (new_assign == c).any():
                continue
            # reseed an empty cluster at the farthest point that is not the
            # sole member of its own cluster (n >= k guarantees one exists)
            own_dist = dist[np.arange(n), new_assign].copy()
            counts = np.bincount(new_assign, minlength=k)
            own_dist[counts[new_assign] <= 1] = -np.inf
            farthest = int(np.argmax(own_dist))
            new_assign[farthest] = c
        for c in range(k):
            centroids[c] = x[new_assign == c].mean(axis=0)
        if np.array_equal(new_assign, assignments):
            assignments = new_assign
            break
        assignments = new_assign

    dist = _sq_distances(x, centroids)
    inertia = float(dist[np.arange(n), assignments].sum())
    medoid_indices = []
    counts = []
    for c in range(k):
        members = np.flatnonzero(assignments == c)
        medoid_indices.append(int(members[np.argmin(dist[members, c])]))
        counts.append(int(len(members)))
    return KmeansResult(tuple(medoid_indices), tuple(counts), assignments, centroids, inertia)


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centroids = [x[int(rng.integers(n))]]
    for _ in range(1, k):
        d2 = np.min(_sq_distances(x, np.asarray(centroids)), axis=1)
        total = d2.sum()
        if total <= 0:
            centroids.append(x[int(rng.integers(n))])
            continue
        probs = d2 / total
        centroids.append(x[int(rng.choice(n, p=probs))])
    return np.asarray(centroids, dtype=float)


def _sq_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def silhouette_score(x: np.ndarray, assignments: np.ndarray) -> float:
    """Mean silhouette over all points; singleton clusters score zero."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    labels = np.unique(assignments)
    if len(labels) < 2:
        return 0.0
    dist = np.sqrt(_sq_distances(x, x))
    scores = np.zeros(n)
    for i in range(n):
        own = assignments == assignments[i]
        n_own = own.sum()
        if n_own <= 1:
            scores[i] = 0.0
            continue
        a = dist[i, own].sum() / (n_own - 1)
        b = min(dist[i, assignments == lab].mean() for lab in labels if lab != assignments[i])
        scores[i] = (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return float(scores.mean())


def choose_k(candidates, k_max: int, seed: int = 0) -> int:
    """Silhouette-based cluster count, capped at k_max; ties go to smaller k."""
    x = np.asarray([np.asarray(c, dtype=float).ravel() for c in candidates])
    n = len(x)
    upper = min(k_max, n - 1)
    if upper < 2:
        return 1
    best_k, best_score = 1, -np.inf
    for k in range(2, upper + 1):
        result = kmeans_reduce(candidates, k, seed=seed)
        score = silhouette_score(x, result.assignments)
        if score > best_score + 1e-12:
            best_k, best_score = k, score
    return best_k
