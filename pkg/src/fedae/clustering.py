"""Seeded K-means over latent vectors.

k-means++ initialization, Lloyd iterations with a Frobenius-norm shift
stopping rule, and deterministic empty-cluster repair. Distances are exact
squared Euclidean computed by broadcasting, so the recorded inertia trace is
non-increasing without floating-point caveats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Matrix = np.ndarray


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: Matrix
    inertia: float
    iterations_run: int
    inertia_history: list[float]


def _distances_sq(points: Matrix, centroids: Matrix) -> Matrix:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plus_plus_init(points: Matrix, k: int, rng: np.random.Generator) -> Matrix:
    """k-means++: first centroid uniform, the rest sampled proportional to
    squared distance from the nearest centroid chosen so far."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    centroids[0] = points[rng.integers(n)]
    if k == 1:
        return centroids
    best_d2 = _distances_sq(points, centroids[:1])[:, 0]
    for j in range(1, k):
        total = best_d2.sum()
        if total > 0.0:
            idx = rng.choice(n, p=best_d2 / total)
        else:
            # all points coincide with chosen centroids; fall back to uniform
            idx = rng.integers(n)
        centroids[j] = points[idx]
        d2_new = _distances_sq(points, centroids[j : j + 1])[:, 0]
        best_d2 = np.minimum(best_d2, d2_new)
    return centroids


def _repair_empty(points: Matrix, centroids: Matrix, labels: np.ndarray, d2: Matrix) -> bool:
    """Move each empty centroid onto the point farthest from its assigned
    centroid, claiming that point. Returns True if anything moved.

    Re-examines counts after every move because stealing a cluster's only
    member empties it in turn; the pass count is capped at k so degenerate
    all-duplicate inputs cannot cycle forever.
    """
    k = centroids.shape[0]
    moved = False
    for _ in range(k):
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            break
        j = int(empty[0])
        assigned_d2 = d2[np.arange(points.shape[0]), labels]
        farthest = int(np.argmax(assigned_d2))
        centroids[j] = points[farthest]
        labels[farthest] = j
        d2[:, j] = _distances_sq(points, centroids[j : j + 1])[:, 0]
        moved = True
    return moved


def kmeans_fit(
    points: Matrix,
    k: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-4,
) -> KMeansResult:
    """Lloyd K-means with k-means++ seeding.

    Iterates until the Frobenius norm of the centroid displacement falls
    below tol or max_iter is reached. inertia_history records the objective
    after every assignment phase and is non-increasing. At return, every
    point is assigned to a nearest centroid.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"points must be 2-D, got {points.ndim} dimensions")
    n = points.shape[0]
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds point count {n}")

    rng = np.random.default_rng(seed)
    centroids = _plus_plus_init(points, k, rng)

    history: list[float] = []
    labels = np.zeros(n, dtype=np.int64)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        d2 = _distances_sq(points, centroids)
        labels = np.argmin(d2, axis=1)
        _repair_empty(points, centroids, labels, d2)
        history.append(float(d2[np.arange(n), labels].sum()))

        new_centroids = np.empty_like(centroids)
        for j in range(k):
            members = points[labels == j]
            # a cluster can stay empty only in degenerate all-duplicate data;
            # keep its centroid in place rather than averaging nothing
            new_centroids[j] = members.mean(axis=0) if members.shape[0] else centroids[j]
        shift = float(np.linalg.norm(new_centroids - centroids))
        centroids = new_centroids
        if shift < tol:
            break

    # settle the final assignment against the final centroids; a repair here
    # moves a centroid, so reassign until no cluster is empty (bounded loop:
    # each pass strictly shrinks unassigned mass except in degenerate
    # all-duplicate inputs, which the bound tolerates)
    for _ in range(k + 1):
        d2 = _distances_sq(points, centroids)
        labels = np.argmin(d2, axis=1)
        if not _repair_empty(points, centroids, labels, d2):
            break
    inertia = float(d2[np.arange(n), labels].sum())
    history.append(inertia)

    return KMeansResult(
        labels=labels.astype(np.int64),
        centroids=centroids,
        inertia=inertia,
        iterations_run=iterations,
        inertia_history=history,
    )
