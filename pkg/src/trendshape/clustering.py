"""K-means and Ward agglomerative clustering with silhouette and
Davies-Bouldin evaluation, all over plain Euclidean feature rows.

K-means is deterministic for a given (seed, restarts): restart r draws from
an independent generator seeded (seed, r), and the lowest-inertia restart
wins with index as tiebreak.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidK, UndefinedScore


class Method(enum.Enum):
    KMEANS = "KMEANS"
    WARD = "WARD"


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """n equal-length feature rows with keyword labels."""

    labels: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError(f"rows must be 2-d, got shape {rows.shape}")
        if rows.shape[0] < 2:
            raise ValueError("feature matrix needs at least 2 rows")
        if len(self.labels) != rows.shape[0]:
            raise ValueError("one label per row required")
        if not np.all(np.isfinite(rows)):
            raise ValueError("feature matrix contains non-finite entries")
        rows = rows.copy()
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    labels: np.ndarray
    k: int
    method: Method
    inertia: float | None = None
    inertia_history: tuple[float, ...] | None = None
    merge_history: tuple[tuple[int, int, float], ...] | None = None

    def members(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, tuple[int, ...]] = {}
        for cid in range(self.k):
            out[cid] = tuple(int(i) for i in np.nonzero(self.labels == cid)[0])
        return out


@dataclass(frozen=True)
class EvaluationScores:
    silhouette: float
    davies_bouldin: float


def _inertia(rows: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> float:
    return float(((rows - centers[labels]) ** 2).sum())


def _kmeanspp_init(rows: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Classic k-means++: each new center drawn with probability proportional
    to squared distance from the nearest already-chosen center.

    Candidates are scanned in lexicographic point order, so the same random
    quantiles select the same points whatever the row order; this keeps the
    final partition invariant under row permutation (up to exact ties).
    """
    n = rows.shape[0]
    pts = rows[np.lexsort(rows.T[::-1])]
    centers = np.empty((k, rows.shape[1]))
    centers[0] = pts[min(int(rng.random() * n), n - 1)]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        u = rng.random()
        if total <= 0.0:
            idx = min(int(u * n), n - 1)
        else:
            idx = min(int(np.searchsorted(np.cumsum(d2), u * total, side="right")), n - 1)
        centers[c] = pts[idx]
        d2 = np.minimum(d2, ((pts - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(rows: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    """Lloyd iterations until the assignment reaches a fixpoint.

    Empty clusters are repaired by stealing the point farthest from its
    current center (from a cluster that can spare it); inertia is recorded
    after every centroid update and never increases.
    """
    n, k = rows.shape[0], centers.shape[0]
    labels = None
    history: list[float] = []
    for _ in range(max_iter):
        d2 = cdist(rows, centers, metric="sqeuclidean")
        new_labels = d2.argmin(axis=1)

        counts = np.bincount(new_labels, minlength=k)
        for empty in np.nonzero(counts == 0)[0]:
            dist_own = d2[np.arange(n), new_labels]
            dist_own[counts[new_labels] <= 1] = -np.inf
            thief = int(dist_own.argmax())
            counts[new_labels[thief]] -= 1
            new_labels[thief] = empty
            counts[empty] += 1

        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            member = rows[labels == c]
            if len(member):
                centers[c] = member.mean(axis=0)
        history.append(_inertia(rows, centers, labels))
    assert labels is not None
    return labels, centers, history


def _run_kmeans(rows: np.ndarray, k: int, inits: list[np.ndarray]):
    best = None
    for centers in inits:
        labels, fitted, history = _lloyd(rows, centers.copy())
        inertia = history[-1]
        if best is None or inertia < best[2]:
            best = (labels, fitted, inertia, history)
    assert best is not None
    return best


def kmeans(m: FeatureMatrix, k: int, seed: int, restarts: int = 10) -> ClusteringResult:
    """Best of `restarts` k-means++ + Lloyd runs by final inertia."""
    if not 1 <= k <= m.n:
        raise InvalidK(f"need 1 <= k <= {m.n}, got {k}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    inits = [
        _kmeanspp_init(m.rows, k, np.random.default_rng([seed, r]))
        for r in range(restarts)
    ]
    labels, _, inertia, history = _run_kmeans(m.rows, k, inits)
    return ClusteringResult(
        labels=labels,
        k=k,
        method=Method.KMEANS,
        inertia=inertia,
        inertia_history=tuple(history),
    )


@dataclass(frozen=True)
class ElbowResult:
    points: tuple[tuple[int, float], ...]
    knee: int | None


def elbow_curve(
    m: FeatureMatrix, k_range, seed: int = 0, restarts: int = 10
) -> ElbowResult:
    """Best-run inertia per k, plus the knee (max second difference).

    Each k also warm-starts from the previous best centroids plus the point
    farthest from them, which keeps the reported curve nonincreasing in k.
    """
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise ValueError("empty k_range")
    if ks[0] < 1 or ks[-1] > m.n:
        raise InvalidK(f"k_range must lie within [1, {m.n}], got [{ks[0]}, {ks[-1]}]")

    points: list[tuple[int, float]] = []
    prev_centers: np.ndarray | None = None
    for k in ks:
        inits = [
            _kmeanspp_init(m.rows, k, np.random.default_rng([seed, k, r]))
            for r in range(restarts)
        ]
        if prev_centers is not None and prev_centers.shape[0] == k - 1:
            d2 = cdist(m.rows, prev_centers, metric="sqeuclidean").min(axis=1)
            extra = m.rows[int(d2.argmax())][None, :]
            inits.append(np.vstack([prev_centers, extra]))
        labels, centers, inertia, _ = _run_kmeans(m.rows, k, inits)
        prev_centers = centers
        points.append((k, inertia))

    knee = None
    if len(points) >= 3:
        inertias = np.array([p[1] for p in points])
        second = inertias[:-2] - 2.0 * inertias[1:-1] + inertias[2:]
        knee = points[int(second.argmax()) + 1][0]
    return ElbowResult(points=tuple(points), knee=knee)


def ward_cluster(m: FeatureMatrix, k: int) -> ClusteringResult:
    """Bottom-up Ward merging via the Lance-Williams update.

    Heights are variance-increase merge costs |A||B|/(|A|+|B|) * ||cA - cB||^2;
    ties break on the smallest (a, b) cluster-id pair. New clusters take ids
    n, n+1, ... in merge order.
    """
    if not 1 <= k <= m.n:
        raise InvalidK(f"need 1 <= k <= {m.n}, got {k}")
    n = m.n
    # D holds twice the merge cost; for singletons that is squared distance
    dist: dict[tuple[int, int], float] = {}
    d0 = cdist(m.rows, m.rows, metric="sqeuclidean")
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(d0[i, j])

    sizes = {i: 1 for i in range(n)}
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    merges: list[tuple[int, int, float]] = []
    next_id = n

    while len(sizes) > k:
        (a, b), dab = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        merges.append((a, b, dab / 2.0))

        na, nb = sizes[a], sizes[b]
        new_members = members.pop(a) + members.pop(b)
        del sizes[a], sizes[b]
        del dist[(a, b)]
        updates = {}
        for c in sizes:
            nc = sizes[c]
            dac = dist.pop((min(a, c), max(a, c)))
            dbc = dist.pop((min(b, c), max(b, c)))
            updates[c] = ((na + nc) * dac + (nb + nc) * dbc - nc * dab) / (na + nb + nc)
        sizes[next_id] = na + nb
        members[next_id] = new_members
        for c, v in updates.items():
            dist[(min(c, next_id), max(c, next_id))] = v
        next_id += 1

    # label clusters 0..k-1 by smallest member row index
    final = sorted(members.values(), key=min)
    labels = np.empty(n, dtype=np.int64)
    for cid, rows_in in enumerate(final):
        labels[rows_in] = cid
    return ClusteringResult(
        labels=labels, k=k, method=Method.WARD, merge_history=tuple(merges)
    )


def silhouette(m: FeatureMatrix, labels) -> float:
    """Mean over points of (b - a)/max(a, b); singleton points contribute 0."""
    labels = np.asarray(labels)
    present = np.unique(labels)
    if present.size < 2:
        raise UndefinedScore("silhouette needs at least 2 clusters")
    dm = cdist(m.rows, m.rows)
    scores = np.zeros(m.n)
    for i in range(m.n):
        own = labels == labels[i]
        if own.sum() == 1:
            continue
        a = dm[i, own].sum() / (own.sum() - 1)
        b = min(dm[i, labels == c].mean() for c in present if c != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def davies_bouldin(m: FeatureMatrix, labels) -> float:
    """Mean over clusters of the worst (S_i + S_j) / dist(c_i, c_j) ratio."""
    labels = np.asarray(labels)
    present = np.unique(labels)
    if present.size < 2:
        raise UndefinedScore("Davies-Bouldin needs at least 2 clusters")
    centroids = np.vstack([m.rows[labels == c].mean(axis=0) for c in present])
    spread = np.array(
        [
            cdist(m.rows[labels == c], centroids[ci : ci + 1]).mean()
            for ci, c in enumerate(present)
        ]
    )
    sep = cdist(centroids, centroids)
    ratios = np.zeros(present.size)
    for i in range(present.size):
        worst = 0.0
        for j in range(present.size):
            if i == j:
                continue
            if sep[i, j] == 0.0:
                raise UndefinedScore(
                    f"clusters {present[i]} and {present[j]} have coincident centroids"
                )
            worst = max(worst, (spread[i] + spread[j]) / sep[i, j])
        ratios[i] = worst
    return float(ratios.mean())


def evaluate(m: FeatureMatrix, labels) -> EvaluationScores:
    return EvaluationScores(
        silhouette=silhouette(m, labels), davies_bouldin=davies_bouldin(m, labels)
    )
