"""Clustering seekers by their reaction averages.

The main path is normalized spectral clustering (RBF affinity, symmetric
Laplacian, unit-row embedding, seeded k-means). KMeans, affinity propagation
and mean shift are available for the model-selection grid, which scores every
fit by the silhouette coefficient.
"""

from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.distance import cdist

from .core import DegenerateInputError, IWAAError
from .reactions import ICDFCurve, icdf, write_icdf

ALGORITHMS = ("KMeans", "Spectral", "AffinityPropagation", "MeanShift")
FEATURES = ("avg_r", "avg_l", "avg_a")


def canonical_labels(labels) -> np.ndarray:
    """Relabel so that clusters are numbered by first appearance."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    return rank[inverse].astype(int)


def _n_distinct_rows(X: np.ndarray) -> int:
    return len(np.unique(X, axis=0))


def _check_features(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DegenerateInputError("feature matrix must be a non-empty 2-D array")
    if not np.isfinite(X).all():
        raise DegenerateInputError("feature matrix has missing or infinite entries")
    return X


# -- k-means ---------------------------------------------------------------


def _kmeanspp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[int(rng.integers(n))]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _lloyd(X, centers, max_iter, tol):
    for _ in range(max_iter):
        d = cdist(X, centers, "sqeuclidean")
        labels = d.argmin(axis=1)
        new = centers.copy()
        for j in range(centers.shape[0]):
            members = X[labels == j]
            if len(members):
                new[j] = members.mean(axis=0)
        shift = ((new - centers) ** 2).sum()
        centers = new
        if shift <= tol:
            break
    d = cdist(X, centers, "sqeuclidean")
    labels = d.argmin(axis=1)
    inertia = float(d[np.arange(len(X)), labels].sum())
    return labels, inertia


def kmeans(X, k: int, seed: int = 0, n_init: int = 10, max_iter: int = 300, tol: float = 1e-10):
    """Lloyd's algorithm with k-means++ starts; best inertia over ``n_init`` runs.

    Returns ``(labels, inertia)``. Labels are canonical (first-appearance order).
    """
    X = _check_features(X)
    if k < 1 or k > X.shape[0]:
        raise DegenerateInputError(f"k={k} invalid for {X.shape[0]} rows")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        labels, inertia = _lloyd(X, _kmeanspp(X, k, rng), max_iter, tol)
        if best is None or inertia < best[1] - 1e-12:
            best = (labels, inertia)
    return canonical_labels(best[0]), best[1]


# -- spectral --------------------------------------------------------------


def rbf_affinity(X, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(X, X, "sqeuclidean"))


def spectral_embedding(A: np.ndarray, k: int) -> np.ndarray:
    """Rows of the k bottom eigenvectors of the symmetric normalized Laplacian, unit length."""
    deg = A.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = np.eye(A.shape[0]) - inv_sqrt[:, None] * A * inv_sqrt[None, :]
    lap = (lap + lap.T) / 2
    _, vecs = eigh(lap, subset_by_index=[0, k - 1])
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    return vecs / np.where(norms > 0, norms, 1.0)


def spectral_cluster(X, k: int, gamma: float, seed: int = 0) -> np.ndarray:
    X = _check_features(X)
    if k < 2:
        raise DegenerateInputError("spectral clustering needs k >= 2")
    if gamma <= 0:
        raise DegenerateInputError("gamma must be positive")
    if k > _n_distinct_rows(X):
        raise DegenerateInputError(f"k={k} exceeds the number of distinct rows")
    emb = spectral_embedding(rbf_affinity(X, gamma), k)
    labels, _ = kmeans(emb, k, seed=seed)
    return labels


# -- silhouette ------------------------------------------------------------


def silhouette_samples(X, labels, chunk: int = 2048) -> np.ndarray:
    """Per-sample silhouette with Euclidean distances; singletons score 0."""
    X = _check_features(X)
    labels = canonical_labels(labels)
    k = labels.max() + 1
    if k < 2:
        raise IWAAError("silhouette needs at least two clusters")
    sizes = np.bincount(labels, minlength=k)
    if sizes.max() < 2:
        raise IWAAError("silhouette needs a cluster with at least two members")
    onehot = np.zeros((len(labels), k))
    onehot[np.arange(len(labels)), labels] = 1.0
    out = np.empty(len(labels))
    for lo in range(0, len(labels), chunk):
        hi = min(lo + chunk, len(labels))
        sums = cdist(X[lo:hi], X) @ onehot  # distance sums to each cluster
        own = labels[lo:hi]
        rows = np.arange(hi - lo)
        own_size = sizes[own]
        a = np.where(own_size > 1, sums[rows, own] / np.maximum(own_size - 1, 1), 0.0)
        means = sums / sizes[None, :]
        means[rows, own] = np.inf
        b = means.min(axis=1)
        denom = np.maximum(a, b)
        s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
        out[lo:hi] = np.where(own_size > 1, s, 0.0)
    return out


def silhouette(X, labels) -> float:
    return float(silhouette_samples(X, labels).mean())


# -- model selection -------------------------------------------------------


@dataclass(frozen=True)
class GridEntry:
    algorithm: str
    params: tuple[tuple[str, float], ...]

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    def label(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.params)


@dataclass
class ClusterModel:
    algorithm: str
    hyperparameters: dict
    labels: np.ndarray
    silhouette: float

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1


def default_grid() -> list[GridEntry]:
    """Algorithms and hyperparameters cross-validated for the seeker clustering."""
    grid = [GridEntry("KMeans", (("k", k),)) for k in range(3, 11)]
    grid += [
        GridEntry("Spectral", (("k", k), ("gamma", g)))
        for k in range(3, 11)
        for g in (0.8, 0.6, 0.5, 0.4)
    ]
    grid += [GridEntry("AffinityPropagation", (("damping", d),)) for d in (0.6, 0.7, 0.8, 0.9)]
    grid += [GridEntry("MeanShift", (("bandwidth", b),)) for b in (1, 0.8, 0.6, 0.5)]
    return grid


def fit(X, entry: GridEntry, seed: int = 0) -> np.ndarray:
    X = _check_features(X)
    p = entry.param_dict
    if entry.algorithm == "KMeans":
        if p["k"] > _n_distinct_rows(X):
            raise DegenerateInputError("k exceeds the number of distinct rows")
        return kmeans(X, int(p["k"]), seed=seed)[0]
    if entry.algorithm == "Spectral":
        return spectral_cluster(X, int(p["k"]), float(p["gamma"]), seed=seed)
    if entry.algorithm == "AffinityPropagation":
        from sklearn.cluster import AffinityPropagation

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = AffinityPropagation(damping=float(p["damping"]), random_state=seed).fit(X)
        return canonical_labels(model.labels_)
    if entry.algorithm == "MeanShift":
        from sklearn.cluster import MeanShift

        model = MeanShift(bandwidth=float(p["bandwidth"])).fit(X)
        return canonical_labels(model.labels_)
    raise ValueError(f"unknown algorithm {entry.algorithm!r}")


@dataclass
class CVResult:
    best: ClusterModel
    scores: list[tuple[GridEntry, Optional[float]]] = field(default_factory=list)


def cross_validate(X, grid: Sequence[GridEntry], seed: int = 0) -> CVResult:
    """Fit every grid entry, score by silhouette and keep the maximizer.

    Ties go to fewer clusters, then to the earlier grid entry. Entries whose
    fit is degenerate (or yields a single cluster) are scored ``None``.
    """
    X = _check_features(X)
    if not grid:
        raise ValueError("empty grid")
    scores: list[tuple[GridEntry, Optional[float]]] = []
    best = None
    best_key = None
    for order, entry in enumerate(grid):
        try:
            labels = fit(X, entry, seed=seed)
            score = silhouette(X, labels)
        except (DegenerateInputError, IWAAError):
            scores.append((entry, None))
            continue
        scores.append((entry, score))
        key = (-round(score, 12), int(labels.max()) + 1, order)
        if best_key is None or key < best_key:
            best_key = key
            best = ClusterModel(entry.algorithm, entry.param_dict, labels, score)
    if best is None:
        raise DegenerateInputError("every grid entry produced a degenerate clustering")
    return CVResult(best, scores)


def write_cv_results(path, result: CVResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "params", "silhouette"])
        for entry, score in result.scores:
            w.writerow([entry.algorithm, entry.label(), "" if score is None else repr(score)])


# -- reporting -------------------------------------------------------------

LISTED_LEVELS = tuple(range(10, 601, 10))


@dataclass
class ClusterReport:
    relabel: dict[int, int]
    proportions: dict[int, float]
    signals: dict[int, dict[str, float]]
    seeker_icdfs: dict[tuple[int, str], ICDFCurve]
    expert_icdfs: dict[tuple[int, str], ICDFCurve]
    listed: dict[int, list[tuple[int, float]]]

    def write(self, directory) -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        written = []
        path = d / "proportions.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cluster", "proportion"])
            for c, v in sorted(self.proportions.items()):
                w.writerow([c, repr(v)])
        written.append(path)
        path = d / "signals.csv"
        cols = ("avg_r", "avg_l", "avg_a", "avg_f", "effortless")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("cluster",) + cols)
            for c, row in sorted(self.signals.items()):
                w.writerow([c] + [repr(row[k]) for k in cols])
        written.append(path)
        path = d / "listed.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cluster", "min_listed", "fraction"])
            for c, rows in sorted(self.listed.items()):
                for level, frac in rows:
                    w.writerow([c, level, repr(frac)])
        written.append(path)
        for role, curves in (("seeker", self.seeker_icdfs), ("expert", self.expert_icdfs)):
            for (c, feat), curve in sorted(curves.items()):
                path = d / f"icdf_{role}_{feat}_c{c}.csv"
                write_icdf(path, curve)
                written.append(path)
        return written


def cluster_report(
    assignments: Mapping[str, int],
    profiles: Mapping[str, Mapping[str, float]],
    expert_features: Mapping[str, Mapping[str, float]],
    seeker_features: Mapping[str, Mapping[str, float]],
    seeker_experts: Mapping[str, Sequence[str]],
    times_listed: Mapping[str, int],
    levels: Sequence[int] = LISTED_LEVELS,
) -> ClusterReport:
    """Per-cluster summaries, with clusters renumbered by increasing effortless mean."""
    missing = set(profiles) - set(assignments)
    if missing:
        raise IWAAError(f"{len(missing)} profiled seekers lack a cluster assignment")
    members: dict[int, list[str]] = {}
    for s in sorted(assignments):
        members.setdefault(int(assignments[s]), []).append(s)
    eff = {c: float(np.mean([profiles[s]["effortless"] for s in ss])) for c, ss in members.items()}
    order = sorted(members, key=lambda c: (eff[c], c))
    relabel = {old: new for new, old in enumerate(order)}
    total = len(assignments)

    proportions, signals, listed = {}, {}, {}
    seeker_icdfs, expert_icdfs = {}, {}
    for old in order:
        c = relabel[old]
        ss = members[old]
        proportions[c] = len(ss) / total
        signals[c] = {
            k: float(np.mean([profiles[s][k] for s in ss]))
            for k in ("avg_r", "avg_l", "avg_a", "avg_f", "effortless")
        }
        counts = np.array([times_listed.get(s, 0) for s in ss])
        listed[c] = [(int(l), float((counts >= l).mean())) for l in levels]
        feats = sorted({f for s in ss for f in seeker_features.get(s, {})})
        for f in feats:
            vals = [seeker_features[s][f] for s in ss if f in seeker_features.get(s, {})]
            seeker_icdfs[(c, f)] = icdf(vals)
        exps = sorted({e for s in ss for e in seeker_experts.get(s, ())})
        efeats = sorted({f for e in exps for f in expert_features.get(e, {})})
        for f in efeats:
            vals = [expert_features[e][f] for e in exps if f in expert_features.get(e, {})]
            expert_icdfs[(c, f)] = icdf(vals)
    return ClusterReport(relabel, proportions, signals, seeker_icdfs, expert_icdfs, listed)
