import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iwaa.clustering import (
    GridEntry,
    cluster_report,
    cross_validate,
    default_grid,
    kmeans,
    silhouette,
    silhouette_samples,
    spectral_cluster,
)
from iwaa.core import DegenerateInputError, IWAAError


def blobs(seed=0, n=30, sigma=0.01):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.1, 0.1, 0.1], [0.8, 0.1, 0.2], [0.3, 0.9, 0.6]])
    X = np.vstack([c + rng.normal(0, sigma, (n, 3)) for c in centers])
    return np.clip(X, 0, 1), np.repeat(np.arange(3), n), centers


def nearest_centroid(X, centers):
    # exhaustive oracle: distance to every generating center
    d = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(-1)
    return d.argmin(1)


def pure(labels, truth):
    return all(len(set(labels[truth == t])) == 1 for t in set(truth)) and len(set(labels)) == len(set(truth))


def brute_silhouette(X, labels):
    n = len(X)
    out = []
    for i in range(n):
        same = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not same:
            out.append(0.0)
            continue
        a = np.mean([np.linalg.norm(X[i] - X[j]) for j in same])
        b = min(
            np.mean([np.linalg.norm(X[i] - X[j]) for j in range(n) if labels[j] == c])
            for c in set(labels) if c != labels[i]
        )
        out.append((b - a) / max(a, b) if max(a, b) > 0 else 0.0)
    return float(np.mean(out))


class TestSpectral:
    def test_two_identical_groups(self):
        X = np.vstack([np.zeros((50, 3)), np.ones((50, 3))])
        labels = spectral_cluster(X, 2, 0.8)
        assert len(set(labels[:50])) == 1 and len(set(labels[50:])) == 1 and labels[0] != labels[50]

    def test_all_identical(self):
        with pytest.raises(DegenerateInputError):
            spectral_cluster(np.full((10, 3), 0.3), 2, 0.8)

    @pytest.mark.parametrize("k,gamma", [(1, 0.8), (2, 0.0), (2, -1.0)])
    def test_preconditions(self, k, gamma):
        X, _, _ = blobs()
        with pytest.raises(DegenerateInputError):
            spectral_cluster(X, k, gamma)

    def test_three_blobs_match_oracle(self):
        X, _, centers = blobs()
        oracle = nearest_centroid(X, centers)
        labels = spectral_cluster(X, 3, 0.8)
        assert pure(labels, oracle)

    def test_deterministic(self):
        X, _, _ = blobs(seed=3)
        assert np.array_equal(spectral_cluster(X, 3, 0.5, seed=4), spectral_cluster(X, 3, 0.5, seed=4))

    @given(st.tuples(*[st.floats(-0.5, 0.5)] * 3))
    @settings(max_examples=20, deadline=None)
    def test_translation_invariant(self, shift):
        X, _, _ = blobs(seed=1, n=15)
        base = spectral_cluster(X, 3, 0.6)
        moved = spectral_cluster(X + np.array(shift), 3, 0.6)
        assert np.array_equal(base, moved)


def test_kmeans_blobs():
    X, truth, _ = blobs(seed=2)
    labels, inertia = kmeans(X, 3, seed=0)
    assert pure(labels, truth) and inertia > 0


class TestSilhouette:
    def test_far_blobs(self):
        rng = np.random.default_rng(5)
        X = np.vstack([rng.normal(0, 0.01, (20, 3)), rng.normal(1, 0.01, (20, 3))])
        labels = np.repeat([0, 1], 20)
        s = silhouette(X, labels)
        assert s > 0.9 and s == pytest.approx(brute_silhouette(X, labels), abs=1e-12)

    def test_interleaved(self):
        rng = np.random.default_rng(6)
        X = rng.uniform(0, 1, (200, 3))
        labels = np.arange(200) % 2
        s = silhouette(X, labels)
        assert abs(s) < 0.1 and s == pytest.approx(brute_silhouette(X, labels), abs=1e-12)

    def test_singleton_zero(self):
        X = np.array([[0, 0, 0], [0.1, 0, 0], [1, 1, 1.0]])
        labels = np.array([0, 0, 1])
        assert silhouette_samples(X, labels)[2] == 0.0

    def test_single_cluster(self):
        with pytest.raises(IWAAError):
            silhouette(np.random.default_rng(0).uniform(size=(5, 3)), np.zeros(5, int))

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_brute_and_permutation(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 25))
        X = rng.uniform(size=(n, 3))
        labels = rng.integers(0, 3, n)
        labels[:3] = [0, 0, 1]
        s = silhouette(X, labels)
        assert s == pytest.approx(brute_silhouette(X, labels), abs=1e-10)
        perm = rng.permutation(3)
        assert silhouette(X, perm[labels]) == pytest.approx(s, abs=1e-12)


class TestCrossValidate:
    def test_one_entry(self):
        X, _, _ = blobs()
        entry = GridEntry("Spectral", (("k", 4), ("gamma", 0.5)))
        r = cross_validate(X, [entry])
        assert (r.best.algorithm, r.best.hyperparameters) == ("Spectral", {"k": 4, "gamma": 0.5})

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            cross_validate(blobs()[0], [])

    def test_all_degenerate(self):
        X = np.vstack([np.zeros((5, 3)), np.ones((5, 3))])
        with pytest.raises(DegenerateInputError):
            cross_validate(X, [GridEntry("KMeans", (("k", 3),))])

    def test_full_grid_blobs_pure_and_argmax(self):
        X, truth, _ = blobs(seed=4)
        r = cross_validate(X, default_grid())
        assert pure(r.best.labels, truth)
        scored = [s for _, s in r.scores if s is not None]
        assert r.best.silhouette >= max(scored) - 1e-12

    def test_deterministic(self):
        X, _, _ = blobs(seed=8, sigma=0.05)
        a = cross_validate(X, default_grid(), seed=3)
        b = cross_validate(X, default_grid(), seed=3)
        assert np.array_equal(a.best.labels, b.best.labels)
        assert [s for _, s in a.scores] == [s for _, s in b.scores]

    def test_mostly_passive_population(self):
        # two passive groups make up >90%, one small reactive group
        rng = np.random.default_rng(0)
        centers = [(0.02, 0.05, 0.01), (0.3, 0.5, 0.05), (0.7, 0.8, 0.2)]
        X = np.vstack([np.clip(rng.normal(c, 0.04, (n, 3)), 0, 1) for c, n in zip(centers, (120, 60, 20))])
        grid = [GridEntry("Spectral", (("k", k), ("gamma", g))) for k in range(3, 11) for g in (0.8, 0.6, 0.5, 0.4)]
        r = cross_validate(X, grid)
        assert r.best.algorithm == "Spectral"
        assert r.best.hyperparameters == {"k": 3, "gamma": 0.8}


def _report_inputs(seed=0, n=40):
    rng = np.random.default_rng(seed)
    seekers = [f"s{i}" for i in range(n)]
    assign = {s: int(rng.integers(0, 3)) for s in seekers}
    profiles = {}
    for s in seekers:
        r, l, a = rng.uniform(size=3) * (assign[s] + 1) / 3
        profiles[s] = {"avg_r": r, "avg_l": l, "avg_a": a, "avg_f": rng.uniform(), "effortless": min(1, r + l)}
    feats = {s: {"rate_tweets": rng.exponential()} for s in seekers}
    experts = {s: [f"e{rng.integers(0, 5)}"] for s in seekers}
    efeats = {f"e{i}": {"rate_tweets": float(i)} for i in range(5)}
    listed = {s: int(rng.integers(0, 700)) for s in seekers}
    return assign, profiles, efeats, feats, experts, listed


@given(st.integers(0, 1000))
@settings(max_examples=20, deadline=None)
def test_report_contract(seed):
    rep = cluster_report(*_report_inputs(seed))
    assert sum(rep.proportions.values()) == pytest.approx(1.0)
    eff = [rep.signals[c]["effortless"] for c in sorted(rep.signals)]
    assert eff == sorted(eff)
    for rows in rep.listed.values():
        fr = [f for _, f in rows]
        assert rows[0][0] == 10 and rows[-1][0] == 600 and fr == sorted(fr, reverse=True)


def test_report_missing_assignment():
    assign, profiles, *rest = _report_inputs()
    del assign["s0"]
    with pytest.raises(IWAAError):
        cluster_report(assign, profiles, *rest)


def test_report_writes(tmp_path):
    rep = cluster_report(*_report_inputs())
    paths = rep.write(tmp_path)
    names = {p.name for p in paths}
    assert {"proportions.csv", "signals.csv", "listed.csv"} <= names
    assert any(n.startswith("icdf_expert_rate_tweets_c") for n in names)
