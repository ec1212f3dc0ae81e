"""End-to-end orchestration: ingest, roles, reactions, clustering, visibility.

Every stage persists its tables under the output directory and later stages
read them back, so any stage can be rerun on its own. A run manifest records
the configuration, input digests, per-stage row counts and a digest of every
emitted file. Wall-clock timings go to a separate file so that manifests of
identical runs are byte-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import clustering, reactions, roles, visibility
from .core import ConfigError, CoverageError, InputError, IWAAError, to_us
from .ingest import (
    bundled_config,
    format_time,
    generate_synthetic,
    load_events,
    load_roster,
    parse_time,
    write_dataset,
)

log = logging.getLogger(__name__)

PIPELINE_STAGES = ("ingest", "roles", "reactions", "cluster", "visibility")
STAGES = PIPELINE_STAGES + ("sweep", "report")
INPUT_KEYS = ("posts", "likes", "follows", "users", "lists")
MANIFEST = "run_manifest.json"
TIMINGS = "run_timings.json"


class StageError(IWAAError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    posts: str
    likes: str
    follows: str
    users: str
    lists: str
    out: str = "out"
    filter_policy: dict = field(default_factory=dict)
    min_listings: int = 10
    exposure: tuple = (100, 2)
    exposure_grid: list = field(default_factory=lambda: [[k, m] for k in (30, 60, 100) for m in (1, 2)])
    presence: dict = field(default_factory=lambda: {"a_l": 0.047, "a_r": 0.047, "session_gap": 240.0})
    window_days: int = 30
    reaction_window_days: Optional[float] = None
    clustering_grid: object = "default"
    seed: int = 0
    visibility_sample_size: Optional[int] = None
    visibility_clusters: str = "non_reacting"
    max_friends_visibility: int = 2500
    threshold_seconds: float = 3.0
    coverage: Optional[list] = None
    workers: int = 1

    # -- parsing ----------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, base: Optional[Path] = None) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = [k for k in INPUT_KEYS if k not in data]
        if missing:
            raise ConfigError(f"missing input paths: {missing}")
        data = dict(data)
        if base is not None:
            for k in INPUT_KEYS + ("out",):
                if k in data and not Path(data[k]).is_absolute():
                    data[k] = str(base / data[k])
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data, base=path.parent)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["exposure"] = list(self.exposure)
        return d

    def validate(self) -> None:
        paths = [str(Path(getattr(self, k)).resolve()) for k in INPUT_KEYS + ("out",)]
        if len(set(paths)) != len(paths):
            raise ConfigError("input and output paths must be distinct")
        if not self.exposure_grid:
            raise ConfigError("exposure_grid must be non-empty")
        if self.clustering_grid != "default" and not self.clustering_grid:
            raise ConfigError("clustering_grid must be non-empty")
        if self.window_days < 1:
            raise ConfigError("window_days must be >= 1")
        if self.visibility_clusters not in ("non_reacting", "all"):
            raise ConfigError("visibility_clusters must be 'non_reacting' or 'all'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        # build typed parameter objects once to surface errors early
        self.policy()
        self.threshold()
        self.exposure_params()
        self.exposure_grid_params()
        self.presence_params()
        self.grid()
        self.coverage_span()

    # -- typed views -------------------------------------------------------

    def policy(self) -> roles.FilterPolicy:
        try:
            return roles.FilterPolicy(**self.filter_policy)
        except TypeError as exc:
            raise ConfigError(f"filter_policy: {exc}") from exc

    def threshold(self) -> roles.ExpertThreshold:
        return roles.ExpertThreshold(int(self.min_listings))

    def exposure_params(self) -> visibility.ExposureParams:
        k, m = self.exposure
        return visibility.ExposureParams(int(k), int(m))

    def exposure_grid_params(self) -> list[visibility.ExposureParams]:
        try:
            return [visibility.ExposureParams(int(k), int(m)) for k, m in self.exposure_grid]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"exposure_grid: {exc}") from exc

    def presence_params(self) -> visibility.PresenceParams:
        try:
            return visibility.PresenceParams(**self.presence)
        except TypeError as exc:
            raise ConfigError(f"presence: {exc}") from exc

    def grid(self) -> list[clustering.GridEntry]:
        if self.clustering_grid == "default":
            return clustering.default_grid()
        try:
            return [
                clustering.GridEntry(e["algorithm"], tuple(sorted(e["params"].items())))
                for e in self.clustering_grid
            ]
        except (TypeError, KeyError, AttributeError) as exc:
            raise ConfigError(f"clustering_grid: {exc}") from exc

    def coverage_span(self) -> Optional[tuple[datetime, datetime]]:
        if self.coverage is None:
            return None
        try:
            lo, hi = (parse_time(x) for x in self.coverage)
        except Exception as exc:
            raise ConfigError(f"coverage: {exc}") from exc
        if lo >= hi:
            raise ConfigError("coverage must be an increasing pair")
        return lo, hi


# -- helpers ---------------------------------------------------------------


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class Context:
    """Lazily loaded inputs shared by the stages of one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self._events = None
        self._roster = None

    def load(self):
        if self._events is None:
            for k in INPUT_KEYS:
                p = Path(getattr(self.cfg, k))
                if not p.is_file():
                    raise InputError(f"missing {k} file: {p}")
            self._events, self.event_rejects = load_events(self.cfg.posts, self.cfg.likes)
            self._roster, self.roster_report = load_roster(
                self.cfg.follows, self.cfg.lists, self.cfg.users
            )
        return self._events, self._roster

    @property
    def events(self):
        return self.load()[0]

    @property
    def roster(self):
        return self.load()[1]

    def coverage(self) -> tuple[datetime, datetime]:
        span = self.cfg.coverage_span()
        if span is not None:
            return span
        times = [e.created_at for s in self.events.values() for e in s.events]
        if not times:
            raise InputError("no posts loaded; cannot infer data coverage")
        return min(times), max(times)

    def span_days(self) -> float:
        lo, hi = self.coverage()
        return max((to_us(hi) - to_us(lo)) / 86_400e6, 1e-9)

    def need(self, name: str) -> Path:
        path = self.out / name
        if not path.exists():
            raise InputError(f"intermediate {path} missing; run the producing stage first")
        return path


# -- stages ----------------------------------------------------------------


def stage_ingest(ctx: Context) -> dict:
    events, roster = ctx.load()
    rejects = ctx.event_rejects + ctx.roster_report.rejects
    with open(ctx.out / "rejects.jsonl", "w", encoding="utf-8") as fh:
        for r in rejects:
            fh.write(json.dumps(dataclasses.asdict(r), sort_keys=True) + "\n")
    n_events = sum(len(s.events) for s in events.values())
    n_likes = sum(len(s.likes) for s in events.values())
    summary = {
        "users_with_activity": len(events),
        "events": n_events,
        "likes": n_likes,
        "rejects": len(rejects),
        "roster_users": len(roster.users),
        "follow_edges": len(roster.follows),
        "lists": len(roster.lists),
        "duplicate_edges": ctx.roster_report.duplicate_edges,
        "self_edges": ctx.roster_report.self_edges,
        "empty_lists": ctx.roster_report.empty_lists,
    }
    _write_json(ctx.out / "ingest_summary.json", summary)
    return summary


def stage_roles(ctx: Context) -> dict:
    events, roster = ctx.load()
    th = ctx.cfg.threshold()
    experts = roles.identify_experts(roster.lists, th)
    creators = {lst.creator_id for lst in roster.lists}
    kept, dropped = roles.filter_seekers(creators, roster, events, ctx.cfg.policy())
    pairs = roles.build_pairs(roster.lists, experts, kept, roster)
    roles.check_pairs(pairs, kept, experts, roster)
    roles.write_pairs(ctx.out / "pairs.jsonl", pairs)
    roles.write_drops(ctx.out / "drops.jsonl", dropped)
    counts = roles.listing_counts(roster.lists)
    _write_csv(
        ctx.out / "experts.csv",
        ["topic", "expert_id", "listings"],
        [(t, e, counts[t][e]) for t in sorted(experts) for e in sorted(experts[t])],
    )
    reasons = {r: sum(1 for v in dropped.values() if v == r) for r in roles.DROP_REASONS}
    return {
        "pairs": len(pairs),
        "kept_seekers": len(kept),
        "dropped_seekers": len(dropped),
        "drop_reasons": reasons,
        "experts": sum(len(v) for v in experts.values()),
    }


def _reaction_windows(pairs, window_days):
    wins: dict[str, dict[str, list]] = {}
    for p in pairs:
        lo = None if window_days is None else p.list_created_at - timedelta(days=window_days)
        wins.setdefault(p.seeker_id, {}).setdefault(p.expert_id, []).append((lo, p.list_created_at))
    return wins


def stage_reactions(ctx: Context) -> dict:
    events, roster = ctx.load()
    pairs = roles.read_pairs(ctx.need("pairs.jsonl"))
    wins = _reaction_windows(pairs, ctx.cfg.reaction_window_days)
    profiles = []
    for s in pairs.seekers():
        seq = events.get(s, reactions.ActivitySequence())
        profiles.append(reactions.profile(s, wins[s].keys(), seq, roster, wins[s]))
    reactions.write_profiles(ctx.out / "reactions.csv", profiles)
    emitted = 0
    if profiles:
        for col in reactions.PROFILE_COLUMNS[1:]:
            curve = reactions.icdf([p.averages()[col] for p in profiles])
            reactions.write_icdf(ctx.out / f"icdf_{col}.csv", curve)
            emitted += 1
    # population features of seekers and experts
    span = ctx.span_days()
    groups = {"seeker": pairs.seekers(), "expert": sorted({p.expert_id for p in pairs})}
    rows = []
    for role, users in groups.items():
        feats = {
            u: reactions.user_features(u, events.get(u, reactions.ActivitySequence()), roster, span)
            for u in users
        }
        for u in users:
            rows.append([role, u] + [feats[u][f] for f in FEATURE_NAMES])
        if users:
            for f in FEATURE_NAMES:
                reactions.write_icdf(
                    ctx.out / f"icdf_feature_{role}_{f}.csv", reactions.icdf([feats[u][f] for u in users])
                )
                emitted += 1
    _write_csv(ctx.out / "features.csv", ["role", "user_id"] + list(FEATURE_NAMES), rows)
    return {"profiles": len(profiles), "icdf_tables": emitted}


FEATURE_NAMES = ("rate_tweets", "rate_retweets", "rate_answers", "rate_likes", "likes", "friends", "followers")


def _read_features(path):
    out = {"seeker": {}, "expert": {}}
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            out[r["role"]][r["user_id"]] = {f: float(r[f]) for f in FEATURE_NAMES}
    return out


def stage_cluster(ctx: Context) -> dict:
    _, roster = ctx.load()
    profiles = reactions.read_profiles(ctx.need("reactions.csv"))
    seekers = sorted(profiles)
    if len(seekers) < 2:
        raise IWAAError("fewer than two profiled seekers; nothing to cluster")
    X = np.array([[profiles[s][f] for f in clustering.FEATURES] for s in seekers])
    result = clustering.cross_validate(X, ctx.cfg.grid(), seed=ctx.cfg.seed)
    clustering.write_cv_results(ctx.out / "cv_results.csv", result)
    raw = {s: int(l) for s, l in zip(seekers, result.best.labels)}
    feats = _read_features(ctx.need("features.csv"))
    pairs = roles.read_pairs(ctx.need("pairs.jsonl"))
    seeker_experts = {s: pairs.experts_of(s) for s in seekers}
    report = clustering.cluster_report(
        raw,
        profiles,
        feats["expert"],
        feats["seeker"],
        seeker_experts,
        roles.times_listed(roster.lists),
    )
    labels = {s: report.relabel[l] for s, l in raw.items()}
    _write_csv(ctx.out / "clusters.csv", ["seeker_id", "label"], sorted(labels.items()))
    report.write(ctx.out / "cluster_report")
    best = result.best
    _write_json(
        ctx.out / "cluster_model.json",
        {
            "algorithm": best.algorithm,
            "hyperparameters": best.hyperparameters,
            "silhouette": best.silhouette,
            "n_clusters": best.n_clusters,
        },
    )
    return {"seekers": len(seekers), "clusters": best.n_clusters, "silhouette": round(best.silhouette, 12)}


def _read_clusters(path) -> dict[str, int]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {r["seeker_id"]: int(r["label"]) for r in csv.DictReader(fh)}


def sample_seekers(labels: dict[str, int], roster, cfg: RunConfig) -> list[str]:
    """Seeded uniform sample of seekers for the visibility stage, then the friend cutoff."""
    if cfg.visibility_clusters == "non_reacting":
        pool = sorted(s for s, l in labels.items() if l == 0)
    else:
        pool = sorted(labels)
    size = cfg.visibility_sample_size
    if size is not None and size < len(pool):
        rng = np.random.default_rng(cfg.seed)
        pool = sorted(rng.choice(pool, size=size, replace=False).tolist())
    return [s for s in pool if len(roster.friends(s)) < cfg.max_friends_visibility]


def _seeker_bounds(args):
    seeker_pairs, wall, seeker_posts, grid, pp, days, coverage = args
    out = {ep: [] for ep in grid}
    skipped = 0
    for p in seeker_pairs:
        try:
            res = visibility.pair_daily_bounds(p, wall, seeker_posts, grid, pp, days, coverage)
        except CoverageError:
            skipped += 1
            continue
        for ep, rows in res.items():
            out[ep].extend(rows)
    return out, skipped


def compute_bounds(ctx: Context, seekers: list[str], grid) -> tuple[dict, int]:
    events, roster = ctx.load()
    pairs = roles.read_pairs(ctx.need("pairs.jsonl")).by_seeker()
    coverage = ctx.coverage()
    pp = ctx.cfg.presence_params()
    tasks = []
    for s in seekers:
        if s not in pairs:
            continue
        wall = visibility.build_wall(s, roster, events)
        posts = events.get(s, reactions.ActivitySequence()).events
        tasks.append((tuple(pairs[s]), wall, posts, tuple(grid), pp, ctx.cfg.window_days, coverage))
    if ctx.cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=ctx.cfg.workers) as pool:
            results = list(pool.map(_seeker_bounds, tasks))
    else:
        results = [_seeker_bounds(t) for t in tasks]
    merged = {ep: [] for ep in grid}
    skipped = 0
    for res, sk in results:
        skipped += sk
        for ep, rows in res.items():
            merged[ep].extend(rows)
    return merged, skipped


def _averages_by_group(bounds, days):
    return {g: visibility.average_visibility(bounds, g, days) for g in visibility.GROUPS}


def stage_visibility(ctx: Context) -> dict:
    _, roster = ctx.load()
    labels = _read_clusters(ctx.need("clusters.csv"))
    seekers = sample_seekers(labels, roster, ctx.cfg)
    _write_csv(ctx.out / "visibility_sample.csv", ["seeker_id"], [(s,) for s in seekers])
    ep = ctx.cfg.exposure_params()
    merged, skipped = compute_bounds(ctx, seekers, [ep])
    bounds = merged[ep]
    visibility.write_bounds(ctx.out / "visibility.csv", bounds)
    by_group = _averages_by_group(bounds, ctx.cfg.window_days)
    visibility.write_averages(ctx.out / "averages.csv", by_group)
    _write_csv(
        ctx.out / "friends_vs_visibility.csv",
        ["seeker_id", "friend_count", "mean_upper_seconds_per_day"],
        visibility.friends_vs_visibility(by_group["all"], roster),
    )
    n_icdf = 0
    for g, avgs in by_group.items():
        if not avgs:
            continue
        for side, i in (("lower", 0), ("upper", 1)):
            curve = reactions.icdf([v[i] for v in avgs.values()])
            reactions.write_icdf(ctx.out / f"icdf_visibility_{g}_{side}.csv", curve)
            n_icdf += 1
    return {
        "sampled_seekers": len(seekers),
        "bound_rows": len(bounds),
        "coverage_skipped_pairs": skipped,
        "icdf_tables": n_icdf,
    }


def consistency(curves: dict, points) -> tuple[float, float]:
    """Largest gap between any two ICDF curves over ``points``: (deviation, value)."""
    if len(curves) < 2 or len(points) == 0:
        return 0.0, float("nan")
    stacked = np.array([c(points) for c in curves.values()])
    spread = stacked.max(axis=0) - stacked.min(axis=0)
    i = int(np.argmax(spread))
    return float(spread[i]), float(points[i])


def sweep(ctx: Context) -> dict:
    """ICDFs of per-seeker mean bounds for every (k, m) in the exposure grid."""
    _, roster = ctx.load()
    seekers = [r[0] for r in _read_rows(ctx.need("visibility_sample.csv"))]
    grid = ctx.cfg.exposure_grid_params()
    merged, _ = compute_bounds(ctx, seekers, grid)
    d = ctx.out / "sweep"
    d.mkdir(exist_ok=True)
    curves = {"lower": {}, "upper": {}}
    rows = []
    for ep in grid:
        avgs = visibility.average_visibility(merged[ep], "all", ctx.cfg.window_days)
        for b in merged[ep]:
            rows.append((ep.k, ep.m, b.seeker_id, b.expert_id, b.list_id, b.day_index, b.lower, b.upper))
        if not avgs:
            continue
        for side, i in (("lower", 0), ("upper", 1)):
            curve = reactions.icdf([v[i] for v in avgs.values()])
            reactions.write_icdf(d / f"icdf_k{ep.k}_m{ep.m}_{side}.csv", curve)
            curves[side][ep] = curve
    _write_csv(
        d / "sweep_bounds.csv",
        ["k", "m", "seeker_id", "expert_id", "list_id", "day_index", "lower_seconds", "upper_seconds"],
        rows,
    )
    summary = []
    for side, cs in curves.items():
        pts = np.unique(np.concatenate([c.support for c in cs.values()])) if cs else np.array([])
        dev, at = consistency(cs, pts)
        summary.append((side, len(cs), dev, at))
    _write_csv(d / "consistency.csv", ["side", "configurations", "max_deviation", "at_value_seconds"], summary)
    return {"configurations": len(grid), "icdf_tables": sum(len(c) for c in curves.values()), "bound_rows": len(rows)}


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        next(r)
        return list(r)


def report_thresholds(averages: dict, threshold_seconds: float = 3.0) -> list[tuple]:
    """Share of seekers whose mean daily bound reaches ``threshold_seconds``.

    A seeker counts when the bound is non-zero and at least the threshold, so
    a threshold of 0 gives the share with any exposure at all. Rows are
    ``(group, side, threshold, fraction, n_seekers)``; side ``zero_upper`` is
    the share whose upper bound is exactly zero.
    """
    rows = []
    for g in visibility.GROUPS:
        avgs = averages.get(g, {})
        n = len(avgs)
        for side, i in (("lower", 0), ("upper", 1)):
            hits = sum(1 for v in avgs.values() if v[i] > 0 and v[i] >= threshold_seconds)
            rows.append((g, side, float(threshold_seconds), hits / n if n else float("nan"), n))
        zeros = sum(1 for v in avgs.values() if v[1] == 0)
        rows.append((g, "zero_upper", 0.0, zeros / n if n else float("nan"), n))
    return rows


def stage_report(ctx: Context) -> dict:
    averages = visibility.read_averages(ctx.need("averages.csv"))
    rows = report_thresholds(averages, ctx.cfg.threshold_seconds)
    _write_csv(ctx.out / "thresholds.csv", ["group", "side", "threshold_seconds", "fraction", "n_seekers"], rows)
    return {"rows": len(rows)}


STAGE_FUNCS: dict[str, Callable[[Context], dict]] = {
    "ingest": stage_ingest,
    "roles": stage_roles,
    "reactions": stage_reactions,
    "cluster": stage_cluster,
    "visibility": stage_visibility,
    "sweep": sweep,
    "report": stage_report,
}


# -- manifest and driver ---------------------------------------------------


def _rel(path, out: Path) -> str:
    # relative to the output directory so the manifest does not depend on where the run lives
    return Path(os.path.relpath(Path(path).resolve(), out.resolve())).as_posix()


def _manifest(ctx: Context, stage_log: dict, status: str) -> dict:
    inputs = {}
    for k in INPUT_KEYS:
        p = Path(getattr(ctx.cfg, k))
        inputs[k] = {"path": _rel(p, ctx.out), "sha256": sha256(p) if p.is_file() else None}
    outputs = {}
    for p in sorted(ctx.out.rglob("*")):
        if p.is_file() and p.name not in (MANIFEST, TIMINGS):
            outputs[p.relative_to(ctx.out).as_posix()] = sha256(p)
    cfg = ctx.cfg.to_dict()
    cfg.pop("workers")
    for k in INPUT_KEYS:
        cfg[k] = _rel(cfg[k], ctx.out)
    cfg["out"] = "."
    return {
        "config": cfg,
        "inputs": inputs,
        "stages": stage_log,
        "outputs": outputs,
        "status": status,
        "timings_file": TIMINGS,
    }


def run_pipeline(cfg: RunConfig, stages=PIPELINE_STAGES) -> dict:
    """Run ``stages`` in order and write the manifest; returns the manifest dict.

    Raises :class:`StageError` (after writing an ``incomplete`` manifest) when
    a stage fails.
    """
    ctx = Context(cfg)
    ctx.out.mkdir(parents=True, exist_ok=True)
    manifest_path = ctx.out / MANIFEST
    stage_log = {}
    timings = {}
    if manifest_path.exists():
        try:
            stage_log = json.loads(manifest_path.read_text())["stages"]
        except (json.JSONDecodeError, KeyError):
            stage_log = {}
    if (ctx.out / TIMINGS).exists():
        try:
            timings = json.loads((ctx.out / TIMINGS).read_text())
        except json.JSONDecodeError:
            timings = {}
    for name in stages:
        if name not in STAGE_FUNCS:
            raise ConfigError(f"unknown stage {name!r}")
        t0 = time.perf_counter()
        try:
            counts = STAGE_FUNCS[name](ctx)
        except Exception as exc:
            stage_log[name] = {"status": "failed", "error": str(exc)}
            timings[name] = time.perf_counter() - t0
            _write_json(ctx.out / TIMINGS, timings)
            _write_json(manifest_path, _manifest(ctx, stage_log, "incomplete"))
            raise StageError(name, exc) from exc
        timings[name] = time.perf_counter() - t0
        stage_log[name] = {"status": "complete", "rows": counts}
        log.info("stage %s complete: %s", name, counts)
    complete = all(stage_log.get(s, {}).get("status") == "complete" for s in PIPELINE_STAGES)
    manifest = _manifest(ctx, stage_log, "complete" if complete else "incomplete")
    _write_json(ctx.out / TIMINGS, timings)
    _write_json(manifest_path, manifest)
    return manifest


def write_bundled_fixture(directory, seed: int = 7) -> Path:
    """Write the synthetic fixture dataset and a matching config; returns the config path."""
    d = Path(directory)
    syn = bundled_config(seed)
    seqs, roster = generate_synthetic(syn)
    paths = write_dataset(d, seqs, roster)
    config = {k: paths[k].name for k in INPUT_KEYS}
    config.update(
        out="out",
        seed=0,
        visibility_clusters="all",
        coverage=[format_time(syn.window[0]), format_time(syn.window[1])],
    )
    cfg_path = d / "config.json"
    _write_json(cfg_path, config)
    return cfg_path
