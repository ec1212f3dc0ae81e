"""Loading archived JSON Lines files and generating synthetic datasets.

File layouts (one JSON object per line)::

    posts.jsonl    id, author_id, kind, created_at, retweeted_author_id?, replied_author_id?
    likes.jsonl    user_id, post_id, post_author_id, post_created_at
    follows.jsonl  follower_id, followee_id
    users.jsonl    user_id, is_private
    lists.jsonl    list_id, creator_id, created_at, topic, member_ids

Bad lines never abort a load; they are returned in a rejects report.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .core import (
    UTC,
    ActivityEvent,
    ActivitySequence,
    ConfigError,
    InputError,
    LikeRecord,
    ListRecord,
    PostKind,
    Roster,
    from_us,
    to_us,
)

log = logging.getLogger(__name__)

POST_KINDS = ("tweet", "retweet", "reply", "quote")


@dataclass(frozen=True)
class Reject:
    path: str
    line_no: int
    reason: str


class _LineError(ValueError):
    pass


def parse_time(raw) -> datetime:
    """Parse an RFC3339 timestamp with an explicit offset and normalize to UTC."""
    if not isinstance(raw, str):
        raise _LineError(f"timestamp must be a string, got {type(raw).__name__}")
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise _LineError(f"bad timestamp {raw!r}") from exc
    if dt.tzinfo is None:
        raise _LineError(f"timestamp {raw!r} lacks a UTC offset")
    return dt.astimezone(UTC)


def format_time(dt: datetime) -> str:
    return dt.astimezone(UTC).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _str_field(rec: dict, key: str, optional: bool = False) -> Optional[str]:
    if key not in rec or rec[key] is None:
        if optional:
            return None
        raise _LineError(f"missing field {key!r}")
    val = rec[key]
    if not isinstance(val, str) or not val:
        raise _LineError(f"field {key!r} must be a non-empty string")
    return val


def _records(path: Path, rejects: list[Reject]) -> Iterator[tuple[int, dict]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                rejects.append(Reject(str(path), line_no, "empty line"))
                continue
            try:
                rec = json.loads(text)
            except json.JSONDecodeError as exc:
                rejects.append(Reject(str(path), line_no, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(rec, dict):
                rejects.append(Reject(str(path), line_no, "record is not an object"))
                continue
            yield line_no, rec


def _parse_post(rec: dict) -> ActivityEvent:
    kind_raw = rec.get("kind")
    if kind_raw not in POST_KINDS:
        raise _LineError(f"bad kind {kind_raw!r}")
    kind = PostKind.parse(kind_raw)
    rt = _str_field(rec, "retweeted_author_id", optional=True)
    rp = _str_field(rec, "replied_author_id", optional=True)
    if kind is PostKind.RETWEET and rt is None:
        raise _LineError("retweet without retweeted_author_id")
    if kind is PostKind.REPLY and rp is None:
        raise _LineError("reply without replied_author_id")
    if kind is not PostKind.RETWEET and rt is not None:
        raise _LineError(f"{kind_raw} carries retweeted_author_id")
    if kind is not PostKind.REPLY and rp is not None:
        raise _LineError(f"{kind_raw} carries replied_author_id")
    return ActivityEvent(
        event_id=_str_field(rec, "id"),
        author_id=_str_field(rec, "author_id"),
        kind=kind,
        created_at=parse_time(rec.get("created_at")),
        retweeted_author_id=rt,
        replied_author_id=rp,
    )


def _parse_like(rec: dict) -> LikeRecord:
    return LikeRecord(
        user_id=_str_field(rec, "user_id"),
        post_id=_str_field(rec, "post_id"),
        post_author_id=_str_field(rec, "post_author_id"),
        post_created_at=parse_time(rec.get("post_created_at")),
    )


def load_events(
    posts_path, likes_path=None
) -> tuple[dict[str, ActivitySequence], list[Reject]]:
    """Load posts (and optionally likes) grouped by user.

    Returns ``(sequences, rejects)``. Every input line ends up either as an
    event/like or as exactly one reject.
    """
    rejects: list[Reject] = []
    posts: dict[str, list[ActivityEvent]] = defaultdict(list)
    likes: dict[str, list[LikeRecord]] = defaultdict(list)
    for line_no, rec in _records(Path(posts_path), rejects):
        try:
            ev = _parse_post(rec)
        except _LineError as exc:
            rejects.append(Reject(str(posts_path), line_no, str(exc)))
            continue
        posts[ev.author_id].append(ev)
    if likes_path is not None:
        for line_no, rec in _records(Path(likes_path), rejects):
            try:
                lk = _parse_like(rec)
            except _LineError as exc:
                rejects.append(Reject(str(likes_path), line_no, str(exc)))
                continue
            likes[lk.user_id].append(lk)
    if rejects:
        log.warning("%d malformed lines rejected", len(rejects))
    users = sorted(set(posts) | set(likes))
    seqs = {u: ActivitySequence(tuple(posts.get(u, ())), tuple(likes.get(u, ()))) for u in users}
    return seqs, rejects


@dataclass
class RosterReport:
    rejects: list[Reject] = field(default_factory=list)
    duplicate_edges: int = 0
    self_edges: int = 0
    empty_lists: int = 0


def load_roster(follows_path, lists_path, users_path) -> tuple[Roster, RosterReport]:
    report = RosterReport()
    rejects = report.rejects

    users: dict[str, bool] = {}
    for line_no, rec in _records(Path(users_path), rejects):
        try:
            uid = _str_field(rec, "user_id")
            priv = rec.get("is_private", False)
            if not isinstance(priv, bool):
                raise _LineError("is_private must be a boolean")
        except _LineError as exc:
            rejects.append(Reject(str(users_path), line_no, str(exc)))
            continue
        users[uid] = priv

    follows: set[tuple[str, str]] = set()
    for line_no, rec in _records(Path(follows_path), rejects):
        try:
            edge = (_str_field(rec, "follower_id"), _str_field(rec, "followee_id"))
        except _LineError as exc:
            rejects.append(Reject(str(follows_path), line_no, str(exc)))
            continue
        if edge[0] == edge[1]:
            report.self_edges += 1
        elif edge in follows:
            report.duplicate_edges += 1
        else:
            follows.add(edge)
    if report.self_edges:
        log.warning("dropped %d self-follow edges", report.self_edges)

    lists: list[ListRecord] = []
    for line_no, rec in _records(Path(lists_path), rejects):
        try:
            members = rec.get("member_ids")
            if not isinstance(members, list) or not all(
                isinstance(m, str) and m for m in members
            ):
                raise _LineError("member_ids must be a list of strings")
            if not members:
                report.empty_lists += 1
                continue
            lists.append(
                ListRecord(
                    list_id=_str_field(rec, "list_id"),
                    creator_id=_str_field(rec, "creator_id"),
                    created_at=parse_time(rec.get("created_at")),
                    topic=_str_field(rec, "topic"),
                    member_ids=frozenset(members),
                )
            )
        except _LineError as exc:
            rejects.append(Reject(str(lists_path), line_no, str(exc)))
    return Roster(users=users, follows=frozenset(follows), lists=tuple(lists)), report


# -- writers ---------------------------------------------------------------


def _write_jsonl(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def post_record(ev: ActivityEvent) -> dict:
    rec = {
        "id": ev.event_id,
        "author_id": ev.author_id,
        "kind": ev.kind.value,
        "created_at": format_time(ev.created_at),
    }
    if ev.retweeted_author_id is not None:
        rec["retweeted_author_id"] = ev.retweeted_author_id
    if ev.replied_author_id is not None:
        rec["replied_author_id"] = ev.replied_author_id
    return rec


def write_events(posts_path, likes_path, sequences: dict[str, ActivitySequence]) -> None:
    users = sorted(sequences)
    _write_jsonl(Path(posts_path), (post_record(e) for u in users for e in sequences[u].events))
    _write_jsonl(
        Path(likes_path),
        (
            {
                "user_id": lk.user_id,
                "post_id": lk.post_id,
                "post_author_id": lk.post_author_id,
                "post_created_at": format_time(lk.post_created_at),
            }
            for u in users
            for lk in sequences[u].likes
        ),
    )


def write_roster(follows_path, lists_path, users_path, roster: Roster) -> None:
    _write_jsonl(
        Path(follows_path),
        ({"follower_id": a, "followee_id": b} for a, b in sorted(roster.follows)),
    )
    _write_jsonl(
        Path(users_path),
        ({"user_id": u, "is_private": roster.users[u]} for u in sorted(roster.users)),
    )
    _write_jsonl(
        Path(lists_path),
        (
            {
                "list_id": lst.list_id,
                "creator_id": lst.creator_id,
                "created_at": format_time(lst.created_at),
                "topic": lst.topic,
                "member_ids": sorted(lst.member_ids),
            }
            for lst in roster.lists
        ),
    )


# -- synthetic data --------------------------------------------------------


def seed_topics() -> dict[str, list[str]]:
    """Topics and hand-picked seed experts used to start List collection."""
    out: dict[str, list[str]] = {}
    with resources.files("iwaa.data").joinpath("seed_experts.csv").open(encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(row["topic"], []).append(row["username"])
    return out


@dataclass(frozen=True)
class SyntheticConfig:
    seed: int
    n_seekers: int
    n_experts: int
    post_rate_per_day: float
    window: tuple[datetime, datetime]
    follow_density: float
    n_others: int = 20
    other_follow_density: float = 0.4
    likes_per_day: float = 1.0
    reactive_fraction: float = 0.2
    private_fraction: float = 0.0
    list_member_prob: float = 0.9
    list_lead_days: float = 30.0
    expert_rate_scale: float = 1.0
    other_rate_scale: float = 1.0
    topics: tuple[str, ...] = ("Music", "Entertainment", "Artificial intelligence")

    def validate(self) -> None:
        start, end = self.window
        if start.tzinfo is None or end.tzinfo is None:
            raise ConfigError("synthetic window must be timezone-aware")
        if start >= end:
            raise ConfigError(f"degenerate window {start} >= {end}")
        if min(self.n_seekers, self.n_experts, self.n_others) < 0 or self.n_experts < 1:
            raise ConfigError("user counts must be non-negative with at least one expert")
        if min(self.post_rate_per_day, self.likes_per_day, self.expert_rate_scale, self.other_rate_scale) < 0:
            raise ConfigError("rates must be non-negative")
        for name in (
            "follow_density",
            "other_follow_density",
            "reactive_fraction",
            "private_fraction",
            "list_member_prob",
        ):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name}={p} is not a probability")
        if not self.topics:
            raise ConfigError("at least one topic is required")


def generate_synthetic(cfg: SyntheticConfig) -> tuple[dict[str, ActivitySequence], Roster]:
    """Deterministic synthetic network with seekers, experts and background users.

    Post counts per user are Poisson with mean ``post_rate_per_day * days``
    (scaled per role for experts and background users) and post times are
    uniform over the window, i.e. a homogeneous Poisson process. A fraction
    ``reactive_fraction`` of seekers aims some of its retweets, replies and
    likes at the experts it follows; the rest only react to background users.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    start_us, end_us = to_us(cfg.window[0]), to_us(cfg.window[1])
    days = (end_us - start_us) / 86_400e6

    seekers = [f"s{i:04d}" for i in range(cfg.n_seekers)]
    experts = [f"e{i:04d}" for i in range(cfg.n_experts)]
    others = [f"o{i:04d}" for i in range(cfg.n_others)]
    everyone = seekers + experts + others
    expert_topic = {e: cfg.topics[i % len(cfg.topics)] for i, e in enumerate(experts)}
    seeker_topic = {s: cfg.topics[i % len(cfg.topics)] for i, s in enumerate(seekers)}

    private = {u: False for u in everyone}
    for s in seekers:
        private[s] = bool(rng.random() < cfg.private_fraction)

    follows: set[tuple[str, str]] = set()
    for s in seekers:
        for e in experts:
            if rng.random() < cfg.follow_density:
                follows.add((s, e))
        density = cfg.other_follow_density * rng.uniform(0.1, 1.0)
        for o in others:
            if rng.random() < density:
                follows.add((s, o))
    for o in others:
        for e in experts:
            if rng.random() < 0.5:
                follows.add((o, e))
        for o2 in others:
            if o2 != o and rng.random() < cfg.other_follow_density:
                follows.add((o, o2))
    for e in experts:
        for o in others:
            if rng.random() < 0.3:
                follows.add((e, o))
    friends: dict[str, list[str]] = {u: [] for u in everyone}
    for a, b in sorted(follows):
        friends[a].append(b)

    # per seeker and reaction kind, the chance that a reaction targets an expert
    reactivity = {u: {"retweet": 0.0, "reply": 0.0, "like": 0.0} for u in everyone}
    for s in seekers:
        if rng.random() < cfg.reactive_fraction:
            for kind in ("retweet", "reply", "like"):
                reactivity[s][kind] = float(rng.uniform(0.0, 1.0)) ** 2
    expert_set = set(experts)
    role_scale = {u: 1.0 for u in seekers}
    role_scale.update({u: cfg.expert_rate_scale for u in experts})
    role_scale.update({u: cfg.other_rate_scale for u in others})

    def pick_target(user: str, kind: str) -> Optional[str]:
        fr = friends[user]
        if not fr:
            return None
        expert_fr = [f for f in fr if f in expert_set]
        plain_fr = [f for f in fr if f not in expert_set]
        if user in seeker_topic:
            aim = expert_fr and rng.random() < reactivity[user][kind]
            pool = expert_fr if aim else plain_fr
            if not pool:
                return None
        else:
            pool = fr
        return pool[int(rng.integers(len(pool)))]

    kinds = np.array([PostKind.TWEET, PostKind.RETWEET, PostKind.REPLY], dtype=object)
    posts: dict[str, list[ActivityEvent]] = {}
    for u in everyone:
        n = int(rng.poisson(cfg.post_rate_per_day * role_scale[u] * days))
        times = np.sort(rng.integers(start_us, end_us, size=n))
        evs = []
        for i, t in enumerate(times):
            kind = kinds[rng.choice(3, p=[0.5, 0.3, 0.2])]
            rt = rp = None
            if kind is not PostKind.TWEET:
                target = pick_target(u, kind.value)
                if target is None:
                    kind = PostKind.TWEET
                elif kind is PostKind.RETWEET:
                    rt = target
                else:
                    rp = target
            evs.append(ActivityEvent(f"{u}-p{i:05d}", u, kind, from_us(int(t)), rt, rp))
        posts[u] = evs

    likes: dict[str, list[LikeRecord]] = {u: [] for u in everyone}
    for u in everyone:
        n = int(rng.poisson(cfg.likes_per_day * days)) if cfg.post_rate_per_day > 0 else 0
        for _ in range(n):
            target = pick_target(u, "like")
            if target is None or not posts[target]:
                continue
            ev = posts[target][int(rng.integers(len(posts[target])))]
            likes[u].append(LikeRecord(u, ev.event_id, target, ev.created_at))

    lead_us = int(min(cfg.list_lead_days * 86_400e6, (end_us - start_us) / 2))
    lists = []
    for s in seekers:
        topical = [e for e in experts if expert_topic[e] == seeker_topic[s]] or experts
        members = [e for e in topical if rng.random() < cfg.list_member_prob]
        if not members:
            members = [topical[int(rng.integers(len(topical)))]]
        members += [o for o in others if rng.random() < 0.1]
        t_l = int(rng.integers(start_us + lead_us, end_us))
        lists.append(
            ListRecord(f"L-{s}", s, from_us(t_l), seeker_topic[s], frozenset(members))
        )

    seqs = {u: ActivitySequence(tuple(posts[u]), tuple(likes[u])) for u in everyone}
    roster = Roster(users=private, follows=frozenset(follows), lists=tuple(lists))
    return seqs, roster


def bundled_config(seed: int = 7) -> SyntheticConfig:
    """Configuration of the small fixture shipped for smoke and determinism runs."""
    start = datetime(2020, 1, 1, tzinfo=UTC)
    return SyntheticConfig(
        seed=seed,
        n_seekers=40,
        n_experts=9,
        post_rate_per_day=2.0,
        window=(start, start + timedelta(days=75)),
        follow_density=0.4,
        n_others=50,
        other_follow_density=0.5,
        expert_rate_scale=0.5,
        other_rate_scale=4.0,
        reactive_fraction=0.25,
        private_fraction=0.05,
    )


def write_dataset(directory, sequences: dict[str, ActivitySequence], roster: Roster) -> dict[str, Path]:
    """Write a dataset as the five JSONL input files; returns their paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {name: d / f"{name}.jsonl" for name in ("posts", "likes", "follows", "users", "lists")}
    write_events(paths["posts"], paths["likes"], sequences)
    write_roster(paths["follows"], paths["lists"], paths["users"], roster)
    return paths
