"""Crowd-sourced expert identification and seeker filtering.

A user is an expert on a topic when enough distinct Lists of that topic
include them. List creators are the candidate seekers; inactive, private and
over/under-connected creators are filtered out before pairing.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Mapping

from .core import ActivitySequence, ConfigError, ListRecord, PreconditionError, Roster
from .ingest import format_time, parse_time

DROP_REASONS = ("unknown-user", "private", "no-posts", "no-likes", "no-friends", "too-many-friends")


@dataclass(frozen=True)
class ExpertThreshold:
    min_listings: int = 10

    def __post_init__(self):
        if self.min_listings < 1:
            raise ConfigError("min_listings must be >= 1")


@dataclass(frozen=True)
class FilterPolicy:
    max_friends: float = 5000
    require_posts: bool = True
    require_likes: bool = True
    exclude_private: bool = True
    min_friends: int = 1

    def __post_init__(self):
        if not self.max_friends > self.min_friends:
            raise ConfigError("max_friends must exceed min_friends")

    @classmethod
    def permissive(cls) -> "FilterPolicy":
        return cls(
            max_friends=math.inf,
            require_posts=False,
            require_likes=False,
            exclude_private=False,
            min_friends=0,
        )


@dataclass(frozen=True)
class Pair:
    seeker_id: str
    expert_id: str
    topic: str
    list_id: str
    list_created_at: datetime
    followed: bool

    def to_record(self) -> dict:
        return {
            "seeker_id": self.seeker_id,
            "expert_id": self.expert_id,
            "topic": self.topic,
            "list_id": self.list_id,
            "list_created_at": format_time(self.list_created_at),
            "followed": self.followed,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Pair":
        return cls(
            rec["seeker_id"],
            rec["expert_id"],
            rec["topic"],
            rec["list_id"],
            parse_time(rec["list_created_at"]),
            bool(rec["followed"]),
        )


class PairTable(tuple):
    """Immutable sequence of :class:`Pair` rows, one per (seeker, expert, list)."""

    def followed(self) -> "PairTable":
        return PairTable(p for p in self if p.followed)

    def unfollowed(self) -> "PairTable":
        return PairTable(p for p in self if not p.followed)

    def seekers(self) -> list[str]:
        return sorted({p.seeker_id for p in self})

    def experts_of(self, seeker_id: str) -> list[str]:
        return sorted({p.expert_id for p in self if p.seeker_id == seeker_id})

    def by_seeker(self) -> dict[str, "PairTable"]:
        out: dict[str, list[Pair]] = defaultdict(list)
        for p in self:
            out[p.seeker_id].append(p)
        return {s: PairTable(rows) for s, rows in sorted(out.items())}


def listing_counts(lists: Iterable[ListRecord]) -> dict[str, Counter]:
    """Per topic, how many distinct Lists contain each user."""
    counts: dict[str, Counter] = defaultdict(Counter)
    seen: set[str] = set()
    for lst in lists:
        if lst.list_id in seen:
            continue
        seen.add(lst.list_id)
        counts[lst.topic].update(lst.member_ids)
    return counts


def identify_experts(
    lists: Iterable[ListRecord], th: ExpertThreshold = ExpertThreshold()
) -> dict[str, set[str]]:
    return {
        topic: {u for u, n in cnt.items() if n >= th.min_listings}
        for topic, cnt in sorted(listing_counts(lists).items())
    }


def times_listed(lists: Iterable[ListRecord]) -> Counter:
    """Number of distinct Lists (any topic) containing each user."""
    out: Counter = Counter()
    for cnt in listing_counts(lists).values():
        out.update(cnt)
    return out


def _drop_reason(user, roster: Roster, activity: Mapping[str, ActivitySequence], policy):
    if user not in roster.users:
        return "unknown-user"
    if policy.exclude_private and roster.is_private(user):
        return "private"
    seq = activity.get(user, ActivitySequence())
    if policy.require_posts and len(seq.events) == 0:
        return "no-posts"
    if policy.require_likes and len(seq.likes) == 0:
        return "no-likes"
    n_friends = len(roster.friends(user))
    if n_friends < policy.min_friends:
        return "no-friends"
    if n_friends > policy.max_friends:
        return "too-many-friends"
    return None


def filter_seekers(
    creators: Iterable[str],
    roster: Roster,
    activity: Mapping[str, ActivitySequence],
    policy: FilterPolicy = FilterPolicy(),
) -> tuple[set[str], dict[str, str]]:
    """Split List creators into kept seekers and dropped users.

    Each dropped user gets the first matching reason in the order of
    ``DROP_REASONS``.
    """
    kept: set[str] = set()
    dropped: dict[str, str] = {}
    for user in sorted(set(creators)):
        reason = _drop_reason(user, roster, activity, policy)
        if reason is None:
            kept.add(user)
        else:
            dropped[user] = reason
    return kept, dropped


def build_pairs(
    lists: Iterable[ListRecord],
    experts_by_topic: Mapping[str, set[str]],
    kept_seekers: set[str],
    roster: Roster,
) -> PairTable:
    rows = []
    for lst in sorted(lists, key=lambda l: (l.created_at, l.list_id)):
        if lst.creator_id not in kept_seekers:
            continue
        experts = experts_by_topic.get(lst.topic, set())
        for e in sorted(lst.member_ids & experts):
            if e == lst.creator_id:
                continue
            rows.append(
                Pair(
                    lst.creator_id,
                    e,
                    lst.topic,
                    lst.list_id,
                    lst.created_at,
                    roster.follows_edge(lst.creator_id, e),
                )
            )
    return PairTable(rows)


def write_pairs(path, pairs: PairTable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps(p.to_record(), sort_keys=True) + "\n")


def read_pairs(path) -> PairTable:
    with open(path, encoding="utf-8") as fh:
        return PairTable(Pair.from_record(json.loads(line)) for line in fh if line.strip())


def write_drops(path, dropped: Mapping[str, str]) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        for user in sorted(dropped):
            fh.write(json.dumps({"reason": dropped[user], "user_id": user}, sort_keys=True) + "\n")


def check_pairs(pairs: PairTable, kept: set[str], experts_by_topic, roster: Roster) -> None:
    """Referential integrity of a pair table; raises on the first bad row."""
    for p in pairs:
        if p.seeker_id not in kept:
            raise PreconditionError(f"pair seeker {p.seeker_id} did not pass the filter")
        if p.expert_id not in experts_by_topic.get(p.topic, ()):
            raise PreconditionError(f"{p.expert_id} is not an expert on {p.topic}")
        if p.followed != roster.follows_edge(p.seeker_id, p.expert_id):
            raise PreconditionError(f"followed flag inconsistent for {p}")
