"""Domain types and interval algebra shared across the analysis stages.

Times are timezone-aware UTC ``datetime`` objects (microsecond resolution).
Numeric code converts them to integer microseconds since the epoch with
:func:`to_us` so that differences stay exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Mapping, Optional

UTC = timezone.utc
_EPOCH = datetime(1970, 1, 1, tzinfo=UTC)


class IWAAError(Exception):
    """Base class for errors raised by this package."""


class PreconditionError(IWAAError, ValueError):
    pass


class CoverageError(IWAAError, ValueError):
    """A requested window is not covered by the loaded data."""


class DegenerateInputError(IWAAError, ValueError):
    pass


class ConfigError(IWAAError, ValueError):
    pass


class InputError(IWAAError):
    """Unreadable or structurally broken input file."""


def to_utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        raise PreconditionError(f"naive datetime {dt!r}; an explicit offset is required")
    return dt.astimezone(UTC)


def to_us(dt: datetime) -> int:
    """Integer microseconds since the Unix epoch."""
    delta = dt - _EPOCH
    return (delta.days * 86_400 + delta.seconds) * 1_000_000 + delta.microseconds


def from_us(us: int) -> datetime:
    return _EPOCH + timedelta(microseconds=int(us))


def seconds(d: timedelta) -> float:
    """Length of a duration in fractional seconds (non-negative)."""
    s = d / timedelta(seconds=1)
    if s < 0:
        raise PreconditionError(f"negative duration {d}")
    return s


class PostKind(str, enum.Enum):
    TWEET = "tweet"
    RETWEET = "retweet"
    REPLY = "reply"

    @classmethod
    def parse(cls, raw: str) -> "PostKind":
        # quote-tweets are plain retweets for every downstream purpose
        if raw == "quote":
            return cls.RETWEET
        return cls(raw)


@dataclass(frozen=True, order=False)
class ActivityEvent:
    event_id: str
    author_id: str
    kind: PostKind
    created_at: datetime
    retweeted_author_id: Optional[str] = None
    replied_author_id: Optional[str] = None

    def __post_init__(self):
        if (self.retweeted_author_id is not None) != (self.kind is PostKind.RETWEET):
            raise PreconditionError(
                f"{self.event_id}: retweeted_author_id must be set iff kind is retweet"
            )
        if (self.replied_author_id is not None) != (self.kind is PostKind.REPLY):
            raise PreconditionError(
                f"{self.event_id}: replied_author_id must be set iff kind is reply"
            )

    @property
    def sort_key(self) -> tuple[datetime, str]:
        return (self.created_at, self.event_id)


@dataclass(frozen=True)
class LikeRecord:
    """A like on someone's post. The time of the like itself is not observable."""

    user_id: str
    post_id: str
    post_author_id: str
    post_created_at: datetime


def _check_interval(t1: datetime, t2: datetime) -> None:
    if t1 > t2:
        raise PreconditionError(f"inverted interval [{t1}, {t2})")


@dataclass(frozen=True)
class ActivitySequence:
    """Time-ordered posts plus likes of one user (or of a merged set of users)."""

    events: tuple[ActivityEvent, ...] = ()
    likes: tuple[LikeRecord, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.events, key=lambda e: e.sort_key))
        object.__setattr__(self, "events", ordered)
        object.__setattr__(self, "likes", tuple(self.likes))

    @classmethod
    def of(cls, events: Iterable[ActivityEvent] = (), likes: Iterable[LikeRecord] = ()):
        return cls(tuple(events), tuple(likes))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def slice(self, t1: datetime, t2: datetime) -> "ActivitySequence":
        """Events with ``t1 <= created_at < t2``; likes filtered on the liked post's time."""
        _check_interval(t1, t2)
        return ActivitySequence(
            tuple(e for e in self.events if t1 <= e.created_at < t2),
            tuple(lk for lk in self.likes if t1 <= lk.post_created_at < t2),
        )

    def of_kind(self, kind: PostKind) -> "ActivitySequence":
        return ActivitySequence(tuple(e for e in self.events if e.kind is kind), ())

    def merged(self, other: "ActivitySequence") -> "ActivitySequence":
        return ActivitySequence(self.events + other.events, self.likes + other.likes)


def slice(seq: ActivitySequence, t1: datetime, t2: datetime) -> ActivitySequence:  # noqa: A001
    return seq.slice(t1, t2)


def partition_by_kind(seq: ActivitySequence) -> dict[PostKind, ActivitySequence]:
    """Split the posts of ``seq`` into tweets, retweets and replies.

    Likes are not posts and are dropped from every partition.
    """
    return {kind: seq.of_kind(kind) for kind in PostKind}


@dataclass(frozen=True)
class ListRecord:
    list_id: str
    creator_id: str
    created_at: datetime
    topic: str
    member_ids: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "member_ids", frozenset(self.member_ids))
        if not self.member_ids:
            raise PreconditionError(f"list {self.list_id} has no members")


@dataclass(frozen=True)
class Roster:
    """Static network snapshot: users, follow edges and Lists."""

    users: Mapping[str, bool] = field(default_factory=dict)  # user_id -> is_private
    follows: frozenset[tuple[str, str]] = frozenset()
    lists: tuple[ListRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "follows", frozenset(self.follows))
        object.__setattr__(self, "lists", tuple(self.lists))
        if any(a == b for a, b in self.follows):
            raise PreconditionError("self-follow edge in roster")
        friends: dict[str, set[str]] = {}
        followers: dict[str, set[str]] = {}
        for a, b in self.follows:
            friends.setdefault(a, set()).add(b)
            followers.setdefault(b, set()).add(a)
        object.__setattr__(self, "_friends", {k: frozenset(v) for k, v in friends.items()})
        object.__setattr__(self, "_followers", {k: frozenset(v) for k, v in followers.items()})

    def friends(self, user_id: str) -> frozenset[str]:
        """Accounts that ``user_id`` follows."""
        return self._friends.get(user_id, frozenset())

    def followers(self, user_id: str) -> frozenset[str]:
        return self._followers.get(user_id, frozenset())

    def is_private(self, user_id: str) -> bool:
        return bool(self.users.get(user_id, False))

    def follows_edge(self, follower: str, followee: str) -> bool:
        return followee in self.friends(follower)
