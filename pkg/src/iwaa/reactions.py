"""Binary reaction indicators of seekers towards experts, and ICDF curves."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import ActivitySequence, PostKind, PreconditionError, Roster, IWAAError


class ReactionKind(str, enum.Enum):
    RETWEET = "r"
    LIKE = "l"
    ANSWER = "a"
    FOLLOW = "f"


Window = Optional[tuple[Optional[datetime], Optional[datetime]]]


def _in_window(t: datetime, window: Window) -> bool:
    if window is None:
        return True
    lo, hi = window
    return (lo is None or lo <= t) and (hi is None or t < hi)


def indicator(
    seeker_activity: ActivitySequence,
    seeker_id: str,
    expert_id: str,
    kind: ReactionKind,
    roster: Roster,
    window: Window = None,
) -> int:
    """1 if the seeker reacted to the expert with ``kind`` inside ``window``.

    ``window`` is a half-open ``(t1, t2)``; either end may be ``None``. Likes
    are windowed on the liked post's creation time. Following is static.
    """
    if window is not None and None not in window and window[0] > window[1]:
        raise PreconditionError("inverted reaction window")
    if kind is ReactionKind.FOLLOW:
        return int(roster.follows_edge(seeker_id, expert_id))
    if kind is ReactionKind.LIKE:
        return int(
            any(
                lk.post_author_id == expert_id and _in_window(lk.post_created_at, window)
                for lk in seeker_activity.likes
            )
        )
    if kind is ReactionKind.RETWEET:
        return int(
            any(
                e.kind is PostKind.RETWEET
                and e.retweeted_author_id == expert_id
                and _in_window(e.created_at, window)
                for e in seeker_activity.events
            )
        )
    return int(
        any(
            e.kind is PostKind.REPLY
            and e.replied_author_id == expert_id
            and _in_window(e.created_at, window)
            for e in seeker_activity.events
        )
    )


@dataclass(frozen=True)
class ReactionProfile:
    seeker_id: str
    indicators: Mapping[str, Mapping[ReactionKind, int]]  # expert -> kind -> 0/1

    @property
    def n_experts(self) -> int:
        return len(self.indicators)

    def average(self, kind: ReactionKind) -> float:
        return sum(ind[kind] for ind in self.indicators.values()) / self.n_experts

    @property
    def effortless(self) -> float:
        """Share of experts that got a retweet or a like."""
        hits = sum(
            ind[ReactionKind.RETWEET] | ind[ReactionKind.LIKE] for ind in self.indicators.values()
        )
        return hits / self.n_experts

    def averages(self) -> dict[str, float]:
        out = {f"avg_{k.value}": self.average(k) for k in ReactionKind}
        out["effortless"] = self.effortless
        return out


def profile(
    seeker_id: str,
    experts: Iterable[str],
    seeker_activity: ActivitySequence,
    roster: Roster,
    windows: Optional[Mapping[str, Sequence[Window]]] = None,
) -> ReactionProfile:
    """Reaction profile of a seeker over a deduplicated expert set.

    ``windows`` maps an expert to the windows in which reactions count; an
    expert reached through several Lists reacts if any window has a hit.
    """
    experts = sorted(set(experts))
    if not experts:
        raise IWAAError(f"seeker {seeker_id}: averages undefined for an empty expert set")
    table = {}
    for e in experts:
        wins = (windows or {}).get(e) or [None]
        table[e] = {
            kind: max(indicator(seeker_activity, seeker_id, e, kind, roster, w) for w in wins)
            for kind in ReactionKind
        }
    return ReactionProfile(seeker_id, table)


PROFILE_COLUMNS = ("seeker_id", "avg_r", "avg_l", "avg_a", "avg_f", "effortless")


def write_profiles(path, profiles: Iterable[ReactionProfile]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        for p in sorted(profiles, key=lambda p: p.seeker_id):
            avg = p.averages()
            w.writerow([p.seeker_id] + [repr(avg[c]) for c in PROFILE_COLUMNS[1:]])


def read_profiles(path) -> dict[str, dict[str, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {
            row["seeker_id"]: {c: float(row[c]) for c in PROFILE_COLUMNS[1:]}
            for row in csv.DictReader(fh)
        }


# -- ICDF ------------------------------------------------------------------


@dataclass(frozen=True)
class ICDFCurve:
    """Fraction of a population with a metric at or above each value."""

    support: np.ndarray
    survival: np.ndarray
    n: int

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        below = np.searchsorted(self.support, v, side="left")
        out = np.append(self.survival, 0.0)[below]
        return float(out) if out.ndim == 0 else out

    def scaled(self, c: float) -> "ICDFCurve":
        if c <= 0:
            raise ValueError("scale must be positive")
        return ICDFCurve(self.support * c, self.survival, self.n)

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.support.tolist(), self.survival.tolist()))


def icdf(values) -> ICDFCurve:
    vals = np.sort(np.asarray(list(values), dtype=float))
    if vals.size == 0:
        raise IWAAError("ICDF of an empty population")
    if np.isnan(vals).any():
        raise IWAAError("ICDF input contains NaN")
    support, first = np.unique(vals, return_index=True)
    survival = (vals.size - first) / vals.size
    return ICDFCurve(support, survival, int(vals.size))


def write_icdf(path, curve: ICDFCurve) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "survival_fraction"])
        for v, s in curve.rows():
            w.writerow([repr(v), repr(s)])


def read_icdf(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def user_features(user_id: str, seq: ActivitySequence, roster: Roster, span_days: float) -> dict[str, float]:
    """Activity rates (per day) and network sizes of one user."""
    counts = {k: 0 for k in PostKind}
    for e in seq.events:
        counts[e.kind] += 1
    return {
        "rate_tweets": counts[PostKind.TWEET] / span_days,
        "rate_retweets": counts[PostKind.RETWEET] / span_days,
        "rate_answers": counts[PostKind.REPLY] / span_days,
        "rate_likes": len(seq.likes) / span_days,
        "likes": float(len(seq.likes)),
        "friends": float(len(roster.friends(user_id))),
        "followers": float(len(roster.followers(user_id))),
    }
