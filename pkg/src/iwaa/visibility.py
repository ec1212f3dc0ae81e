"""In-wall visibility of an expert's content for a seeker.

Visibility over ``[t1, t2)`` is the time integral of

* exposure ``f(t) = (1 - min(n, k)/k) ** m``, where ``n`` counts wall posts
  from anyone but the expert since the expert's latest post, and
* online presence ``o(t)``, an asymmetric Laplace kernel around the nearest
  seeker post, held at 1 between posts that are at most ``session_gap`` apart.

The lower bound integrates ``f * o``; the upper bound takes ``o = 1``. Both
are exact sums over pieces on which ``f`` is constant and ``o`` is either 1 or
a one-sided exponential.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import (
    ActivityEvent,
    ActivitySequence,
    ConfigError,
    CoverageError,
    IWAAError,
    PostKind,
    PreconditionError,
    Roster,
    to_us,
)

DAY_US = 86_400 * 1_000_000
WALL_KINDS = (PostKind.TWEET, PostKind.RETWEET)


@dataclass(frozen=True)
class ExposureParams:
    k: int = 100
    m: int = 2

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise ConfigError(f"exposure parameters must be >= 1, got k={self.k}, m={self.m}")


@dataclass(frozen=True)
class PresenceParams:
    a_l: float = 0.047  # hours
    a_r: float = 0.047  # hours
    session_gap: float = 240.0  # seconds

    def __post_init__(self):
        if self.a_l <= 0 or self.a_r <= 0 or self.session_gap <= 0:
            raise ConfigError("presence bandwidths and session gap must be positive")

    @property
    def a_l_seconds(self) -> float:
        return self.a_l * 3600.0

    @property
    def a_r_seconds(self) -> float:
        return self.a_r * 3600.0


SWEEP_GRID = tuple(ExposureParams(k, m) for k in (30, 60, 100) for m in (1, 2))


def exposure(n, p: ExposureParams = ExposureParams()):
    """Probability that the expert's latest post is still seen after ``n`` newer posts."""
    n_arr = np.asarray(n)
    if (n_arr < 0).any():
        raise PreconditionError("post count must be non-negative")
    out = (1.0 - np.minimum(n_arr, p.k) / p.k) ** p.m
    return float(out) if out.ndim == 0 else out


# -- walls -----------------------------------------------------------------


def is_expert_content(ev: ActivityEvent, expert_id: str) -> bool:
    """Posts by the expert, or retweets of the expert by anyone."""
    return ev.author_id == expert_id or (
        ev.kind is PostKind.RETWEET and ev.retweeted_author_id == expert_id
    )


@dataclass(frozen=True)
class Wall:
    seeker_id: str
    events: tuple[ActivityEvent, ...]

    def split(self, expert_id: str) -> tuple[tuple[ActivityEvent, ...], tuple[ActivityEvent, ...]]:
        """``(expert content, rest of the wall)``."""
        mine = tuple(e for e in self.events if is_expert_content(e, expert_id))
        rest = tuple(e for e in self.events if not is_expert_content(e, expert_id))
        return mine, rest

    def __len__(self):
        return len(self.events)


def build_wall(seeker_id: str, roster: Roster, activity: Mapping[str, ActivitySequence]) -> Wall:
    """Chronological merge of the tweets and retweets of everyone the seeker follows."""
    if seeker_id not in roster.users:
        raise PreconditionError(f"seeker {seeker_id} not in roster")
    events = []
    for friend in roster.friends(seeker_id):
        seq = activity.get(friend)
        if seq is not None:
            events.extend(e for e in seq.events if e.kind in WALL_KINDS)
    events.sort(key=lambda e: e.sort_key)
    return Wall(seeker_id, tuple(events))


# -- presence --------------------------------------------------------------


def sessions(post_us: np.ndarray, gap_us: float) -> tuple[np.ndarray, np.ndarray]:
    """Merge sorted post times into sessions; a gap of at most ``gap_us`` keeps a session open."""
    if post_us.size == 0:
        return post_us[:0], post_us[:0]
    breaks = np.nonzero(np.diff(post_us) > gap_us)[0]
    starts = np.concatenate(([post_us[0]], post_us[breaks + 1]))
    ends = np.concatenate((post_us[breaks], [post_us[-1]]))
    return starts, ends


def _post_times(seeker_posts) -> np.ndarray:
    if isinstance(seeker_posts, ActivitySequence):
        seeker_posts = seeker_posts.events
    return np.unique(np.array([to_us(e.created_at) for e in seeker_posts], dtype=np.int64))


def presence(t: datetime, seeker_posts, p: PresenceParams = PresenceParams()) -> float:
    """Probability that the seeker is online at ``t`` (0 if they never post)."""
    posts = _post_times(seeker_posts)
    if posts.size == 0:
        return 0.0
    starts, ends = sessions(posts, p.session_gap * 1e6)
    x = to_us(t)
    j = int(np.searchsorted(starts, x, side="right")) - 1
    if j >= 0 and x <= ends[j]:
        return 1.0
    after = (x - ends[j]) / 1e6 if j >= 0 else math.inf
    before = (starts[j + 1] - x) / 1e6 if j + 1 < starts.size else math.inf
    if before <= after:
        return math.exp(-before / p.a_l_seconds)
    return math.exp(-after / p.a_r_seconds)


# -- integration -----------------------------------------------------------


class PairIntegrand:
    """Piecewise description of exposure and presence for one (seeker, expert) pair.

    Built once per pair; :meth:`bounds` integrates any window in closed form.
    """

    def __init__(
        self,
        expert_events: Sequence[ActivityEvent],
        other_events: Sequence[ActivityEvent],
        seeker_posts,
        ep: ExposureParams = ExposureParams(),
        pp: PresenceParams = PresenceParams(),
    ):
        self.ep, self.pp = ep, pp
        merged = sorted(
            [(e.sort_key, True) for e in expert_events] + [(e.sort_key, False) for e in other_events]
        )
        self.ev_us = np.array([to_us(k[0]) for k, _ in merged], dtype=np.int64)
        is_exp = np.array([x for _, x in merged], dtype=bool)
        # posts since the latest expert post, after each event; -1 before any expert post
        since = np.empty(len(merged), dtype=np.int64)
        count = -1
        for i, flag in enumerate(is_exp):
            if flag:
                count = 0
            elif count >= 0:
                count += 1
            since[i] = count
        self.since = since
        self.f_after = np.where(since >= 0, exposure(np.maximum(since, 0), ep), 0.0)
        posts = _post_times(seeker_posts)
        self.starts, self.ends = sessions(posts, pp.session_gap * 1e6)

    def with_exposure(self, ep: ExposureParams) -> "PairIntegrand":
        clone = object.__new__(PairIntegrand)
        clone.__dict__.update(self.__dict__)
        clone.ep = ep
        clone.f_after = np.where(self.since >= 0, exposure(np.maximum(self.since, 0), ep), 0.0)
        return clone

    def bounds(self, t1_us: int, t2_us: int) -> tuple[float, float]:
        """(lower, upper) visibility in seconds over ``[t1_us, t2_us)``."""
        if t1_us > t2_us:
            raise PreconditionError("inverted window")
        if t1_us == t2_us or self.ev_us.size == 0:
            return 0.0, 0.0

        def rel(x):
            return (np.asarray(x, dtype=np.int64) - t1_us) / 1e6

        length = (t2_us - t1_us) / 1e6
        ev = rel(self.ev_us)
        s_rel, e_rel = rel(self.starts), rel(self.ends)
        mids = ((self.ends[:-1] - t1_us) + (self.starts[1:] - t1_us)) / 2e6
        cand = np.concatenate(([0.0, length], ev, s_rel, e_rel, mids))
        bp = np.unique(cand[(cand >= 0.0) & (cand <= length)])
        u, v = bp[:-1], bp[1:]
        width = v - u

        idx = np.searchsorted(ev, u, side="right") - 1
        f = np.where(idx >= 0, self.f_after[np.maximum(idx, 0)], 0.0)
        upper = min(float(np.sum(f * width)), length)
        if s_rel.size == 0 or upper == 0.0:
            return 0.0, upper

        mid = (u + v) / 2
        j = np.searchsorted(s_rel, mid, side="right") - 1
        jc = np.maximum(j, 0)
        inside = (j >= 0) & (mid <= e_rel[jc])
        has_next = j + 1 < s_rel.size
        nxt = np.minimum(j + 1, s_rel.size - 1)
        gap_mid = np.where(
            (j >= 0) & has_next, (e_rel[jc] + s_rel[nxt]) / 2, np.where(j < 0, -np.inf, np.inf)
        )
        # right tail of the previous session vs. left tail of the next one
        use_right = (j >= 0) & (~has_next | (mid < gap_mid))
        a_l, a_r = self.pp.a_l_seconds, self.pp.a_r_seconds
        with np.errstate(over="ignore", invalid="ignore"):
            right = a_r * np.exp(-(u - e_rel[jc]) / a_r) * -np.expm1(-width / a_r)
            left = a_l * np.exp(-(s_rel[nxt] - v) / a_l) * -np.expm1(-width / a_l)
        tail = np.where(use_right, right, left)
        piece = np.where(inside, width, tail)
        lower = float(np.sum(f * piece))
        return min(lower, upper), upper


def visibility_bounds(
    expert_id: str,
    wall: Wall,
    seeker_posts,
    window: tuple[datetime, datetime],
    ep: ExposureParams = ExposureParams(),
    pp: PresenceParams = PresenceParams(),
    coverage: Optional[tuple[datetime, datetime]] = None,
) -> tuple[float, float]:
    """Lower and upper visibility (seconds) of ``expert_id`` in ``wall`` over ``window``.

    ``coverage`` is the time span the data is known to cover; windows outside
    it raise :class:`CoverageError`.
    """
    t1, t2 = window
    if t1 > t2:
        raise PreconditionError("inverted window")
    if coverage is not None and (t1 < coverage[0] or t2 > coverage[1]):
        raise CoverageError(f"window [{t1}, {t2}) outside data coverage {coverage}")
    mine, rest = wall.split(expert_id)
    if not mine:
        return 0.0, 0.0
    integrand = PairIntegrand(mine, rest, seeker_posts, ep, pp)
    return integrand.bounds(to_us(t1), to_us(t2))


# -- per-day bounds and aggregation ----------------------------------------


def day_windows(t_l: datetime, days: int = 30) -> list[tuple[int, datetime, datetime]]:
    """Day ``d`` covers ``[t_l - d days, t_l - (d-1) days)`` for ``d = 1..days``."""
    return [
        (d, t_l - timedelta(days=d), t_l - timedelta(days=d - 1)) for d in range(1, days + 1)
    ]


@dataclass(frozen=True)
class VisibilityBound:
    seeker_id: str
    expert_id: str
    list_id: str
    day_index: int
    lower: float
    upper: float
    followed: bool
    params: tuple[ExposureParams, PresenceParams] = (ExposureParams(), PresenceParams())


def pair_daily_bounds(
    pair,
    wall: Wall,
    seeker_posts,
    ep_grid: Sequence[ExposureParams] = (ExposureParams(),),
    pp: PresenceParams = PresenceParams(),
    days: int = 30,
    coverage: Optional[tuple[datetime, datetime]] = None,
) -> dict[ExposureParams, list[VisibilityBound]]:
    """Daily bounds of one pair for the days before its List was created."""
    windows = day_windows(pair.list_created_at, days)
    if coverage is not None:
        lo, hi = windows[-1][1], windows[0][2]
        if lo < coverage[0] or hi > coverage[1]:
            raise CoverageError(
                f"pair {pair.seeker_id}/{pair.expert_id}: [{lo}, {hi}) outside coverage"
            )
    mine, rest = wall.split(pair.expert_id)
    out = {}
    base = PairIntegrand(mine, rest, seeker_posts, ep_grid[0], pp) if mine else None
    for ep in ep_grid:
        integrand = None if base is None else base.with_exposure(ep)
        rows = []
        for d, t1, t2 in windows:
            lo_b, up_b = (0.0, 0.0) if integrand is None else integrand.bounds(to_us(t1), to_us(t2))
            rows.append(
                VisibilityBound(
                    pair.seeker_id, pair.expert_id, pair.list_id, d, lo_b, up_b, pair.followed, (ep, pp)
                )
            )
        out[ep] = rows
    return out


GROUPS = ("all", "followed", "unfollowed")


def average_visibility(
    bounds: Iterable[VisibilityBound], group: str = "all", days: int = 30
) -> dict[str, tuple[float, float]]:
    """Per-seeker mean (lower, upper) seconds per day over (day, expert) cells.

    Seekers with no expert in ``group`` are left out rather than given zeros.
    """
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}")
    cells: dict[str, list[tuple[float, float]]] = defaultdict(list)
    per_pair: dict[tuple[str, str, str], int] = defaultdict(int)
    for b in bounds:
        if group == "followed" and not b.followed:
            continue
        if group == "unfollowed" and b.followed:
            continue
        cells[b.seeker_id].append((b.lower, b.upper))
        per_pair[(b.seeker_id, b.expert_id, b.list_id)] += 1
    bad = [k for k, n in per_pair.items() if n != days]
    if bad:
        raise IWAAError(f"{len(bad)} pairs do not have exactly {days} daily buckets, e.g. {bad[0]}")
    return {
        s: (float(np.mean([c[0] for c in v])), float(np.mean([c[1] for c in v])))
        for s, v in sorted(cells.items())
    }


def friends_vs_visibility(
    averages: Mapping[str, tuple[float, float]], roster: Roster
) -> list[tuple[str, int, float]]:
    """Rows ``(seeker_id, friend_count, mean daily upper bound)``."""
    return [(s, len(roster.friends(s)), averages[s][1]) for s in sorted(averages)]


BOUND_COLUMNS = ("seeker_id", "expert_id", "list_id", "day_index", "lower_seconds", "upper_seconds", "followed")


def write_bounds(path, bounds: Iterable[VisibilityBound]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BOUND_COLUMNS)
        for b in bounds:
            w.writerow(
                [b.seeker_id, b.expert_id, b.list_id, b.day_index, repr(b.lower), repr(b.upper), int(b.followed)]
            )


def read_bounds(path) -> list[VisibilityBound]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            VisibilityBound(
                r["seeker_id"],
                r["expert_id"],
                r["list_id"],
                int(r["day_index"]),
                float(r["lower_seconds"]),
                float(r["upper_seconds"]),
                r["followed"] == "1",
            )
            for r in csv.DictReader(fh)
        ]


def write_averages(path, by_group: Mapping[str, Mapping[str, tuple[float, float]]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seeker_id", "group", "mean_lower_seconds_per_day", "mean_upper_seconds_per_day"])
        rows = [
            (s, g, lo, up) for g, avgs in by_group.items() for s, (lo, up) in avgs.items()
        ]
        for s, g, lo, up in sorted(rows, key=lambda r: (r[0], GROUPS.index(r[1]))):
            w.writerow([s, g, repr(lo), repr(up)])


def read_averages(path) -> dict[str, dict[str, tuple[float, float]]]:
    out: dict[str, dict[str, tuple[float, float]]] = {g: {} for g in GROUPS}
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            out[r["group"]][r["seeker_id"]] = (
                float(r["mean_lower_seconds_per_day"]),
                float(r["mean_upper_seconds_per_day"]),
            )
    return out
