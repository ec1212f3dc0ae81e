"""Seeded random small visibility instances shared by the oracle tests."""

from datetime import timedelta

import numpy as np

from iwaa.core import ActivityEvent, PostKind
from iwaa.visibility import ExposureParams, PresenceParams, Wall

from conftest import T0

DAY = 86_400


def _time(rng, lo_s, hi_s):
    return T0 + timedelta(microseconds=int(rng.integers(int(lo_s * 1e6), int(hi_s * 1e6))))


def random_instance(rng: np.random.Generator, window_s: float = DAY):
    """Wall with <=20 events (<=5 from the expert), <=10 seeker posts, random params."""
    n_exp = int(rng.integers(0, 6))
    n_other = int(rng.integers(0, 21 - n_exp))
    lo, hi = -0.25 * window_s, window_s * 1.05
    events = []
    times = []
    for i in range(n_exp + n_other):
        # occasional exact ties exercise the event-id tie-break
        t = times[int(rng.integers(len(times)))] if times and rng.random() < 0.15 else _time(rng, lo, hi)
        times.append(t)
        friend = f"F{int(rng.integers(4))}"
        if i < n_exp:
            if rng.random() < 0.7:
                ev = ActivityEvent(f"ev{i:02d}", "E", PostKind.TWEET, t)
            else:
                ev = ActivityEvent(f"ev{i:02d}", friend, PostKind.RETWEET, t, retweeted_author_id="E")
        else:
            if rng.random() < 0.8:
                ev = ActivityEvent(f"ev{i:02d}", friend, PostKind.TWEET, t)
            else:
                ev = ActivityEvent(f"ev{i:02d}", friend, PostKind.RETWEET, t, retweeted_author_id="X")
        events.append(ev)
    events.sort(key=lambda e: e.sort_key)

    n_seek = int(rng.integers(0, 11))
    seeker = []
    t = _time(rng, lo, hi)
    for j in range(n_seek):
        if rng.random() < 0.5:
            t = t + timedelta(seconds=float(rng.uniform(5, 400)))  # bursty sessions
        else:
            t = _time(rng, lo, hi)
        seeker.append(ActivityEvent(f"s{j:02d}", "S", PostKind.TWEET, t))

    ep = ExposureParams(int(rng.choice([1, 2, 3, 5, 10, 100])), int(rng.integers(1, 4)))
    pp = PresenceParams(
        a_l=float(rng.uniform(0.01, 0.1)),
        a_r=float(rng.uniform(0.01, 0.1)),
        session_gap=float(rng.uniform(60, 600)),
    )
    window = (T0, T0 + timedelta(seconds=window_s))
    return Wall("S", tuple(events)), tuple(seeker), window, ep, pp
