import math
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iwaa.core import ActivitySequence, CoverageError, IWAAError, Roster
from iwaa.quadrature import reference_bounds
from iwaa.roles import Pair
from iwaa.visibility import (
    ExposureParams,
    PresenceParams,
    VisibilityBound,
    Wall,
    average_visibility,
    build_wall,
    exposure,
    friends_vs_visibility,
    pair_daily_bounds,
    presence,
    visibility_bounds,
)

from conftest import T0, at, reply, retweet, tweet
from instances import DAY, random_instance

HOUR = 3600


class TestWall:
    def test_reply_excluded(self):
        roster = Roster(users={"s": False, "f": False}, follows=frozenset({("s", "f")}))
        seqs = {"f": ActivitySequence.of([tweet("a", "f", 0), reply("b", "f", 1, "x")])}
        assert len(build_wall("s", roster, seqs)) == 1

    def test_merge_order(self):
        roster = Roster(users={"s": False, "f": False, "g": False}, follows=frozenset({("s", "f"), ("s", "g")}))
        seqs = {
            "f": ActivitySequence.of([tweet("f1", "f", 0), tweet("f2", "f", 20)]),
            "g": ActivitySequence.of([tweet("g1", "g", 10), tweet("g2", "g", 30)]),
        }
        wall = build_wall("s", roster, seqs)
        assert [e.event_id for e in wall.events] == ["f1", "g1", "f2", "g2"]

    def test_split_expert(self):
        evs = tuple(tweet(f"e{i}", "e", i) for i in range(3)) + (tweet("o", "f", 5),)
        mine, rest = Wall("s", evs).split("e")
        assert len(mine) == 3 and [e.event_id for e in rest] == ["o"]

    def test_no_friends(self):
        assert len(build_wall("s", Roster(users={"s": False}), {})) == 0


class TestExposure:
    def test_top(self):
        assert exposure(0, ExposureParams(7, 3)) == 1.0

    def test_saturated(self):
        assert exposure(100) == 0.0

    def test_half(self):
        assert exposure(50) == 0.25

    @given(st.integers(0, 300), st.integers(1, 200), st.integers(1, 4))
    def test_monotone(self, n, k, m):
        p = ExposureParams(k, m)
        assert exposure(n + 1, p) <= exposure(n, p)
        assert exposure(n, ExposureParams(k + 1, m)) >= exposure(n, p)
        if 0 < n < k:
            assert exposure(n, ExposureParams(k, m + 1)) <= exposure(n, p)


class TestPresence:
    def test_peak(self):
        assert presence(at(50), [tweet("p", "s", 50)]) == 1.0

    def test_session(self):
        posts = [tweet("p", "s", 0), tweet("q", "s", 180)]
        assert presence(at(90), posts) == 1.0

    def test_ten_minutes(self):
        v = presence(at(600), [tweet("p", "s", 0)])
        assert 0.028 <= v <= 0.032
        assert v == pytest.approx(math.exp(-(1 / 6) / 0.047))

    def test_no_posts(self):
        assert presence(at(0), []) == 0.0

    @given(st.lists(st.floats(0, 5000), min_size=1, max_size=8), st.floats(-1000, 6000))
    def test_range(self, times, t):
        posts = [tweet(f"p{i}", "s", x) for i, x in enumerate(times)]
        assert 0.0 <= presence(at(t), posts) <= 1.0


class TestBounds:
    window = (T0, T0 + timedelta(hours=1))

    def test_no_expert_posts(self):
        wall = Wall("s", (tweet("o", "f", 10),))
        assert visibility_bounds("e", wall, [tweet("p", "s", 0)], self.window) == (0.0, 0.0)

    def test_full_hour(self):
        wall = Wall("s", (tweet("x", "e", 0),))
        posts = [tweet(f"p{i}", "s", i * 120) for i in range(31)]  # every 2 minutes through the hour
        lo, up = visibility_bounds("e", wall, posts, self.window)
        assert lo == pytest.approx(HOUR) and up == pytest.approx(HOUR)

    def test_coverage(self):
        wall = Wall("s", (tweet("x", "e", 0),))
        with pytest.raises(CoverageError):
            visibility_bounds("e", wall, [], self.window, coverage=(at(10), at(2 * HOUR)))

    def test_retweet_of_expert_counts(self):
        wall = Wall("s", (retweet("x", "f", 0, "e"),))
        assert visibility_bounds("e", wall, [], self.window)[1] == pytest.approx(HOUR)

    def test_against_quadrature_richardson(self):
        rng = np.random.default_rng(123)
        for _ in range(25):
            wall, posts, window, ep, pp = random_instance(rng, window_s=2 * HOUR)
            got = visibility_bounds("E", wall, posts, window, ep, pp)
            ref = reference_bounds("E", wall, posts, window, ep, pp, h=0.1, richardson=True)
            for g, r in zip(got, ref):
                assert abs(g - r) <= max(1e-6 * abs(r), 1e-9)

    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.99))
    @settings(max_examples=60, deadline=None)
    def test_additivity_and_order(self, seed, frac):
        wall, posts, (t1, t3), ep, pp = random_instance(np.random.default_rng(seed))
        t2 = t1 + (t3 - t1) * frac
        whole = visibility_bounds("E", wall, posts, (t1, t3), ep, pp)
        a = visibility_bounds("E", wall, posts, (t1, t2), ep, pp)
        b = visibility_bounds("E", wall, posts, (t2, t3), ep, pp)
        assert abs(whole[0] - a[0] - b[0]) < 1e-9 and abs(whole[1] - a[1] - b[1]) < 1e-9
        assert 0.0 <= whole[0] <= whole[1] <= DAY

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_k_and_m(self, seed):
        wall, posts, window, ep, pp = random_instance(np.random.default_rng(seed))
        k_lo = visibility_bounds("E", wall, posts, window, ExposureParams(30, 2), pp)
        k_hi = visibility_bounds("E", wall, posts, window, ExposureParams(100, 2), pp)
        m_hi = visibility_bounds("E", wall, posts, window, ExposureParams(100, 1), pp)
        for a, b in zip(k_lo, k_hi):
            assert a <= b + 1e-9
        for a, b in zip(k_hi, m_hi):
            assert a <= b + 1e-9

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_doubling_unrelated_posts(self, seed):
        wall, posts, window, ep, pp = random_instance(np.random.default_rng(seed))
        _, rest = wall.split("E")
        extra = tuple(tweet(f"x{i}", "Z", (e.created_at - T0).total_seconds() + 1.0) for i, e in enumerate(rest))
        denser = Wall("S", tuple(sorted(wall.events + extra, key=lambda e: e.sort_key)))
        assert visibility_bounds("E", denser, posts, window, ep, pp)[1] <= visibility_bounds(
            "E", wall, posts, window, ep, pp
        )[1] + 1e-9


def _pair(topic="Math", followed=True, list_id="L", t_l=None):
    return Pair("S", "E", topic, list_id, t_l or T0 + timedelta(days=30), followed)


def test_topic_independence():
    wall, posts, _, ep, pp = random_instance(np.random.default_rng(9), window_s=30 * DAY)
    a = pair_daily_bounds(_pair("Math"), wall, posts, (ep,), pp)[ep]
    b = pair_daily_bounds(_pair("Music"), wall, posts, (ep,), pp)[ep]
    assert [(x.lower, x.upper) for x in a] == [(x.lower, x.upper) for x in b]


def test_daily_bounds_coverage():
    wall = Wall("S", (tweet("x", "E", 0),))
    with pytest.raises(CoverageError):
        pair_daily_bounds(_pair(), wall, [], coverage=(T0 + timedelta(days=1), T0 + timedelta(days=40)))


def _rows(seeker, expert, followed, values, list_id="L"):
    return [VisibilityBound(seeker, expert, list_id, d + 1, v, v, followed) for d, v in enumerate(values)]


class TestAverages:
    def test_one_day(self):
        rows = _rows("s", "e", True, [3.0] + [0.0] * 29)
        assert average_visibility(rows)["s"] == pytest.approx((0.1, 0.1))

    def test_group_absent(self):
        rows = _rows("s", "e", True, [1.0] * 30)
        assert "s" not in average_visibility(rows, "unfollowed")

    def test_equal_groups(self):
        rows = []
        for i, (f, v) in enumerate([(True, 2.0), (True, 4.0), (False, 1.0), (False, 5.0)]):
            rows += _rows("s", f"e{i}", f, [v] * 30)
        allv = average_visibility(rows, "all")["s"][1]
        fol = average_visibility(rows, "followed")["s"][1]
        unf = average_visibility(rows, "unfollowed")["s"][1]
        assert allv == pytest.approx((fol + unf) / 2)

    def test_wrong_bucket_count(self):
        with pytest.raises(IWAAError):
            average_visibility(_rows("s", "e", True, [1.0] * 29))


def test_single_friend_hourly_expert_near_maximal():
    # seeker's only friend is the expert, posting hourly; nothing else in the wall
    t_l = T0 + timedelta(days=31)
    evs = tuple(tweet(f"h{i}", "E", i * HOUR) for i in range(31 * 24))
    wall = Wall("S", evs)
    posts = [tweet(f"p{i}", "S", i * 600) for i in range(31 * 144)]
    pair = _pair(t_l=t_l)
    rows = pair_daily_bounds(pair, wall, posts)[ExposureParams()]
    avg = average_visibility(rows)
    roster = Roster(users={"S": False, "E": False}, follows=frozenset({("S", "E")}))
    ((s, friends, upper),) = friends_vs_visibility(avg, roster)
    assert friends == 1 and upper == pytest.approx(DAY)
    # the oracle agrees on one day
    d, (t1, t2) = rows[0].day_index, (t_l - timedelta(days=1), t_l)
    ref = reference_bounds("E", wall, posts, (t1, t2), ExposureParams(), PresenceParams(), richardson=False)
    assert ref[1] == pytest.approx(rows[0].upper, rel=1e-6)
    assert rows[0].lower == pytest.approx(ref[0], rel=1e-6)
