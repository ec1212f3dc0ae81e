"""Numerical reference for the visibility integrals.

The integrand is evaluated pointwise from raw event times (latest expert post
by scan, nearest seeker post by neighbour search) and integrated with a
composite trapezoid rule. The rule is applied separately between every raw
event time and every midpoint of consecutive seeker posts, i.e. on a superset
of the points where the integrand may jump, with endpoint samples taken just
inside each sub-interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import to_us
from .visibility import ExposureParams, PresenceParams, is_expert_content


@dataclass(frozen=True)
class RawPair:
    """Times in seconds relative to an arbitrary origin."""

    expert_times: np.ndarray
    expert_rank: np.ndarray
    other_times: np.ndarray
    other_rank: np.ndarray
    seeker_times: np.ndarray

    @classmethod
    def from_events(cls, expert_id, wall_events, seeker_posts, origin_us: int) -> "RawPair":
        ordered = sorted(wall_events, key=lambda e: (to_us(e.created_at), e.event_id))
        ex_t, ex_r, ot_t, ot_r = [], [], [], []
        for rank, e in enumerate(ordered):
            t = (to_us(e.created_at) - origin_us) / 1e6
            if is_expert_content(e, expert_id):
                ex_t.append(t)
                ex_r.append(rank)
            else:
                ot_t.append(t)
                ot_r.append(rank)
        seeker = sorted({(to_us(e.created_at) - origin_us) / 1e6 for e in seeker_posts})
        return cls(
            np.array(ex_t), np.array(ex_r, dtype=int), np.array(ot_t), np.array(ot_r, dtype=int),
            np.array(seeker),
        )


def exposure_at(t: np.ndarray, raw: RawPair, ep: ExposureParams) -> np.ndarray:
    """Exposure at each time in ``t`` by direct counting."""
    t = np.asarray(t, dtype=float)
    if raw.expert_times.size == 0:
        return np.zeros_like(t)
    order = np.argsort(raw.expert_times, kind="stable")
    ex_t = raw.expert_times[order]
    # rank of the latest expert post among the first j expert posts by time (-1 for none)
    latest = np.concatenate(([-1], np.maximum.accumulate(raw.expert_rank[order])))
    # other posts ranked before that expert post
    before_latest = np.searchsorted(np.sort(raw.other_rank), latest, side="left")
    k_seen = np.searchsorted(ex_t, t, side="right")
    visible = np.searchsorted(np.sort(raw.other_times), t, side="right")
    n = visible - before_latest[k_seen]
    table = (1.0 - np.minimum(np.arange(raw.other_times.size + 1), ep.k) / ep.k) ** ep.m
    return np.where(k_seen > 0, table[np.clip(n, 0, None)], 0.0)


def presence_at(t: np.ndarray, raw: RawPair, pp: PresenceParams) -> np.ndarray:
    """Presence at each time in ``t`` from the nearest seeker posts."""
    t = np.asarray(t, dtype=float)
    p = raw.seeker_times
    if p.size == 0:
        return np.zeros_like(t)
    prev_of = np.concatenate(([-np.inf], p))
    next_of = np.concatenate((p, [np.inf]))
    same_session = (next_of - prev_of) <= pp.session_gap
    i = np.searchsorted(p, t, side="left")
    d_prev = t - prev_of[i]
    d_next = next_of[i] - t
    toward_next = d_next <= d_prev
    d = np.where(toward_next, d_next, d_prev)
    scale = np.where(toward_next, pp.a_l_seconds, pp.a_r_seconds)
    val = np.exp(-d / scale)
    val[same_session[i] | (d_next == 0)] = 1.0
    return val


def _trapezoid(u, v, h, fn):
    """Composite trapezoid of ``fn`` on every piece [u_i, v_i], summed."""
    n = np.maximum(np.ceil((v - u) / h).astype(np.int64), 1)
    step = (v - u) / n
    nudge = np.minimum(1e-7, step / 4)
    xs = []
    for ui, vi, ni, si, di in zip(u, v, n, step, nudge):
        x = ui + si * np.arange(ni + 1)
        # stay strictly inside the piece so one-sided limits are sampled
        x[0] = ui + di
        x[-1] = vi - di
        xs.append(x)
    x = np.concatenate(xs)
    ends = np.cumsum(n + 1)
    starts = ends - (n + 1)
    results = fn(x)
    out = []
    for y in results:
        sums = np.add.reduceat(y, starts)
        edge = 0.5 * (y[starts] + y[ends - 1])
        out.append(float(np.dot(step, sums - edge)))
    return out


def _breakpoints(raw: RawPair, t1: float, t2: float) -> np.ndarray:
    p = raw.seeker_times
    cand = np.concatenate(
        ([t1, t2], raw.expert_times, raw.other_times, p, (p[:-1] + p[1:]) / 2 if p.size > 1 else [])
    )
    return np.unique(cand[(cand >= t1) & (cand <= t2)])


def trapezoid_bounds(raw: RawPair, t1: float, t2: float, ep, pp, h: float = 0.1):
    """(lower, upper) by composite trapezoid at step at most ``h`` seconds."""
    if t2 <= t1:
        return 0.0, 0.0
    bp = _breakpoints(raw, t1, t2)

    def integrands(x):
        f = exposure_at(x, raw, ep)
        fo = np.zeros_like(f)
        hot = f > 0
        fo[hot] = f[hot] * presence_at(x[hot], raw, pp)
        return fo, f

    lower, upper = _trapezoid(bp[:-1], bp[1:], h, integrands)
    return lower, upper


@dataclass(frozen=True)
class QuadratureResult:
    lower: float
    upper: float
    lower_error: float
    upper_error: float


def quadrature_bounds(raw: RawPair, t1: float, t2: float, ep, pp, h: float = 0.1) -> QuadratureResult:
    """Trapezoid at ``h`` and ``h/2`` combined by Richardson extrapolation."""
    lo_h, up_h = trapezoid_bounds(raw, t1, t2, ep, pp, h)
    lo_h2, up_h2 = trapezoid_bounds(raw, t1, t2, ep, pp, h / 2)
    return QuadratureResult(
        (4 * lo_h2 - lo_h) / 3,
        (4 * up_h2 - up_h) / 3,
        abs(lo_h2 - lo_h),
        abs(up_h2 - up_h),
    )


def reference_bounds(expert_id, wall, seeker_posts, window, ep, pp, h: float = 0.1, richardson=True):
    """Numerical (lower, upper) for the same arguments as ``visibility_bounds``."""
    origin = to_us(window[0])
    raw = RawPair.from_events(expert_id, wall.events, seeker_posts, origin)
    t2 = (to_us(window[1]) - origin) / 1e6
    if richardson:
        res = quadrature_bounds(raw, 0.0, t2, ep, pp, h)
        return res.lower, res.upper
    return trapezoid_bounds(raw, 0.0, t2, ep, pp, h)
