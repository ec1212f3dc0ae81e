"""The numerical oracle checked against integrals done by hand."""

import math
from datetime import timedelta

import pytest

from iwaa.quadrature import reference_bounds
from iwaa.visibility import ExposureParams, PresenceParams, Wall

from conftest import T0, at, tweet

WIN = (T0, T0 + timedelta(seconds=1000))


def test_constant_exposure_no_posts():
    wall = Wall("S", (tweet("e", "E", 0),))
    lo, up = reference_bounds("E", wall, [], WIN, ExposureParams(), PresenceParams())
    assert (lo, up) == (0.0, pytest.approx(1000.0))


def test_step_exposure():
    # one other post at 400 s: f = 1 then (1 - 1/2)^1
    wall = Wall("S", (tweet("e", "E", 0), tweet("o", "F", 400)))
    _, up = reference_bounds("E", wall, [], WIN, ExposureParams(2, 1), PresenceParams())
    assert up == pytest.approx(400 + 0.5 * 600, rel=1e-9)


def test_single_kernel():
    # seeker posts once at 500 s; lower = a_l(1 - e^{-500/a_l}) + a_r(1 - e^{-500/a_r})
    pp = PresenceParams(a_l=0.02, a_r=0.03)
    wall = Wall("S", (tweet("e", "E", 0),))
    lo, _ = reference_bounds("E", wall, [tweet("p", "S", 500)], WIN, ExposureParams(), pp)
    al, ar = 0.02 * 3600, 0.03 * 3600
    expected = al * (1 - math.exp(-500 / al)) + ar * (1 - math.exp(-500 / ar))
    assert lo == pytest.approx(expected, rel=1e-7)


def test_session_plateau():
    pp = PresenceParams(a_l=0.01, a_r=0.01, session_gap=240)
    wall = Wall("S", (tweet("e", "E", 0),))
    posts = [tweet("p", "S", 400), tweet("q", "S", 600)]
    lo, _ = reference_bounds("E", wall, posts, WIN, ExposureParams(), pp)
    a = 36.0
    expected = 200 + a * (1 - math.exp(-400 / a)) + a * (1 - math.exp(-400 / a))
    assert lo == pytest.approx(expected, rel=1e-7)


def test_before_first_expert_post():
    wall = Wall("S", (tweet("e", "E", 600),))
    _, up = reference_bounds("E", wall, [], WIN, ExposureParams(), PresenceParams(), richardson=False)
    assert up == pytest.approx(400.0, rel=1e-9)
