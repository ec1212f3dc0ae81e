from datetime import datetime, timedelta

import pytest

from iwaa.core import UTC, ActivityEvent, LikeRecord, PostKind

T0 = datetime(2021, 3, 1, tzinfo=UTC)

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


def at(seconds: float = 0.0) -> datetime:
    return T0 + timedelta(seconds=seconds)


def tweet(eid, author, s):
    return ActivityEvent(eid, author, PostKind.TWEET, at(s))


def retweet(eid, author, s, of):
    return ActivityEvent(eid, author, PostKind.RETWEET, at(s), retweeted_author_id=of)


def reply(eid, author, s, to):
    return ActivityEvent(eid, author, PostKind.REPLY, at(s), replied_author_id=to)


def like(user, author, s, pid="p"):
    return LikeRecord(user, pid, author, at(s))


@pytest.fixture
def t0():
    return T0


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixture_run(tmp_path_factory):
    """One full run (all stages) on the bundled fixture: (config path, out dir, wall seconds)."""
    import time

    from iwaa.pipeline import STAGES, RunConfig, run_pipeline, write_bundled_fixture

    d = tmp_path_factory.mktemp("fixture")
    cfg_path = write_bundled_fixture(d)
    start = time.perf_counter()
    run_pipeline(RunConfig.from_file(cfg_path), STAGES)
    return cfg_path, d / "out", time.perf_counter() - start
