"""Shared fixtures: pinned archive paths, fake transports, virtual clock."""

from __future__ import annotations

from pathlib import Path

import pytest

from edgartext.edgar_client import CrawlConfig
from edgartext.errors import HttpStatusError, TransportError

FIXTURES = Path(__file__).parent / "fixtures"
ARCHIVE = FIXTURES / "archive"
ARCHIVE_URL = ARCHIVE.as_uri()  # file://... replay of the EDGAR layout


class ReplayTransport:
    """Serves canned bytes by URL and records every request made."""

    def __init__(self, responses: dict[str, bytes]):
        self.responses = responses
        self.calls: list[str] = []

    def get(self, url: str) -> bytes:
        self.calls.append(url)
        if url not in self.responses:
            raise HttpStatusError(404, url)
        return self.responses[url]


class FlakyTransport:
    """Fails with a retriable error a fixed number of times per URL."""

    def __init__(self, payload: bytes, failures: int):
        self.payload = payload
        self.failures = failures
        self.calls: list[str] = []

    def get(self, url: str) -> bytes:
        self.calls.append(url)
        if len(self.calls) <= self.failures:
            raise TransportError(f"simulated timeout for {url}")
        return self.payload


class CountingTransport:
    """Wraps another transport, recording (clock, url) per request."""

    def __init__(self, inner, clock=None):
        self.inner = inner
        self.clock = clock
        self.calls: list[str] = []
        self.timestamps: list[float] = []

    def get(self, url: str) -> bytes:
        self.calls.append(url)
        if self.clock is not None:
            self.timestamps.append(self.clock())
        return self.inner.get(url)


class FakeClock:
    """Virtual monotonic clock whose sleep simply advances time."""

    def __init__(self, start: float = 0.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        assert seconds >= 0
        self.now += seconds


def max_events_per_window(
    times: list[float], width: float = 1.0, eps: float = 1e-9
) -> int:
    """Largest number of events inside any half-open window of ``width``.

    ``eps`` absorbs float accumulation in timestamps spaced at exactly the
    limiter interval; a genuine rate violation overshoots it by orders of
    magnitude.
    """
    times = sorted(times)
    best = 0
    start = 0
    for i in range(len(times)):
        while times[i] - times[start] >= width - eps:
            start += 1
        best = max(best, i - start + 1)
    return best


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def archive_url() -> str:
    return ARCHIVE_URL


@pytest.fixture
def filing_paths() -> list[Path]:
    return sorted((ARCHIVE / "edgar" / "data").rglob("*.txt"))


@pytest.fixture
def crawl_config(tmp_path: Path) -> CrawlConfig:
    return CrawlConfig(
        start_year=1993,
        end_year=2020,
        user_agent="edgartext tests test@example.com",
        cache_dir=tmp_path / "cache",
        output_dir=tmp_path / "out",
        base_url=ARCHIVE_URL,
        backoff_base=0.0,  # no real sleeping in unit tests
    )


# -- acceptance summary lines ------------------------------------------------

ACCEPTANCE_RESULTS: list[str] = []


def record_acceptance(number: int, ok: bool, description: str) -> None:
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_RESULTS.append(f"[criterion {number:2d}] {status}  {description}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)
