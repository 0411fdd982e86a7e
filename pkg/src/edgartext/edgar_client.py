"""Fetch EDGAR quarterly master indexes and filing documents, politely.

All network access goes through a ``Transport`` (swappable for tests and for
offline replay of a local archive via ``file://`` base URLs) and a shared
``RateLimiter`` that spaces request initiations so the SEC fair-use ceiling
is respected no matter how many download workers run.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Iterable, Optional, Protocol
from urllib.parse import urlparse
from urllib.request import url2pathname

import requests

from .errors import (
    ConfigError,
    DownloadError,
    ExtractionError,
    HttpStatusError,
    TransportError,
)

if TYPE_CHECKING:
    from .cleaning import RawFiling

log = logging.getLogger(__name__)

EDGAR_BASE_URL = "https://www.sec.gov/Archives"
INDEX_URL_PATTERN = "{base}/edgar/full-index/{year}/QTR{quarter}/master.idx"

FIRST_ELECTRONIC_YEAR = 1993  # EDGAR has no electronic filings before this
MAX_RATE_LIMIT = 10.0         # SEC fair-use ceiling, requests per second

# Forms that are 10-K variants; excluded by default, enable via CrawlConfig.
TEN_K_VARIANTS = ("10-K405", "10-KSB", "10-K/A")


@dataclass(frozen=True, order=True)
class FilingMetadata:
    """One row of an EDGAR master index: who filed what, when, where."""

    cik: int
    company_name: str
    form_type: str
    date_filed: date
    archive_path: str

    def __post_init__(self):
        if self.cik <= 0:
            raise ValueError(f"cik must be positive, got {self.cik}")
        if not self.archive_path or not self.archive_path.endswith(".txt"):
            raise ValueError(f"archive_path must end in .txt: {self.archive_path!r}")

    @property
    def accession(self) -> str:
        """Accession number parsed from the archive path; globally unique."""
        return Path(self.archive_path).stem


@dataclass
class CrawlConfig:
    """Settings for one crawl: window, filters, politeness, directories."""

    start_year: int = FIRST_ELECTRONIC_YEAR
    end_year: int = 2020
    cik_filter: Optional[frozenset[int]] = None
    form_types: frozenset[str] = frozenset({"10-K"})
    rate_limit: float = MAX_RATE_LIMIT
    user_agent: str = ""
    cache_dir: Path = Path("cache")
    output_dir: Path = Path("output")
    base_url: str = EDGAR_BASE_URL
    index_url_pattern: str = INDEX_URL_PATTERN
    timeout: float = 30.0
    max_attempts: int = 3
    backoff_base: float = 1.0
    workers: int = 4

    def __post_init__(self):
        self.cache_dir = Path(self.cache_dir)
        self.output_dir = Path(self.output_dir)

    def validate(self) -> None:
        """Raise ConfigError if the crawl must not run with these settings."""
        if self.start_year < FIRST_ELECTRONIC_YEAR:
            raise ConfigError(
                f"start_year {self.start_year} precedes EDGAR electronic "
                f"filings ({FIRST_ELECTRONIC_YEAR})"
            )
        if self.start_year > self.end_year:
            raise ConfigError(
                f"start_year {self.start_year} > end_year {self.end_year}"
            )
        if not 0 < self.rate_limit <= MAX_RATE_LIMIT:
            raise ConfigError(
                f"rate_limit must be in (0, {MAX_RATE_LIMIT:g}], got {self.rate_limit}"
            )
        if not self.user_agent.strip():
            raise ConfigError(
                "user_agent is required (SEC asks every client to identify "
                "itself, e.g. 'Jane Doe jane@example.com')"
            )
        if self.max_attempts < 1 or self.workers < 1:
            raise ConfigError("max_attempts and workers must be >= 1")

    def with_variants(self) -> "CrawlConfig":
        """Copy of this config that also accepts the 10-K variant forms."""
        return replace(self, form_types=self.form_types | frozenset(TEN_K_VARIANTS))


class Transport(Protocol):
    """Minimal fetch interface; implementations raise TransportError family."""

    def get(self, url: str) -> bytes: ...


class HttpTransport:
    """requests-backed transport; also serves file:// URLs for offline replay."""

    def __init__(self, user_agent: str, timeout: float = 30.0):
        self._headers = {"User-Agent": user_agent}
        self._timeout = timeout
        self._session = requests.Session()

    def get(self, url: str) -> bytes:
        if url.startswith("file://"):
            path = Path(url2pathname(urlparse(url).path))
            try:
                return path.read_bytes()
            except FileNotFoundError:
                raise HttpStatusError(404, url) from None
            except IsADirectoryError:
                raise HttpStatusError(404, url) from None
        try:
            resp = self._session.get(url, headers=self._headers, timeout=self._timeout)
        except requests.RequestException as exc:
            raise TransportError(f"{url}: {exc}") from exc
        if resp.status_code != 200:
            raise HttpStatusError(resp.status_code, url)
        return resp.content


class RateLimiter:
    """Shared token source spacing request initiations by 1/rate seconds.

    Admissions are serialized under one lock, so over any one-second window
    at most ``rate`` requests start, regardless of how many threads share the
    limiter. ``clock`` and ``sleep`` are injectable so tests can run on a
    virtual clock.
    """

    def __init__(
        self,
        rate: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self._interval = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_free: Optional[float] = None

    def acquire(self) -> float:
        """Block until a slot is free; return the scheduled initiation time."""
        with self._lock:
            now = self._clock()
            start = now if self._next_free is None else max(now, self._next_free)
            self._next_free = start + self._interval
        delay = start - now
        if delay > 0:
            self._sleep(delay)
        return start


_INDEX_HEADER_FIELDS = ("cik", "company name", "form type", "date filed", "filename")


def parse_master_index(
    text: str, form_types: frozenset[str]
) -> tuple[list[FilingMetadata], int]:
    """Parse a pipe-delimited master index into rows matching ``form_types``.

    Returns (entries, skipped_lines). Preamble lines without pipes, the
    column-header row and the dashed separator are ignored silently; any
    other unparseable pipe-delimited line is skipped and counted, never
    aborting the whole index.
    """
    entries: list[FilingMetadata] = []
    skipped = 0
    for line in text.splitlines():
        line = line.strip()
        if "|" not in line:
            continue
        parts = [p.strip() for p in line.split("|")]
        if [p.lower() for p in parts] == list(_INDEX_HEADER_FIELDS):
            continue
        try:
            if len(parts) != 5:
                raise ValueError("wrong field count")
            cik = int(parts[0])
            company, form = parts[1], parts[2]
            filed = date.fromisoformat(parts[3])
            path = parts[4]
            if not company or not form:
                raise ValueError("empty field")
            meta = FilingMetadata(cik, company, form, filed, path)
        except ValueError:
            skipped += 1
            log.warning("skipping malformed index line: %r", line)
            continue
        if meta.form_type in form_types:
            entries.append(meta)
    return entries, skipped


def select_filings(
    indices: Iterable[FilingMetadata], config: CrawlConfig
) -> list[FilingMetadata]:
    """Filter index rows by CIK set and year window; deterministic order."""
    rows = [
        m
        for m in indices
        if config.start_year <= m.date_filed.year <= config.end_year
        and (config.cik_filter is None or m.cik in config.cik_filter)
    ]
    rows.sort(key=lambda m: (m.cik, m.date_filed, m.archive_path))
    return rows


@dataclass
class DownloadOutcome:
    """Result of one batch download: filings fetched plus recorded failures."""

    filings: list["RawFiling"] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)


class EdgarClient:
    """Rate-limited, cached access to the EDGAR archive.

    The limiter is the only cross-worker coordination point; index parsing
    and filing selection are pure functions.
    """

    def __init__(
        self,
        config: CrawlConfig,
        transport: Optional[Transport] = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        config.validate()
        self.config = config
        self.transport = transport or HttpTransport(config.user_agent, config.timeout)
        self._sleep = sleep
        self.limiter = RateLimiter(config.rate_limit, clock=clock, sleep=sleep)

    # -- urls and cache paths ------------------------------------------------

    def index_url(self, year: int, quarter: int) -> str:
        return self.config.index_url_pattern.format(
            base=self.config.base_url.rstrip("/"), year=year, quarter=quarter
        )

    def filing_url(self, meta: FilingMetadata) -> str:
        return f"{self.config.base_url.rstrip('/')}/{meta.archive_path.lstrip('/')}"

    def _index_cache_path(self, year: int, quarter: int) -> Path:
        return self.config.cache_dir / "index" / f"{year}-QTR{quarter}.idx"

    def _filing_cache_path(self, meta: FilingMetadata) -> Path:
        return self.config.cache_dir / "filings" / f"{meta.accession}.txt"

    # -- fetching ------------------------------------------------------------

    def _get_with_retries(self, url: str) -> bytes:
        """GET with bounded retries and exponential backoff on network errors.

        403/404 are permanent and fail immediately; other failures retry up
        to config.max_attempts with backoff_base * 2**i sleeps in between.
        """
        attempts = 0
        while True:
            attempts += 1
            self.limiter.acquire()
            try:
                return self.transport.get(url)
            except HttpStatusError as exc:
                if exc.status in (403, 404):
                    raise DownloadError(str(exc), attempts=attempts) from exc
                last_error = exc
            except TransportError as exc:
                last_error = exc
            if attempts >= self.config.max_attempts:
                raise DownloadError(str(last_error), attempts=attempts) from last_error
            backoff = self.config.backoff_base * 2 ** (attempts - 1)
            log.warning("retrying %s in %.1fs: %s", url, backoff, last_error)
            self._sleep(backoff)

    def fetch_index(self, year: int, quarter: int) -> list[FilingMetadata]:
        """Return index rows for (year, quarter) whose form is configured.

        The raw index is cached on disk, so a second call for the same
        quarter performs no network request.
        """
        if not self.config.start_year <= year <= self.config.end_year:
            raise ConfigError(
                f"year {year} outside configured window "
                f"{self.config.start_year}-{self.config.end_year}"
            )
        if quarter not in (1, 2, 3, 4):
            raise ConfigError(f"quarter must be 1-4, got {quarter}")
        cache = self._index_cache_path(year, quarter)
        if cache.exists():
            raw = cache.read_bytes()
        else:
            raw = self._get_with_retries(self.index_url(year, quarter))
            cache.parent.mkdir(parents=True, exist_ok=True)
            cache.write_bytes(raw)
        entries, skipped = parse_master_index(
            raw.decode("latin-1"), self.config.form_types
        )
        if skipped:
            log.warning("%d malformed line(s) in %d-QTR%d index", skipped, year, quarter)
        return entries

    def download_filing(self, meta: FilingMetadata) -> "RawFiling":
        """Download one raw filing, serving repeats from the disk cache."""
        from .cleaning import RawFiling

        cache = self._filing_cache_path(meta)
        if cache.exists():
            return RawFiling.from_bytes(cache.read_bytes(), meta)
        raw = self._get_with_retries(self.filing_url(meta))
        cache.parent.mkdir(parents=True, exist_ok=True)
        cache.write_bytes(raw)
        return RawFiling.from_bytes(raw, meta)

    def download_many(
        self,
        metas: Iterable[FilingMetadata],
        failures_path: Optional[Path] = None,
        workers: Optional[int] = None,
    ) -> DownloadOutcome:
        """Download filings on a worker pool; failures never abort the batch.

        Failed filings are recorded as {cik, archive_path, reason} objects,
        appended to ``failures_path`` as newline-delimited JSON when given.
        """
        metas = list(metas)
        outcome = DownloadOutcome()

        def fetch(meta: FilingMetadata):
            try:
                return meta, self.download_filing(meta), None
            except (DownloadError, ExtractionError) as exc:
                return meta, None, str(exc)

        n_workers = workers or self.config.workers
        if n_workers <= 1:
            results = map(fetch, metas)
        else:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(fetch, metas))
        for meta, filing, reason in results:
            if filing is not None:
                outcome.filings.append(filing)
            else:
                log.error("failed %s: %s", meta.archive_path, reason)
                outcome.failures.append(
                    {"cik": meta.cik, "archive_path": meta.archive_path, "reason": reason}
                )
        if failures_path is not None and outcome.failures:
            failures_path.parent.mkdir(parents=True, exist_ok=True)
            with failures_path.open("a", encoding="utf-8") as fh:
                for failure in outcome.failures:
                    fh.write(json.dumps(failure) + "\n")
        return outcome
