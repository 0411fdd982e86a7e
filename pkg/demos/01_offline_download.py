"""Download 10-K filings from an archive mirror, politely and resumably.

EDGAR publishes one pipe-delimited "master index" per quarter listing every
filing; downloading is: fetch the index, pick the rows you want, fetch the
documents. The client spaces all requests through a shared rate limiter and
caches everything on disk, so rerunning a crawl costs zero network requests.

This demo replays the small archive mirror bundled with the test suite via a
file:// base URL, so it runs with no network at all. Point base_url at
https://www.sec.gov/Archives (and keep rate_limit <= 10) for the real thing.
"""

from pathlib import Path

from edgartext import CrawlConfig, EdgarClient, select_filings

HERE = Path(__file__).resolve().parent
ARCHIVE = HERE.parent / "tests" / "fixtures" / "archive"
OUT = HERE / "output" / "download"

config = CrawlConfig(
    start_year=2019,
    end_year=2020,
    user_agent="edgartext demo demo@example.com",  # SEC requires identification
    cache_dir=OUT / "cache",
    output_dir=OUT,
    base_url=ARCHIVE.as_uri(),
    rate_limit=10,
)
client = EdgarClient(config)

# Step 1: index rows for every quarter in the window.
rows = []
for year in range(config.start_year, config.end_year + 1):
    for quarter in (1, 2, 3, 4):
        rows.extend(client.fetch_index(year, quarter))
print(f"index rows matching {sorted(config.form_types)}: {len(rows)}")

# Step 2: narrow to the companies and years of interest. Selection is pure
# and deterministic: same inputs, same order.
selected = select_filings(rows, config)
for meta in selected:
    print(f"  cik={meta.cik:<8} {meta.date_filed}  {meta.company_name}")

# Step 3: download. Failures never abort a batch; they are recorded in a
# newline-delimited JSON manifest instead.
outcome = client.download_many(selected, failures_path=OUT / "failures.jsonl")
print(f"downloaded {len(outcome.filings)} filings, {len(outcome.failures)} failures")

# Rerunning the same crawl is free: every filing is already in the cache.
again = client.download_many(selected)
print(f"second run: {len(again.filings)} filings served from cache")
print(f"cache directory: {config.cache_dir}")
