"""Streaming corpus statistics over extracted filing records.

One pass, constant memory apart from the set of distinct company keys;
partial summaries merge associatively so aggregation order never matters.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from .items import ITEM_CODES, FilingRecord

log = logging.getLogger(__name__)


@dataclass
class CorpusSummary:
    """Aggregate counts over a stream of filing records."""

    total_tokens: int = 0
    filings: int = 0
    filings_with_content: int = 0
    malformed: int = 0
    year_min: Optional[int] = None
    year_max: Optional[int] = None
    ciks: set[str] = field(default_factory=set)
    items_nonempty: dict[str, int] = field(default_factory=dict)

    @property
    def distinct_ciks(self) -> int:
        return len(self.ciks)

    @property
    def per_item_coverage(self) -> dict[str, float]:
        """Fraction of content-bearing filings with a non-empty text per item.

        All-empty records still count toward filing totals and the year
        range, but they are extraction misses, not evidence about which
        items filers include, so they stay out of the coverage denominator.
        """
        if self.filings_with_content == 0:
            return {item.code: 0.0 for item in ITEM_CODES}
        return {
            item.code: self.items_nonempty.get(item.code, 0)
            / self.filings_with_content
            for item in ITEM_CODES
        }

    def add(self, record: Union[FilingRecord, dict, object]) -> None:
        """Fold one record in; anything unparseable counts as malformed."""
        if isinstance(record, dict):
            try:
                record = FilingRecord.from_dict(record)
            except (ValueError, TypeError, AttributeError):
                self.malformed += 1
                return
        if not isinstance(record, FilingRecord):
            self.malformed += 1
            return
        try:
            year = int(record.year)
        except ValueError:
            self.malformed += 1
            return
        self.filings += 1
        self.ciks.add(record.cik)
        self.year_min = year if self.year_min is None else min(self.year_min, year)
        self.year_max = year if self.year_max is None else max(self.year_max, year)
        any_content = False
        for item in ITEM_CODES:
            text = record.items[item.code]
            if text:
                any_content = True
                self.total_tokens += len(text.split())
                self.items_nonempty[item.code] = (
                    self.items_nonempty.get(item.code, 0) + 1
                )
        if any_content:
            self.filings_with_content += 1

    def merge(self, other: "CorpusSummary") -> "CorpusSummary":
        """Combine two partial summaries (commutative, associative)."""
        merged = CorpusSummary(
            total_tokens=self.total_tokens + other.total_tokens,
            filings=self.filings + other.filings,
            filings_with_content=self.filings_with_content
            + other.filings_with_content,
            malformed=self.malformed + other.malformed,
            ciks=self.ciks | other.ciks,
        )
        years = [y for y in (self.year_min, other.year_min) if y is not None]
        merged.year_min = min(years) if years else None
        years = [y for y in (self.year_max, other.year_max) if y is not None]
        merged.year_max = max(years) if years else None
        for key in set(self.items_nonempty) | set(other.items_nonempty):
            merged.items_nonempty[key] = self.items_nonempty.get(
                key, 0
            ) + other.items_nonempty.get(key, 0)
        return merged


def summarize(records: Iterable[Union[FilingRecord, dict]]) -> CorpusSummary:
    """Single streaming pass over records; see CorpusSummary.add."""
    summary = CorpusSummary()
    for record in records:
        summary.add(record)
    if summary.filings == 0:
        log.warning("empty record stream: year range undefined")
    return summary


def iter_record_dicts(paths: Iterable[Path]) -> Iterator[Union[dict, object]]:
    """Stream raw JSON objects from JSONL files; undecodable lines come out
    as a sentinel so the summary can count them as malformed."""
    for path in paths:
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    yield _MALFORMED


_MALFORMED = object()


def summarize_dir(input_dir: Path) -> CorpusSummary:
    """Summarize every *.jsonl file under ``input_dir`` (sorted, recursive)."""
    paths = sorted(Path(input_dir).rglob("*.jsonl"))
    return summarize(iter_record_dicts(paths))


def format_count(n: int) -> str:
    """Humanize large counts the way corpus-size tables do: 6.5B, 247.7M."""
    if n >= 10**9:
        return f"{n / 10**9:.1f}B".replace(".0B", "B")
    if n >= 10**6:
        return f"{n / 10**6:.1f}M".replace(".0M", "M")
    return f"{n:,}"


def report(summary: CorpusSummary, form_label: str = "10-K") -> str:
    """Fixed-width text table: filings, tokens, companies, year range,
    then per-item coverage. Deterministic formatting."""
    if summary.year_min is None:
        years = "-"
    elif summary.year_min == summary.year_max:
        years = str(summary.year_min)
    else:
        years = f"{summary.year_min}-{summary.year_max}"
    header = f"{'Corpus':<10}{'Filings':>10}{'Tokens':>12}{'Companies':>12}{'Years':>12}"
    if summary.filings == 0:
        cells = ["-", "-", "-"]
    else:
        cells = [
            format_count(summary.filings),
            format_count(summary.total_tokens),
            format_count(summary.distinct_ciks),
        ]
    row = (
        f"{form_label:<10}{cells[0]:>10}{cells[1]:>12}{cells[2]:>12}{years:>12}"
    )
    lines = [header, "-" * len(header), row, "", "Per-item coverage:"]
    coverage = summary.per_item_coverage
    for item in ITEM_CODES:
        lines.append(f"  item_{item.code:<4} {coverage[item.code]:>7.1%}")
    if summary.malformed:
        lines.append(f"\nmalformed records skipped: {summary.malformed}")
    return "\n".join(lines)


def write_coverage_csv(summary: CorpusSummary, path: Path) -> None:
    """Per-item sidecar: item_code, filings_total, filings_with_item_nonempty."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("item_code,filings_total,filings_with_item_nonempty\n")
        for item in ITEM_CODES:
            fh.write(
                f"{item.code},{summary.filings},{summary.items_nonempty.get(item.code, 0)}\n"
            )
