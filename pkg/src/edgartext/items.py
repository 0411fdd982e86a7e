"""Split clean 10-K text into its 20 item sections and emit JSON records.

A 10-K is organized in 4 parts and 20 items. Headings are located with
regular expressions tolerant of the many formats filers use ("Item 7.",
"ITEM 7A —", "item 7:"), table-of-contents occurrences are rejected, and
each surviving heading owns the text up to the next one.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

import jsonschema

from .cleaning import CleanDocument

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ItemCode:
    """One of the 20 canonical 10-K items, ordered as they appear in filings."""

    order: int
    code: str
    part: int
    title: str

    @property
    def key(self) -> str:
        """JSON key for this item, e.g. 'item_7A'."""
        return f"item_{self.code}"

    def __str__(self) -> str:
        return self.code


_ITEM_TABLE = [
    # code, part, title
    ("1", 1, "Business"),
    ("1A", 1, "Risk Factors"),
    ("1B", 1, "Unresolved Staff Comments"),
    ("2", 1, "Properties"),
    ("3", 1, "Legal Proceedings"),
    ("4", 1, "Mine Safety Disclosures"),
    ("5", 2, "Market"),
    ("6", 2, "Consolidated Financial Data"),
    ("7", 2, "Management's Discussion and Analysis"),
    ("7A", 2, "Quantitative and Qualitative Disclosures about Market Risks"),
    ("8", 2, "Financial Statements"),
    ("9", 2, "Changes in and Disagreements With Accountants"),
    ("9A", 2, "Controls and Procedures"),
    ("9B", 2, "Other Information"),
    ("10", 3, "Directors, Executive Officers and Corporate Governance"),
    ("11", 3, "Executive Compensation"),
    ("12", 3, "Security Ownership of Certain Beneficial Owners"),
    ("13", 3, "Certain Relationships and Related Transactions"),
    ("14", 3, "Principal Accounting Fees and Services"),
    ("15", 4, "Exhibits and Financial Statement Schedules Signatures"),
]

ITEM_CODES: tuple[ItemCode, ...] = tuple(
    ItemCode(i, code, part, title) for i, (code, part, title) in enumerate(_ITEM_TABLE)
)
ITEM_BY_CODE: dict[str, ItemCode] = {item.code: item for item in ITEM_CODES}

RECORD_KEYS: tuple[str, ...] = ("filename", "cik", "year") + tuple(
    item.key for item in ITEM_CODES
)

# Version of the FilingRecord JSON layout, bumped on any key change.
SCHEMA_VERSION = "1"


@dataclass
class FilingRecord:
    """One filing as a flat JSON object: filename, cik, year + 20 item texts.

    Every item key is always present; missing items carry an empty string so
    downstream bulk loaders see a fixed schema.
    """

    filename: str
    cik: str
    year: str
    items: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.items = dict(self.items)
        for item in ITEM_CODES:
            self.items.setdefault(item.code, "")
        unknown = set(self.items) - set(ITEM_BY_CODE)
        if unknown:
            raise ValueError(f"unknown item codes: {sorted(unknown)}")

    def to_dict(self) -> dict[str, str]:
        out = {"filename": self.filename, "cik": self.cik, "year": self.year}
        for item in ITEM_CODES:
            out[item.key] = self.items[item.code]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FilingRecord":
        missing = set(RECORD_KEYS) - set(data)
        if missing:
            raise ValueError(f"record is missing keys: {sorted(missing)}")
        items = {item.code: data[item.key] for item in ITEM_CODES}
        return cls(
            filename=data["filename"], cik=data["cik"], year=data["year"], items=items
        )


def record_schema() -> dict:
    """The packaged JSON schema for FilingRecord objects."""
    text = (
        resources.files("edgartext") / "schemas" / "filing_record.schema.json"
    ).read_text("utf-8")
    return json.loads(text)


def validate_record(data: dict) -> None:
    """Raise jsonschema.ValidationError unless ``data`` is a valid record."""
    jsonschema.validate(data, record_schema())


# -- heading detection -------------------------------------------------------

# "ITEM", optional plural (combined headings like "Items 7 and 7A"), light
# separators, the number, and a possible A/B suffix glued to the digits.
_HEADING_RE = re.compile(
    r"items?[\s.\-–—:]{0,8}(\d{1,2})([ab])?(?!\w)", re.IGNORECASE
)
_COMBINED_RE = re.compile(r"^\s*(?:and|&)\s*(\d{1,2})([ab])?(?!\w)", re.IGNORECASE)
_SENTENCE_END = frozenset(".;:!?")

TOC_WINDOW_CHARS = 1000
TOC_MIN_HEADINGS = 4


def _at_heading_position(text: str, start: int) -> bool:
    """True at start of line or right after a sentence boundary; suppresses
    in-sentence cross references like 'see Item 7'."""
    i = start - 1
    while i >= 0 and text[i] in " \t":
        i -= 1
    if i < 0 or text[i] == "\n":
        return True
    return text[i] in _SENTENCE_END


def find_heading_candidates(
    doc: Union[CleanDocument, str]
) -> list[tuple[ItemCode, int]]:
    """Every plausible item-heading occurrence with its character offset.

    Table-of-contents occurrences are included here; disambiguation happens
    in resolve_sections. 'Item 7A' reports only 7A, never also 7.
    """
    text = doc.text if isinstance(doc, CleanDocument) else doc
    candidates: list[tuple[ItemCode, int]] = []
    for m in _HEADING_RE.finditer(text):
        code = m.group(1) + (m.group(2) or "").upper()
        item = ITEM_BY_CODE.get(code)
        if item is None or not _at_heading_position(text, m.start()):
            continue
        combined = _COMBINED_RE.match(text, m.end())
        if combined:
            log.debug(
                "combined heading at %d: item %s plus %s%s; span goes to the first",
                m.start(), code, combined.group(1), (combined.group(2) or "").upper(),
            )
        candidates.append((item, m.start()))
    return candidates


def _toc_flags(offsets: list[int]) -> list[bool]:
    """Flag candidates falling in any window of TOC_MIN_HEADINGS headings
    within TOC_WINDOW_CHARS characters (table of contents, exhibit lists)."""
    flags = [False] * len(offsets)
    for i in range(len(offsets) - TOC_MIN_HEADINGS + 1):
        if offsets[i + TOC_MIN_HEADINGS - 1] - offsets[i] <= TOC_WINDOW_CHARS:
            for j in range(i, i + TOC_MIN_HEADINGS):
                flags[j] = True
    return flags


def resolve_sections(
    candidates: list[tuple[ItemCode, int]], doc: Union[CleanDocument, str]
) -> dict[ItemCode, tuple[int, int]]:
    """Choose one body occurrence per item and assign disjoint spans.

    Candidates inside a table-of-contents cluster are set aside first; among
    the survivors, duplicates resolve to the occurrence with the longest run
    of text before the next surviving heading, and picks landing out of
    document order are dropped. Items whose every occurrence was flagged
    (filings with runs of one-line sections look locally like a contents
    list) get a recovery pass: a flagged occurrence is admitted only where
    it fits strictly between the chosen offsets of its neighbors in item
    order, which no true contents entry can do. Each final span runs from
    its heading to the next chosen heading, the last one to the end of the
    document.
    """
    text = doc.text if isinstance(doc, CleanDocument) else doc
    ordered = sorted(candidates, key=lambda c: c[1])
    if not ordered:
        return {}
    offsets = [offset for _, offset in ordered]
    flags = _toc_flags(offsets)
    n = len(ordered)

    # phase 1: unflagged candidates, longest body to the next unflagged one
    live_idx = [i for i in range(n) if not flags[i]]
    best: dict[ItemCode, tuple[int, int]] = {}  # item -> (body_len, offset)
    for pos, i in enumerate(live_idx):
        until = offsets[live_idx[pos + 1]] if pos + 1 < len(live_idx) else len(text)
        item = ordered[i][0]
        body_len = until - offsets[i]
        if item not in best or body_len > best[item][0]:
            best[item] = (body_len, offsets[i])

    chosen: dict[ItemCode, int] = {}
    cursor = -1
    for item in ITEM_CODES:
        if item not in best:
            continue
        offset = best[item][1]
        if offset <= cursor:
            log.warning("dropping out-of-order span for item %s at %d", item, offset)
            continue
        chosen[item] = offset
        cursor = offset

    # phase 2: recover items that only had flagged occurrences
    flagged_by_item: dict[ItemCode, list[tuple[int, int]]] = {}
    for i in range(n):
        if flags[i]:
            item = ordered[i][0]
            until = offsets[i + 1] if i + 1 < n else len(text)
            flagged_by_item.setdefault(item, []).append((until - offsets[i], offsets[i]))
    for item in ITEM_CODES:
        if item in chosen or item not in flagged_by_item:
            continue
        lo = max(
            (off for it, off in chosen.items() if it.order < item.order), default=-1
        )
        hi = min(
            (off for it, off in chosen.items() if it.order > item.order),
            default=len(text) + 1,
        )
        fitting = [(l, off) for l, off in flagged_by_item[item] if lo < off < hi]
        if fitting:
            _, offset = max(fitting, key=lambda p: (p[0], -p[1]))
            chosen[item] = offset

    picks = sorted(chosen.items(), key=lambda kv: kv[1])
    spans: dict[ItemCode, tuple[int, int]] = {}
    for i, (item, offset) in enumerate(picks):
        end = picks[i + 1][1] if i + 1 < len(picks) else len(text)
        spans[item] = (offset, end)
    return spans


ALL_ITEMS = frozenset(item.code for item in ITEM_CODES)


def extract(
    doc: CleanDocument, wanted: Optional[Iterable[Union[str, ItemCode]]] = None
) -> FilingRecord:
    """Build the JSON record for one filing, filling the wanted item texts.

    ``wanted`` defaults to all 20 items; unwanted or missing items come back
    as empty strings. Each item's text starts at its own heading line.
    """
    if wanted is None:
        wanted_codes = ALL_ITEMS
    else:
        wanted_codes = frozenset(str(w) for w in wanted)
        unknown = wanted_codes - ALL_ITEMS
        if unknown:
            raise ValueError(f"unknown item codes: {sorted(unknown)}")
    spans = resolve_sections(find_heading_candidates(doc), doc)
    items = {
        item.code: doc.text[start:end].strip()
        for item, (start, end) in spans.items()
        if item.code in wanted_codes
    }
    meta = doc.meta
    return FilingRecord(
        filename=doc.source_filename,
        cik=str(meta.cik) if meta is not None else "",
        year=str(doc.fiscal_year),
        items=items,
    )


# -- record I/O ---------------------------------------------------------------


def write_records_jsonl(records: Iterable[FilingRecord], path: Path) -> int:
    """Append records to a JSONL file, one object per line. Returns count."""
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("a", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def iter_jsonl(path: Path) -> Iterator[dict]:
    """Yield one parsed object per line; the caller decides what malformed
    lines cost (corpus statistics counts and skips them)."""
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def iter_item_texts(input_dir: Path) -> Iterator[str]:
    """Stream every non-empty item text from the JSONL files under a
    directory, in sorted file order. Undecodable lines are skipped."""
    item_keys = [item.key for item in ITEM_CODES]
    for path in sorted(Path(input_dir).rglob("*.jsonl")):
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    log.warning("skipping undecodable line in %s", path)
                    continue
                if not isinstance(record, dict):
                    continue
                for key in item_keys:
                    text = record.get(key, "")
                    if text:
                        yield text
