"""From raw filing bytes to a 20-item JSON record.

A raw EDGAR filing is an SGML envelope: a header with filing metadata, then
one <DOCUMENT> block per bundled file (the 10-K itself plus exhibits and
graphics). Cleaning selects the main document, deletes numeric data tables,
strips markup, and normalizes whitespace; extraction then finds the item
headings ("Item 1A. Risk Factors", "ITEM 7 ...") and assigns each item the
text up to the next heading, skipping the table of contents.
"""

import json
from pathlib import Path

from edgartext import RawFiling, clean, extract
from edgartext.items import ITEM_CODES

HERE = Path(__file__).resolve().parent
FILING = (HERE.parent / "tests" / "fixtures" / "archive" / "edgar" / "data"
          / "320193" / "0000320193-20-000096.txt")

raw = RawFiling.from_bytes(FILING.read_bytes(), source_name=FILING.name)
print(f"company:   {raw.meta.company_name} (cik {raw.meta.cik})")
print(f"filed:     {raw.meta.date_filed}, period {raw.period_of_report}")

doc = clean(raw)
print(f"clean text: {len(doc.text):,} chars, "
      f"{doc.removed_tables} numeric tables removed, fiscal year {doc.fiscal_year}")

record = extract(doc)  # or extract(doc, wanted={"1A", "7"}) for specific items
for item in ITEM_CODES:
    text = record.items[item.code]
    if text:
        first_line = text.splitlines()[0]
        print(f"  item_{item.code:<3} {len(text):>6,} chars | {first_line[:60]}")

# The record serializes to the flat 23-key JSON object (filename, cik, year
# plus one key per item; absent items are empty strings, never missing keys).
out = HERE / "output" / "apple_2020.json"
out.parent.mkdir(parents=True, exist_ok=True)
out.write_text(json.dumps(record.to_dict(), indent=2))
print(f"wrote {out}")
