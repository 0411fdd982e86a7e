"""Cosine nearest-neighbor queries over trained word vectors.

Queries use the input vectors only (standard practice for skip-gram models).
The plural filter drops bare singular/plural pairs like market/markets,
which otherwise dominate the top of every neighbor list. Run demo 04 first
to produce the vector file, or point this at any file in the standard
"count dim" text format.
"""

import subprocess
import sys
from pathlib import Path

from edgartext import import_vectors, nearest_neighbors

HERE = Path(__file__).resolve().parent
VECTORS = HERE / "output" / "vectors_demo.txt"

if not VECTORS.exists():
    print("vector file missing; running demo 04 first")
    subprocess.run([sys.executable, str(HERE / "04_train_word_vectors.py")], check=True)

model = import_vectors(VECTORS)
print(f"loaded {len(model.vocab)} vectors of dim {model.dim}\n")

for query in ("company", "loan", "interest"):
    if query not in model.vocab:
        print(f"{query}: not in this small demo vocabulary")
        continue
    neighbors = nearest_neighbors(model, query, k=5, exclude_inflections=True)
    formatted = ", ".join(f"{token} ({score:.2f})" for token, score in neighbors)
    print(f"{query:>10}: {formatted}")

# On a full-archive model the classic sanity check is that a query like
# "economy" surfaces downturn/recession/slowdown-style neighbors; a corpus
# of two dozen sample filings is far too small for that, but the shape of
# the results (descending cosine, query excluded) is identical.
