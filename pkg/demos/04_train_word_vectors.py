"""Train skip-gram word vectors on an extracted corpus.

The trainer implements skip-gram with negative sampling: for every
(center, context) pair inside a randomly shrunk window it pushes the pair's
vectors together and pushes the center away from a few noise words drawn
from the unigram^0.75 distribution. The learning rate decays linearly; with
a fixed seed in deterministic (single-worker) mode the run is reproducible
down to the bytes of the exported vector file.

At production scale this is the same recipe as the published financial
word2vec setups: 200 dimensions over a 100K-word vocabulary. Here we train
a small model on the bundled sample corpus so the demo finishes in seconds.
"""

from pathlib import Path

from edgartext import (
    RawFiling, TextCorpus, TrainConfig, clean, export_vectors, extract, train,
)
from edgartext.items import ITEM_CODES

HERE = Path(__file__).resolve().parent
DATA = HERE.parent / "tests" / "fixtures" / "archive" / "edgar" / "data"


def item_texts():
    for path in sorted(DATA.rglob("*.txt")):
        raw = RawFiling.from_bytes(path.read_bytes(), source_name=path.name)
        record = extract(clean(raw))
        for item in ITEM_CODES:
            if record.items[item.code]:
                yield record.items[item.code]


# TextCorpus re-tokenizes on every pass; training needs several passes
# (one to build the vocabulary, one per epoch).
corpus = TextCorpus(item_texts)

config = TrainConfig(
    dim=32,            # 200 at production scale
    max_vocab=2000,    # 100_000 at production scale
    min_count=2,
    epochs=5,
    seed=7,
    deterministic=True,
)
model = train(corpus, config)
print(f"vocabulary: {len(model.vocab)} tokens, dim {model.dim}")
print("mean pair loss per epoch:",
      " ".join(f"{x:.4f}" for x in model.epoch_losses))

out = HERE / "output" / "vectors_demo.txt"
out.parent.mkdir(parents=True, exist_ok=True)
export_vectors(model, out)
print(f"wrote {out} (standard text format: 'count dim' header, token + values)")
