"""Evaluate embeddings on hypernym classification.

The task: given a financial term ("interest rate swap"), predict its parent
concept from a fixed label set. Terms are embedded by averaging their token
vectors, a multinomial logistic regression maps embeddings to labels, and
scoring uses stratified k-fold cross-validation with two measures: accuracy
and the mean 1-based rank of the correct label when labels are sorted by
predicted probability (a perfect model has mean rank 1; random guessing over
L labels drifts to (L + 1) / 2).

The bundled dataset is a 3-class toy (Debt / Equity / Derivative) whose
terms occur in the sample corpus; the same harness evaluates any vector file
against any {"term", "label"} JSONL dataset, including the 17-hypernym
financial-ontology benchmarks.
"""

import subprocess
import sys
from pathlib import Path

from edgartext import cross_validate, import_vectors, load_hypernym_dataset

HERE = Path(__file__).resolve().parent
VECTORS = HERE / "output" / "vectors_demo.txt"
DATASET = HERE.parent / "tests" / "fixtures" / "hypernyms_toy.jsonl"

if not VECTORS.exists():
    subprocess.run([sys.executable, str(HERE / "04_train_word_vectors.py")], check=True)

model = import_vectors(VECTORS)
dataset = load_hypernym_dataset(DATASET)
print(f"{len(dataset.examples)} terms, labels: {dataset.label_set}")

report = cross_validate(dataset, model, k=3, seed=13)
print(f"accuracy:  {report.accuracy:.3f}")
print(f"mean rank: {report.mean_rank:.3f}  (1.0 is perfect, "
      f"{(len(dataset.label_set) + 1) / 2:.1f} is chance)")
for i, (accuracy, rank) in enumerate(report.per_fold, 1):
    print(f"  fold {i}: accuracy {accuracy:.3f}, mean rank {rank:.3f}")
if report.oov_terms:
    print(f"terms fully out of vocabulary (embedded as zero): {report.oov_terms}")
