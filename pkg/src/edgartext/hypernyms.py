"""Hypernym classification harness for word embeddings.

Financial terms are embedded by averaging their token vectors and classified
into hypernyms with an L2-regularized multinomial logistic regression trained
by full-batch gradient descent. Scoring follows the usual protocol for this
task: accuracy and the mean 1-based rank of the correct hypernym under
stratified k-fold cross-validation (a perfect model has mean rank 1).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .embeddings import EmbeddingModel, tokenize

log = logging.getLogger(__name__)


@dataclass
class HypernymDataset:
    """Labeled terms: (term, label id) pairs plus the hypernym name table."""

    examples: list[tuple[str, int]]
    label_set: list[str]

    def __post_init__(self):
        for term, label in self.examples:
            if not 0 <= label < len(self.label_set):
                raise ValueError(f"label id {label} out of range for {term!r}")

    @property
    def terms(self) -> list[str]:
        return [t for t, _ in self.examples]

    @property
    def labels(self) -> np.ndarray:
        return np.array([l for _, l in self.examples], dtype=np.int64)


def load_hypernym_dataset(path: Path) -> HypernymDataset:
    """Read a JSONL file of {"term": ..., "label": ...} objects. Label ids
    are assigned by sorted label name, so files load deterministically."""
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            try:
                rows.append((str(obj["term"]), str(obj["label"])))
            except (KeyError, TypeError):
                raise ValueError(
                    f"{path}:{line_no}: expected {{'term','label'}} object"
                ) from None
    label_set = sorted({label for _, label in rows})
    label_id = {label: i for i, label in enumerate(label_set)}
    return HypernymDataset(
        examples=[(term, label_id[label]) for term, label in rows],
        label_set=label_set,
    )


# -- term embedding ------------------------------------------------------------


def embed_term(term: str, model: EmbeddingModel) -> np.ndarray:
    """Average of the in-vocabulary token vectors of ``term``; the zero
    vector when every token is out of vocabulary."""
    ids = [model.vocab.index[t] for t in tokenize(term) if t in model.vocab]
    if not ids:
        return np.zeros(model.dim)
    return model.input_vectors[ids].mean(axis=0)


def embed_terms(
    terms: Sequence[str], model: EmbeddingModel
) -> tuple[np.ndarray, int]:
    """Embed every term; returns the matrix and the count of fully
    out-of-vocabulary terms (which map to zero vectors)."""
    X = np.zeros((len(terms), model.dim))
    oov = 0
    for i, term in enumerate(terms):
        X[i] = embed_term(term, model)
        if not X[i].any():
            oov += 1
    return X, oov


# -- multinomial logistic regression --------------------------------------------


@dataclass
class ClassifierConfig:
    """Pinned training hyperparameters; documented defaults, not tuned."""

    l2: float = 1e-4
    max_iter: int = 2000
    tol: float = 1e-5  # gradient-norm stopping tolerance


@dataclass
class SoftmaxClassifier:
    weights: np.ndarray  # n_labels x dim
    bias: np.ndarray     # n_labels
    config: ClassifierConfig = field(default_factory=ClassifierConfig)

    def logits(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights.T + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.logits(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax takes the lowest index on ties, matching the rank tie-break
        return np.argmax(self.logits(X), axis=1)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_loss_and_grad(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + (l2/2)||W||^2 and its exact gradient.

    The bias stays unregularized; the loss uses log-sum-exp directly so
    finite-difference checks agree to full precision.
    """
    n = len(y)
    logits = X @ W.T + b
    zmax = logits.max(axis=1)
    lse = zmax + np.log(np.exp(logits - zmax[:, None]).sum(axis=1))
    loss = float((lse - logits[np.arange(n), y]).mean() + 0.5 * l2 * (W * W).sum())
    P = _softmax(logits)
    P[np.arange(n), y] -= 1.0
    P /= n
    grad_W = P.T @ X + l2 * W
    grad_b = P.sum(axis=0)
    return loss, grad_W, grad_b


def train_classifier(
    X: np.ndarray,
    y: np.ndarray,
    n_labels: int,
    config: Optional[ClassifierConfig] = None,
    label_names: Optional[Sequence[str]] = None,
) -> SoftmaxClassifier:
    """Fit by full-batch gradient descent with backtracking line search,
    stopping at gradient norm <= config.tol or the iteration cap.

    Deterministic given the data order. Every label in [0, n_labels) must
    appear in ``y`` (stratified folding upstream guarantees this), and at
    least two classes are required.
    """
    config = config or ClassifierConfig()
    present = set(np.unique(y).tolist())
    if len(present) < 2:
        raise ValueError("training data must contain at least 2 classes")
    for label in range(n_labels):
        if label not in present:
            name = label_names[label] if label_names else str(label)
            raise ValueError(f"class {name!r} absent from training data")

    W = np.zeros((n_labels, X.shape[1]))
    b = np.zeros(n_labels)
    loss, grad_W, grad_b = softmax_loss_and_grad(W, b, X, y, config.l2)
    step = 1.0
    for _ in range(config.max_iter):
        gnorm_sq = float((grad_W * grad_W).sum() + (grad_b * grad_b).sum())
        if gnorm_sq <= config.tol**2:
            break
        while True:  # Armijo backtracking, c = 0.5
            W_next = W - step * grad_W
            b_next = b - step * grad_b
            loss_next, gW_next, gb_next = softmax_loss_and_grad(
                W_next, b_next, X, y, config.l2
            )
            if loss_next <= loss - 0.5 * step * gnorm_sq or step < 1e-12:
                break
            step *= 0.5
        if loss_next > loss:
            break  # line search stalled at float precision
        W, b, loss, grad_W, grad_b = W_next, b_next, loss_next, gW_next, gb_next
        step = min(step * 2.0, 1e6)
    return SoftmaxClassifier(weights=W, bias=b, config=config)


# -- ranking and cross-validation ------------------------------------------------


def ranks_from_probs(P: np.ndarray, y: np.ndarray) -> np.ndarray:
    """1-based rank of the true label when labels are sorted by descending
    probability; ties break toward the ascending label id."""
    true_p = P[np.arange(len(y)), y]
    greater = (P > true_p[:, None]).sum(axis=1)
    label_ids = np.arange(P.shape[1])
    tied_earlier = ((P == true_p[:, None]) & (label_ids[None, :] < y[:, None])).sum(
        axis=1
    )
    return greater + tied_earlier + 1


def rank_of_correct(
    classifier: SoftmaxClassifier, x: np.ndarray, true_label: int
) -> int:
    probs = classifier.predict_proba(np.asarray(x)[None, :])
    return int(ranks_from_probs(probs, np.array([true_label]))[0])


def stratified_folds(
    y: np.ndarray, k: int, seed: int
) -> list[np.ndarray]:
    """Disjoint folds covering every index, with each class dealt round-robin
    so per-fold class counts differ by at most one."""
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for label in np.unique(y):
        idx = np.flatnonzero(y == label)
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            folds[(pos + offset) % k].append(int(i))
        offset += len(idx)
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


@dataclass
class EvalReport:
    """Cross-validation results: unweighted means over the folds."""

    accuracy: float
    mean_rank: float
    per_fold: list[tuple[float, float]]
    n_folds: int
    oov_terms: int = 0

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "mean_rank": self.mean_rank,
            "n_folds": self.n_folds,
            "oov_terms": self.oov_terms,
            "per_fold": [
                {"accuracy": a, "mean_rank": r} for a, r in self.per_fold
            ],
        }


def cross_validate(
    dataset: HypernymDataset,
    model: EmbeddingModel,
    k: int = 10,
    seed: int = 13,
    config: Optional[ClassifierConfig] = None,
) -> EvalReport:
    """Stratified k-fold evaluation of hypernym classification.

    When some class has fewer than k examples, k is reduced to the smallest
    class size (with a warning) so every training fold still sees every
    class. Fully deterministic given the seed.
    """
    if not dataset.examples:
        raise ValueError("empty dataset")
    if k < 2:
        raise ValueError("need at least 2 folds")
    X, oov = embed_terms(dataset.terms, model)
    y = dataset.labels
    class_sizes = np.bincount(y, minlength=len(dataset.label_set))
    smallest = int(class_sizes.min())
    if smallest < 2:
        tiny = dataset.label_set[int(class_sizes.argmin())]
        raise ValueError(f"class {tiny!r} has {smallest} example(s); need >= 2")
    if smallest < k:
        log.warning(
            "reducing folds from %d to %d (smallest class size)", k, smallest
        )
        k = smallest
    folds = stratified_folds(y, k, seed)
    per_fold: list[tuple[float, float]] = []
    for fold in folds:
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[fold] = False
        classifier = train_classifier(
            X[train_mask],
            y[train_mask],
            len(dataset.label_set),
            config,
            label_names=dataset.label_set,
        )
        probs = classifier.predict_proba(X[fold])
        ranks = ranks_from_probs(probs, y[fold])
        accuracy = float((classifier.predict(X[fold]) == y[fold]).mean())
        per_fold.append((accuracy, float(ranks.mean())))
    return EvalReport(
        accuracy=float(np.mean([a for a, _ in per_fold])),
        mean_rank=float(np.mean([r for _, r in per_fold])),
        per_fold=per_fold,
        n_folds=k,
        oov_terms=oov,
    )
