"""Skip-gram word vectors with negative sampling, trained in numpy.

The objective for a (center, context) pair with k noise words drawn from the
unigram^0.75 distribution is

    -log sigmoid(u_ctx . v_center) - sum_i log sigmoid(-u_noise_i . v_center)

minimized by SGD with a linearly decaying learning rate, per-pair window
shrinking, and frequent-word subsampling. Updates are applied in small
batches of pairs; with a fixed seed and a single worker the run is
bit-reproducible. Query operations use the input vectors only.
"""

from __future__ import annotations

import logging
import re
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, OutOfVocabularyError, TrainingError, VectorFormatError

log = logging.getLogger(__name__)

LR_FLOOR_FACTOR = 1e-4  # lr decays linearly down to initial_lr * this
NOISE_POWER = 0.75


_TOKEN_RE = re.compile(r"[a-z0-9]+(?:[\-.][a-z0-9]+)*|[^\sa-z0-9]")


def tokenize(text: str) -> list[str]:
    """Lowercased tokens split at whitespace and punctuation boundaries.

    Hyphens and decimal points inside words survive ("risk-free", "3.5");
    other punctuation becomes single-character tokens; numbers are kept
    verbatim as their own vocabulary entries.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Vocabulary:
    """Token table sorted by descending frequency with dense ids."""

    tokens: list[str]
    counts: np.ndarray  # int64, aligned with tokens
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        """Ids of the in-vocabulary tokens, out-of-vocabulary ones dropped."""
        return np.array(
            [self.index[t] for t in tokens if t in self.index], dtype=np.int64
        )


class TextCorpus:
    """Re-iterable corpus of token sentences over a text-block source.

    ``texts_fn`` is called on every iteration and must yield text blocks;
    each block is tokenized and chunked into sentences of at most
    ``max_sentence`` tokens. Training makes several passes, so a plain
    generator would not do.
    """

    def __init__(self, texts_fn, max_sentence: int = 1000):
        self._texts_fn = texts_fn
        self._max_sentence = max_sentence

    def __iter__(self):
        for text in self._texts_fn():
            tokens = tokenize(text)
            for lo in range(0, len(tokens), self._max_sentence):
                yield tokens[lo : lo + self._max_sentence]


def build_vocab(
    token_stream: Iterable[str], max_size: int = 100_000, min_count: int = 5
) -> Vocabulary:
    """Most frequent ``max_size`` tokens with frequency >= ``min_count``.

    Ties in frequency break lexicographically so the table is deterministic.
    """
    counts = Counter(token_stream)
    eligible = sorted(
        ((c, t) for t, c in counts.items() if c >= min_count),
        key=lambda pair: (-pair[0], pair[1]),
    )[:max_size]
    tokens = [t for _, t in eligible]
    return Vocabulary(tokens, np.array([c for c, _ in eligible], dtype=np.int64))


@dataclass
class TrainConfig:
    """Skip-gram hyperparameters; the defaults mirror the de-facto standard
    settings of mainstream skip-gram implementations."""

    dim: int = 200
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    subsample_t: float = 1e-3
    min_count: int = 5
    max_vocab: int = 100_000
    seed: int = 1
    workers: int = 1
    deterministic: bool = True
    batch_pairs: int = 512

    def validate(self) -> None:
        if self.window < 1 or self.negatives < 1:
            raise ConfigError("window and negatives must be >= 1")
        if self.initial_lr <= 0:
            raise ConfigError("initial_lr must be positive")
        if self.epochs < 0 or self.dim < 1:
            raise ConfigError("epochs must be >= 0 and dim >= 1")
        if self.deterministic and self.workers > 1:
            raise ConfigError(
                "deterministic mode is single-worker; drop --deterministic "
                "or use workers=1"
            )


@dataclass
class EmbeddingModel:
    """Vocabulary plus input/output vector matrices from skip-gram training.

    Models imported from a vector file carry input vectors only and zero
    frequency counts; they answer queries but cannot resume training.
    """

    vocab: Vocabulary
    input_vectors: np.ndarray
    output_vectors: Optional[np.ndarray] = None
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return int(self.input_vectors.shape[1])

    def vector(self, token: str) -> np.ndarray:
        if token not in self.vocab:
            raise OutOfVocabularyError(token)
        return self.input_vectors[self.vocab.index[token]]


class NoiseSampler:
    """Negative-sample source: unigram counts raised to the 0.75 power."""

    def __init__(self, counts: np.ndarray, power: float = NOISE_POWER):
        if len(counts) == 0:
            raise TrainingError("cannot sample negatives from an empty vocabulary")
        weights = np.asarray(counts, dtype=np.float64) ** power
        self._cumulative = np.cumsum(weights / weights.sum())

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        u = rng.random(shape)
        ids = np.searchsorted(self._cumulative, u, side="right")
        return np.minimum(ids, len(self._cumulative) - 1).astype(np.int64)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def sgns_loss(
    input_vectors: np.ndarray,
    output_vectors: np.ndarray,
    centers: np.ndarray,
    contexts: np.ndarray,
    negatives: np.ndarray,
) -> float:
    """Total (summed) objective over a batch of pairs, without updating."""
    v = input_vectors[centers]
    u = output_vectors[contexts]
    un = output_vectors[negatives]
    pos = np.einsum("bd,bd->b", v, u)
    neg = np.einsum("bkd,bd->bk", un, v)
    return float(-_log_sigmoid(pos).sum() - _log_sigmoid(-neg).sum())


def sgns_step(
    input_vectors: np.ndarray,
    output_vectors: np.ndarray,
    centers: np.ndarray,
    contexts: np.ndarray,
    negatives: np.ndarray,
    lr: float,
) -> float:
    """Apply one SGD step for a batch of (center, context, negatives) pairs.

    Gradients are evaluated at the incoming weights and summed over the
    batch (repeated rows accumulate); updates happen in place. Returns the
    batch loss at the incoming weights.
    """
    v = input_vectors[centers]
    u = output_vectors[contexts]
    un = output_vectors[negatives]
    pos = np.einsum("bd,bd->b", v, u)
    neg = np.einsum("bkd,bd->bk", un, v)
    g_pos = _sigmoid(pos) - 1.0  # d(loss)/d(pos score)
    g_neg = _sigmoid(neg)
    grad_v = g_pos[:, None] * u + np.einsum("bk,bkd->bd", g_neg, un)
    grad_u = g_pos[:, None] * v
    grad_un = g_neg[:, :, None] * v[:, None, :]
    np.add.at(input_vectors, centers, -lr * grad_v)
    np.add.at(output_vectors, contexts, -lr * grad_u)
    np.add.at(
        output_vectors,
        negatives.reshape(-1),
        -lr * grad_un.reshape(-1, grad_un.shape[-1]),
    )
    return float(-_log_sigmoid(pos).sum() - _log_sigmoid(-neg).sum())


def _keep_probabilities(counts: np.ndarray, t: float) -> Optional[np.ndarray]:
    """Per-token keep probability for frequent-word subsampling; None when
    disabled. p = sqrt(t/f) + t/f for corpus frequency fraction f."""
    if t <= 0:
        return None
    total = counts.sum()
    if total == 0:
        return None
    f = counts / total
    with np.errstate(divide="ignore"):
        p = np.sqrt(t / f) + t / f
    return np.minimum(p, 1.0)


def _sentence_pairs(
    ids: np.ndarray, window: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """(centers, contexts) for one sentence with per-center shrunk windows."""
    n = len(ids)
    if n < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    half = rng.integers(1, window + 1, size=n)
    centers: list[int] = []
    contexts: list[int] = []
    for i in range(n):
        lo = max(0, i - int(half[i]))
        hi = min(n, i + int(half[i]) + 1)
        for j in range(lo, hi):
            if j != i:
                centers.append(ids[i])
                contexts.append(ids[j])
    return np.array(centers, dtype=np.int64), np.array(contexts, dtype=np.int64)


class _Progress:
    """Shared position counter driving the linear learning-rate decay."""

    def __init__(self, total: int):
        self.total = max(1, total)
        self.done = 0

    def lr(self, initial: float) -> float:
        return max(
            initial * (1.0 - self.done / self.total), initial * LR_FLOOR_FACTOR
        )


def train(
    corpus: Iterable[Sequence[str]],
    config: TrainConfig,
    vocab: Optional[Vocabulary] = None,
) -> EmbeddingModel:
    """Train skip-gram vectors over a re-iterable corpus of token sentences.

    With ``config.deterministic`` (single worker) the result is a pure
    function of corpus, config and seed, down to the exported file bytes.
    With several workers, threads update the shared matrices lock-free and
    results vary with scheduling.
    """
    config.validate()
    if iter(corpus) is corpus:
        raise TrainingError(
            "corpus must be re-iterable (a list or TextCorpus), not a "
            "one-shot iterator; training makes several passes"
        )
    if vocab is None:
        vocab = build_vocab(
            (t for sentence in corpus for t in sentence),
            config.max_vocab,
            config.min_count,
        )
    if len(vocab) == 0:
        raise TrainingError("empty vocabulary; nothing to train on")

    rng = np.random.default_rng(config.seed)
    n = len(vocab)
    input_vectors = (rng.random((n, config.dim)) - 0.5) / config.dim
    output_vectors = np.zeros((n, config.dim))
    model = EmbeddingModel(vocab, input_vectors, output_vectors)
    if config.epochs == 0:
        return model

    in_vocab_positions = sum(
        sum(1 for t in sentence if t in vocab) for sentence in corpus
    )
    if in_vocab_positions == 0:
        raise TrainingError("corpus has no in-vocabulary tokens")
    progress = _Progress(in_vocab_positions * config.epochs)
    sampler = NoiseSampler(vocab.counts)
    keep = _keep_probabilities(vocab.counts, config.subsample_t)

    def run_shard(worker_id: int, epoch: int, losses: list, errors: list):
        try:
            shard_rng = (
                rng
                if config.workers == 1
                else np.random.default_rng((config.seed, epoch, worker_id))
            )
            loss_sum, pair_count = 0.0, 0
            for s_idx, sentence in enumerate(corpus):
                if s_idx % config.workers != worker_id:
                    continue
                ids = vocab.encode(sentence)
                lr = progress.lr(config.initial_lr)
                progress.done += len(ids)
                if keep is not None and len(ids):
                    ids = ids[shard_rng.random(len(ids)) < keep[ids]]
                centers, contexts = _sentence_pairs(ids, config.window, shard_rng)
                for lo in range(0, len(centers), config.batch_pairs):
                    c = centers[lo : lo + config.batch_pairs]
                    o = contexts[lo : lo + config.batch_pairs]
                    negs = sampler.draw(shard_rng, (len(c), config.negatives))
                    loss = sgns_step(input_vectors, output_vectors, c, o, negs, lr)
                    if not np.isfinite(loss):
                        raise TrainingError(
                            f"non-finite loss at epoch {epoch}, sentence {s_idx}, "
                            f"lr={lr:.6g}, pairs={len(c)}"
                        )
                    loss_sum += loss
                    pair_count += len(c)
            losses.append((loss_sum, pair_count))
        except Exception as exc:  # surfaces worker failures to the caller
            errors.append(exc)

    for epoch in range(config.epochs):
        shard_losses: list = []
        shard_errors: list = []
        if config.workers == 1:
            run_shard(0, epoch, shard_losses, shard_errors)
        else:
            threads = [
                threading.Thread(
                    target=run_shard, args=(w, epoch, shard_losses, shard_errors)
                )
                for w in range(config.workers)
            ]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        if shard_errors:
            raise shard_errors[0]
        total_loss = sum(l for l, _ in shard_losses)
        total_pairs = sum(p for _, p in shard_losses)
        model.epoch_losses.append(total_loss / max(1, total_pairs))
        log.info(
            "epoch %d/%d: %.5f mean pair loss over %d pairs",
            epoch + 1, config.epochs, model.epoch_losses[-1], total_pairs,
        )

    if not np.isfinite(input_vectors).all() or not np.isfinite(output_vectors).all():
        raise TrainingError("non-finite weights after training")
    return model


# -- queries -------------------------------------------------------------------


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return matrix / norms


def _is_inflection_pair(a: str, b: str) -> bool:
    return a == b + "s" or b == a + "s"


def nearest_neighbors(
    model: EmbeddingModel,
    query: str,
    k: int = 5,
    exclude_inflections: bool = False,
) -> list[tuple[str, float]]:
    """Top-k vocabulary tokens by cosine similarity to ``query``.

    The query itself is always excluded; with ``exclude_inflections`` its
    bare singular/plural variants are filtered too. Requests larger than
    the vocabulary clamp to everything available.
    """
    if query not in model.vocab:
        raise OutOfVocabularyError(query)
    unit = _unit_rows(model.input_vectors)
    sims = unit @ unit[model.vocab.index[query]]
    order = np.argsort(-sims, kind="stable")
    results: list[tuple[str, float]] = []
    for idx in order:
        token = model.vocab.tokens[int(idx)]
        if token == query:
            continue
        if exclude_inflections and _is_inflection_pair(token, query):
            continue
        results.append((token, float(sims[idx])))
        if len(results) == k:
            break
    return results


# -- vector file I/O -----------------------------------------------------------


def export_vectors(model: EmbeddingModel, path: Path) -> None:
    """Write input vectors in the standard word-vector text format:
    a "count dim" header, then one "token v1 ... vd" line per token."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{len(model.vocab)} {model.dim}\n")
        for i, token in enumerate(model.vocab.tokens):
            values = " ".join(f"{x:.6f}" for x in model.input_vectors[i])
            fh.write(f"{token} {values}\n")


def import_vectors(path: Path) -> EmbeddingModel:
    """Load a word-vector text file as a query-only model (input vectors)."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise VectorFormatError("header must be 'count dim'", 1)
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise VectorFormatError("header must be two integers", 1) from None
        if count < 0 or dim < 1:
            raise VectorFormatError("count must be >= 0 and dim >= 1", 1)
        tokens: list[str] = []
        seen: set[str] = set()
        vectors = np.zeros((count, dim))
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            row = line_no - 2
            if row >= count:
                raise VectorFormatError(f"more than {count} vector rows", line_no)
            parts = line.split()
            if len(parts) != dim + 1:
                raise VectorFormatError(
                    f"expected 1 token + {dim} values, got {len(parts)} fields",
                    line_no,
                )
            token = parts[0]
            if token in seen:
                raise VectorFormatError(f"duplicate token {token!r}", line_no)
            try:
                vectors[row] = [float(x) for x in parts[1:]]
            except ValueError:
                raise VectorFormatError("non-numeric vector value", line_no) from None
            tokens.append(token)
            seen.add(token)
    if len(tokens) != count:
        raise VectorFormatError(
            f"header promised {count} rows, file has {len(tokens)}",
            len(tokens) + 2,
        )
    vocab = Vocabulary(tokens, np.zeros(len(tokens), dtype=np.int64))
    return EmbeddingModel(vocab, vectors, output_vectors=None)
