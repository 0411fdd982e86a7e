"""Skip-gram training: gradients, sampler, determinism, queries, vector IO."""

from __future__ import annotations

import math

import numpy as np
import pytest

from edgartext.embeddings import (
    EmbeddingModel,
    NoiseSampler,
    TextCorpus,
    TrainConfig,
    Vocabulary,
    build_vocab,
    export_vectors,
    import_vectors,
    nearest_neighbors,
    sgns_loss,
    sgns_step,
    tokenize,
    train,
)
from edgartext.errors import (
    ConfigError,
    OutOfVocabularyError,
    TrainingError,
    VectorFormatError,
)


# -- tokenizer -------------------------------------------------------------------


def test_tokenize_punctuation_splits():
    assert tokenize("Net sales, 2019.") == ["net", "sales", ",", "2019", "."]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_keeps_hyphens_and_decimals():
    assert tokenize("risk-free rate of 3.5%") == ["risk-free", "rate", "of", "3.5", "%"]


# -- vocabulary -------------------------------------------------------------------


def test_build_vocab_frequency_then_lexicographic():
    vocab = build_vocab("a a b c".split(), max_size=2, min_count=1)
    assert vocab.tokens == ["a", "b"]  # freq first, then b beats c alphabetically
    assert vocab.counts.tolist() == [2, 1]


def test_build_vocab_min_count():
    vocab = build_vocab("a a b c".split(), max_size=10, min_count=2)
    assert vocab.tokens == ["a"]


def test_build_vocab_matches_bruteforce_oracle():
    rng = np.random.default_rng(5)
    stream = [f"w{int(i)}" for i in rng.integers(0, 40, size=5000)]
    vocab = build_vocab(stream, max_size=25, min_count=3)

    # oracle: independent dict count plus an explicit sort
    counts: dict[str, int] = {}
    for tok in stream:
        counts[tok] = counts.get(tok, 0) + 1
    expected = sorted(
        (t for t, c in counts.items() if c >= 3), key=lambda t: (-counts[t], t)
    )[:25]
    assert vocab.tokens == expected
    assert [int(c) for c in vocab.counts] == [counts[t] for t in expected]


def test_empty_vocab_refuses_training():
    with pytest.raises(TrainingError):
        train([["rare"]], TrainConfig(dim=4, min_count=5, epochs=1))


# -- noise sampler ------------------------------------------------------------------


def test_noise_sampler_tracks_unigram_power():
    counts = np.array([1000, 700, 450, 300, 220, 150, 90, 50, 20, 5])
    weights = counts.astype(float) ** 0.75
    probs = weights / weights.sum()
    sampler = NoiseSampler(counts)
    rng = np.random.default_rng(99)
    draws = sampler.draw(rng, 1_000_000)
    freq = np.bincount(draws, minlength=10) / 1_000_000
    assert np.abs(freq - probs).max() < 0.01


# -- gradients -----------------------------------------------------------------------


def _random_weights(v=7, d=5, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(0, 0.5, (v, d)), rng.normal(0, 0.5, (v, d))


def test_single_step_matches_closed_form_gradient():
    w_in, w_out = _random_weights()
    center, context, negs = 2, 4, np.array([[1, 5, 6]])
    v = w_in[center].copy()
    u = w_out[context].copy()
    un = w_out[negs[0]].copy()

    # closed-form oracle, written with plain math
    sig = lambda z: 1.0 / (1.0 + math.exp(-z))
    g_pos = sig(float(v @ u)) - 1.0
    g_negs = [sig(float(row @ v)) for row in un]
    grad_v = g_pos * u + sum(g * row for g, row in zip(g_negs, un))
    grad_u = g_pos * v
    grad_negs = [g * v for g in g_negs]

    lr = 0.3
    got_in, got_out = w_in.copy(), w_out.copy()
    sgns_step(got_in, got_out, np.array([center]), np.array([context]), negs, lr)
    assert np.abs(got_in[center] - (v - lr * grad_v)).max() < 1e-10
    assert np.abs(got_out[context] - (u - lr * grad_u)).max() < 1e-10
    for row_idx, grad in zip(negs[0], grad_negs):
        assert np.abs(got_out[row_idx] - (w_out[row_idx] - lr * grad)).max() < 1e-10


@pytest.mark.parametrize("seed", [3, 11, 29])
def test_analytic_gradient_matches_finite_differences(seed):
    w_in, w_out = _random_weights(seed=seed)
    rng = np.random.default_rng(seed + 100)
    centers = rng.integers(0, 7, 2)
    contexts = rng.integers(0, 7, 2)
    negs = rng.integers(0, 7, (2, 2))

    # analytic gradient recovered from a unit-rate step
    stepped_in, stepped_out = w_in.copy(), w_out.copy()
    sgns_step(stepped_in, stepped_out, centers, contexts, negs, lr=1.0)
    grad_in = w_in - stepped_in
    grad_out = w_out - stepped_out

    h = 1e-6
    for grad, matrix in ((grad_in, w_in), (grad_out, w_out)):
        fd = np.zeros_like(matrix)
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                for sign in (+1, -1):
                    bumped_in = w_in.copy()
                    bumped_out = w_out.copy()
                    target = bumped_in if matrix is w_in else bumped_out
                    target[i, j] += sign * h
                    loss = sgns_loss(bumped_in, bumped_out, centers, contexts, negs)
                    fd[i, j] += sign * loss / (2 * h)
        denom = max(np.abs(grad).max(), 1e-12)
        assert np.abs(fd - grad).max() / denom < 1e-4


# -- training -----------------------------------------------------------------------


def toy_corpus(n=200):
    """'alpha' and 'beta' always co-occur; 'gamma' never meets either."""
    group_a = ["credit", "loan", "debt"]
    group_g = ["plane", "wing", "pilot"]
    sentences = []
    for i in range(n):
        if i % 2 == 0:
            sentences.append(["alpha", "beta", group_a[i % 3], group_a[(i + 1) % 3]])
        else:
            sentences.append(["gamma", group_g[i % 3], group_g[(i + 1) % 3]])
    return sentences


def toy_config(**kw) -> TrainConfig:
    base = dict(dim=16, window=2, negatives=5, epochs=10, initial_lr=0.05,
                subsample_t=0.0, min_count=1, seed=1)
    base.update(kw)
    return TrainConfig(**base)


def _cosine(model: EmbeddingModel, a: str, b: str) -> float:
    va, vb = model.vector(a), model.vector(b)
    return float(va @ vb / (np.linalg.norm(va) * np.linalg.norm(vb)))


def test_cooccurrence_beats_nonoccurrence_in_9_of_10_seeds():
    wins = 0
    for seed in range(10):
        model = train(toy_corpus(), toy_config(seed=seed))
        if _cosine(model, "alpha", "beta") > _cosine(model, "alpha", "gamma"):
            wins += 1
    assert wins >= 9


def test_epoch_loss_non_increasing_first_three_epochs():
    model = train(toy_corpus(), toy_config(epochs=3, seed=2))
    losses = model.epoch_losses
    assert len(losses) == 3
    assert losses[1] <= losses[0] * 1.01
    assert losses[2] <= losses[1] * 1.01


def test_zero_epochs_returns_random_initialization():
    config = toy_config(epochs=0, seed=9)
    model = train(toy_corpus(), config)
    assert model.epoch_losses == []
    assert np.all(model.output_vectors == 0.0)
    bound = 0.5 / config.dim
    assert np.all(np.abs(model.input_vectors) <= bound)
    again = train(toy_corpus(), config)
    assert np.array_equal(model.input_vectors, again.input_vectors)


def test_deterministic_mode_reproduces_identical_files(tmp_path):
    config = toy_config(epochs=2, seed=7, deterministic=True)
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    export_vectors(train(toy_corpus(), config), a)
    export_vectors(train(toy_corpus(), config), b)
    assert a.read_bytes() == b.read_bytes()


def test_multiworker_mode_trains_finite_vectors():
    config = toy_config(epochs=2, seed=3, deterministic=False, workers=2)
    model = train(toy_corpus(), config)
    assert np.isfinite(model.input_vectors).all()
    assert len(model.epoch_losses) == 2


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(window=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(negatives=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(initial_lr=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(workers=2, deterministic=True).validate()


def test_corpus_without_vocab_overlap_refused():
    vocab = build_vocab(["x"] * 5, max_size=10, min_count=1)
    with pytest.raises(TrainingError):
        train([["y", "z"]], toy_config(epochs=1), vocab=vocab)


def test_one_shot_iterator_corpus_refused():
    with pytest.raises(TrainingError, match="re-iterable"):
        train(iter(toy_corpus()), toy_config(epochs=1))


def test_text_corpus_is_reiterable_and_chunks():
    corpus = TextCorpus(lambda: iter(["one two three four five six"]), max_sentence=4)
    first = list(corpus)
    second = list(corpus)
    assert first == second == [["one", "two", "three", "four"], ["five", "six"]]


# -- nearest neighbors ----------------------------------------------------------------


def _tiny_model() -> EmbeddingModel:
    tokens = ["market", "markets", "economy", "aircraft"]
    vectors = np.array([
        [1.0, 0.0, 0.0],
        [0.999, 0.01, 0.0],
        [0.7, 0.7, 0.0],
        [0.0, 0.0, 1.0],
    ])
    vocab = Vocabulary(tokens, np.array([4, 3, 2, 1]))
    return EmbeddingModel(vocab, vectors)


def test_neighbors_exclude_query_and_order_by_cosine():
    result = nearest_neighbors(_tiny_model(), "market", k=3)
    assert [t for t, _ in result] == ["markets", "economy", "aircraft"]
    scores = [s for _, s in result]
    assert scores == sorted(scores, reverse=True)
    assert scores[0] > 0.99  # near-duplicate vector scores near self-similarity 1.0
    assert "market" not in [t for t, _ in result]


def test_neighbors_inflection_filter():
    result = nearest_neighbors(_tiny_model(), "market", k=1, exclude_inflections=True)
    assert result[0][0] == "economy"


def test_neighbors_clamp_k():
    result = nearest_neighbors(_tiny_model(), "market", k=99)
    assert len(result) == 3  # |V| - 1


def test_neighbors_oov_query_explicit_error():
    with pytest.raises(OutOfVocabularyError):
        nearest_neighbors(_tiny_model(), "blockchain", k=2)


# -- vector file IO ---------------------------------------------------------------------


def test_export_import_roundtrip(tmp_path):
    model = EmbeddingModel(
        Vocabulary(["a", "b"], np.array([2, 1])),
        np.array([[0.1, -0.2, 0.333333], [1.5, 2.0, -3.25]]),
    )
    path = tmp_path / "vec.txt"
    export_vectors(model, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "2 3"
    assert len(lines) == 3
    back = import_vectors(path)
    assert back.vocab.tokens == ["a", "b"]
    expected = np.array(
        [[float(f"{x:.6f}") for x in row] for row in model.input_vectors]
    )
    assert np.array_equal(back.input_vectors, expected)
    assert back.output_vectors is None


def test_import_errors_carry_line_numbers(tmp_path):
    bad_header = tmp_path / "h.txt"
    bad_header.write_text("not a header\n")
    with pytest.raises(VectorFormatError) as err:
        import_vectors(bad_header)
    assert err.value.line_number == 1

    wrong_width = tmp_path / "w.txt"
    wrong_width.write_text("2 3\na 1 2 3\nb 1 2 3 4\n")
    with pytest.raises(VectorFormatError) as err:
        import_vectors(wrong_width)
    assert err.value.line_number == 3

    short_file = tmp_path / "s.txt"
    short_file.write_text("3 2\na 1 2\nb 3 4\n")
    with pytest.raises(VectorFormatError) as err:
        import_vectors(short_file)
    assert err.value.line_number == 4


def test_third_party_vector_file_loads_and_queries(fixtures_dir):
    model = import_vectors(fixtures_dir / "vectors_external.txt")
    assert len(model.vocab) == 4
    result = nearest_neighbors(model, "economy", k=2)
    assert len(result) == 2
    assert result[0][1] >= result[1][1]
    assert {t for t, _ in result} <= {"downturn", "recession", "aircraft"}
