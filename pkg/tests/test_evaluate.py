"""Evaluation metrics: edit distance, PAR, ARI and model prediction."""

import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relspace.evaluate import (
    ari,
    levenshtein,
    location_word_par,
    object_word_par,
    par,
    predict_location_word,
    predict_object_word,
    reference_accuracy,
)
from relspace.distributions import DistanceModel
from relspace.geometry import RelativeCoord
from relspace.learner import PointEstimate
from relspace.phonemes import default_inventory
from relspace.simulate import DEFAULT_CONCEPTS


# ----- edit distance -----


def _edit_oracle(a, b):
    """Plain recursive edit distance, independently written."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        same = a[i - 1] == b[j - 1]
        return min(
            go(i - 1, j) + 1,
            go(i, j - 1) + 1,
            go(i - 1, j - 1) + (0 if same else 1),
        )

    return go(len(a), len(b))


seqs = st.lists(st.sampled_from("abc"), max_size=7).map(tuple)


@given(seqs, seqs)
@settings(max_examples=200, deadline=None)
def test_levenshtein_matches_oracle(a, b):
    assert levenshtein(a, b) == _edit_oracle(a, b)


@given(seqs, seqs)
@settings(max_examples=100, deadline=None)
def test_levenshtein_symmetry_and_identity(a, b):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert levenshtein(a, a) == 0


@given(seqs, seqs, seqs)
@settings(max_examples=100, deadline=None)
def test_levenshtein_triangle(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


# ----- phoneme accuracy -----


def test_par_tokenizes_strings():
    # seNpuuki has 8 inventory symbols; one deletion leaves 7
    assert par("seNpuki", "seNpuuki") == pytest.approx(1 - 1 / 8)
    assert par("mae", "mae") == 1.0


def test_par_accepts_token_sequences():
    inv = default_inventory()
    assert par(inv.tokenize("migi"), inv.tokenize("migi")) == 1.0


def test_par_can_go_negative():
    assert par("hidarihidari", "mae") < 0.0


def test_par_rejects_empty_truth():
    with pytest.raises(ValueError):
        par("mae", "")


# ----- adjusted Rand index -----


def _ari_oracle(a, b):
    """Pair-counting definition over all item pairs."""
    n = len(a)
    both = same_a = same_b = 0
    for i in range(n):
        for j in range(i + 1, n):
            in_a = a[i] == a[j]
            in_b = b[i] == b[j]
            both += in_a and in_b
            same_a += in_a
            same_b += in_b
    pairs = n * (n - 1) // 2
    expected = same_a * same_b / pairs
    maximum = (same_a + same_b) / 2
    if maximum == expected:
        return 1.0
    return (both - expected) / (maximum - expected)


labelings = st.lists(st.integers(0, 3), min_size=2, max_size=30)


@given(labelings, labelings)
@settings(max_examples=200, deadline=None)
def test_ari_matches_pair_counting(a, b):
    if len(a) != len(b):
        b = (b * (len(a) // len(b) + 1))[: len(a)]
    assert ari(a, b) == pytest.approx(_ari_oracle(a, b), abs=1e-12)


@given(labelings, st.permutations(range(4)))
@settings(max_examples=100, deadline=None)
def test_ari_invariant_to_relabeling(a, perm):
    b = [x % 2 for x in range(len(a))]
    relabeled = [perm[x] for x in a]
    assert ari(relabeled, b) == pytest.approx(ari(a, b), abs=1e-12)


def test_ari_known_values():
    assert ari([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert ari([0, 1, 2, 3], [0, 1, 2, 3]) == 1.0
    # identical split versus an orthogonal even split
    assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)


def test_ari_random_partitions_center_on_zero():
    rng = np.random.default_rng(7)
    vals = []
    for _ in range(10_000):
        a = rng.integers(0, 4, size=50)
        b = rng.integers(0, 4, size=50)
        vals.append(ari(a.tolist(), b.tolist()))
    assert abs(float(np.mean(vals))) < 0.02


def test_ari_validations():
    with pytest.raises(ValueError):
        ari([0, 1], [0])
    with pytest.raises(ValueError):
        ari([], [])


# ----- prediction -----


def _estimate(vocab_size=6, with_objects=False):
    """Hand-built estimate with four crisp concepts on known words.

    Concept s points at angle s * pi/2 with concentration 14 and emits
    word s with probability one; scene counts are equal so the mixing
    weights are uniform.
    """
    S = 4
    C = np.repeat(np.arange(S), 5)
    phi = np.zeros((S, vocab_size))
    phi[np.arange(S), np.arange(S)] = 1.0
    phi_o = None
    if with_objects:
        phi_o = np.zeros((2, vocab_size))
        phi_o[0, 4] = 1.0
        phi_o[1, 5] = 1.0
    return PointEstimate(
        C=C,
        pi=np.zeros(len(C), dtype=np.int64),
        z=np.zeros(len(C), dtype=np.int64),
        nu=np.array([0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]),
        kappa=np.full(S, 14.0),
        phi=phi,
        mu=1.0,
        lam=25.0,
        psi=np.full(vocab_size, 1.0 / vocab_size),
        log_post=0.0,
        n_matching=1,
        phi_o=phi_o,
    )


VOCAB = (
    ("m", "a", "e"),
    ("u", "sh", "i", "r", "o"),
    ("m", "i", "g", "i"),
    ("h", "i", "d", "a", "r", "i"),
    ("t", "e", "r", "e", "b", "i"),
    ("ts", "u", "k", "u", "e"),
)


def test_predict_location_word_picks_the_aligned_concept():
    est = _estimate()
    assert predict_location_word(est, VOCAB, RelativeCoord(1.0, 0.0), 1.0) \
        == VOCAB[0]
    assert predict_location_word(
        est, VOCAB, RelativeCoord(1.0, math.pi), 1.0
    ) == VOCAB[2]
    assert predict_location_word(
        est, VOCAB, RelativeCoord(1.0, -0.5 * math.pi), 1.0
    ) == VOCAB[3]


def test_predict_location_word_uses_distance():
    # a point far from every concept's preferred ring still resolves
    est = _estimate()
    word = predict_location_word(est, VOCAB, RelativeCoord(3.0, 0.0), 1.0)
    assert word == VOCAB[0]


def test_predict_object_word_reads_categories():
    est = _estimate(with_objects=True)
    assert predict_object_word(est, VOCAB, 0) == VOCAB[4]
    assert predict_object_word(est, VOCAB, 1) == VOCAB[5]


def test_predict_object_word_requires_object_model():
    est = _estimate()
    with pytest.raises(ValueError):
        predict_object_word(est, VOCAB, 0)


def test_reference_accuracy():
    assert reference_accuracy([1, 2, 3], [1, 2, 4]) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        reference_accuracy([1, 2], [1, 2, 3])


def test_location_word_par_crisp_model_scores_high():
    """An estimate aligned with the true concepts scores near-perfect PAR.

    Draws from a 14-concentration von Mises land closer to a neighboring
    concept in a fraction of a percent of cases, so the average over a
    hundred draws is allowed a couple of flips.
    """
    rng = np.random.default_rng(3)
    vocab = tuple(
        default_inventory().tokenize(spec.word) for spec in DEFAULT_CONCEPTS
    )
    est = _estimate(vocab_size=4)
    got = location_word_par(
        est, vocab, DEFAULT_CONCEPTS, DistanceModel(1.0, 25.0), 1.0, rng,
        n_per_concept=25,
    )
    assert got >= 0.95


def test_object_word_par_perfect_and_partial():
    est = _estimate(with_objects=True)
    assert object_word_par(est, VOCAB, ("terebi", "tsukue")) == 1.0
    # one category mapped to a wrong but overlapping word
    est.phi_o[1] = 0.0
    est.phi_o[1, 4] = 1.0  # predicts terebi for the tsukue category
    got = object_word_par(est, VOCAB, ("terebi", "tsukue"))
    expected = 0.5 * (1.0 + par("terebi", "tsukue"))
    assert got == pytest.approx(expected)
