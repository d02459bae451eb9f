"""Evaluation: clustering agreement, phoneme accuracy and prediction.

Prediction inverts the learned model: given a test position relative to
a reference object, mix the concepts by how often they were used and how
well they explain the position, and read off the most probable word.
"""

from __future__ import annotations

import math
from math import comb

import numpy as np

from .distributions import VonMises, vm_logpdf_arr, vm_sample
from .geometry import RelativeCoord
from .learner import PointEstimate
from .phonemes import default_inventory


def levenshtein(a, b) -> int:
    """Edit distance between two sequences."""
    a, b = tuple(a), tuple(b)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        for j, y in enumerate(b, start=1):
            cur.append(
                min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
            )
        prev = cur
    return prev[-1]


def par(estimated, correct, inventory=None) -> float:
    """Phoneme accuracy of ``estimated`` against ``correct``.

    One minus the edit distance normalized by the correct length, at
    inventory-symbol granularity; strings are tokenized first.  Can go
    negative when the estimate is much longer than the truth.
    """
    if inventory is None:
        inventory = default_inventory()
    if isinstance(estimated, str):
        estimated = inventory.tokenize(estimated)
    if isinstance(correct, str):
        correct = inventory.tokenize(correct)
    if len(correct) == 0:
        raise ValueError("correct word must be non-empty")
    return 1.0 - levenshtein(estimated, correct) / len(correct)


def ari(labels_a, labels_b) -> float:
    """Adjusted Rand index between two partitions of the same items."""
    labels_a = list(labels_a)
    labels_b = list(labels_b)
    if len(labels_a) != len(labels_b):
        raise ValueError("partitions must cover the same items")
    n = len(labels_a)
    if n == 0:
        raise ValueError("empty partitions")
    cells: dict = {}
    rows: dict = {}
    cols: dict = {}
    for x, y in zip(labels_a, labels_b):
        cells[(x, y)] = cells.get((x, y), 0) + 1
        rows[x] = rows.get(x, 0) + 1
        cols[y] = cols.get(y, 0) + 1
    index = sum(comb(c, 2) for c in cells.values())
    sum_rows = sum(comb(c, 2) for c in rows.values())
    sum_cols = sum(comb(c, 2) for c in cols.values())
    expected = sum_rows * sum_cols / comb(n, 2)
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:  # both partitions trivial: identical by definition
        return 1.0
    return (index - expected) / (maximum - expected)


def predict_location_word(est: PointEstimate, vocab, rel: RelativeCoord,
                          alpha: float) -> tuple:
    """Most probable word for a position in a reference object's frame.

    Concepts are weighted by their seating fractions (with the restaurant
    concentration in the denominator) times their likelihood of the
    position; ties resolve to the lowest vocabulary index.
    """
    weights = est.concept_weights(alpha)
    loglik = (
        vm_logpdf_arr(rel.theta, est.nu, est.kappa)
        + 0.5 * (math.log(est.lam) - math.log(2.0 * math.pi))
        - 0.5 * est.lam * (rel.l - est.mu) ** 2
    )
    hi = float(loglik.max())
    if hi == -math.inf:
        return vocab[0]
    scores = (weights * np.exp(loglik - hi)) @ est.phi
    return vocab[int(np.argmax(scores))]


def predict_object_word(est: PointEstimate, vocab, category: int) -> tuple:
    """Most probable word for a recognized object category."""
    if est.phi_o is None:
        raise ValueError("estimate has no object word distributions")
    return vocab[int(np.argmax(est.phi_o[category]))]


def reference_accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("prediction and truth must align")
    return float(np.mean(predicted == truth))


def location_word_par(
    est: PointEstimate,
    vocab,
    concepts,
    distance,
    alpha: float,
    rng: np.random.Generator,
    n_per_concept: int = 25,
    inventory=None,
) -> float:
    """Average phoneme accuracy of predicted location words.

    Draws test positions from each true concept's distribution, predicts
    the word at each and scores it against the concept's true word.
    """
    if inventory is None:
        inventory = default_inventory()
    scores = []
    for spec in concepts:
        truth = inventory.tokenize(spec.word)
        vm = VonMises(spec.mean_angle, spec.concentration)
        for _ in range(n_per_concept):
            l = distance.sample(rng)
            while l <= 0.0:
                l = distance.sample(rng)
            theta = float(vm_sample(vm, rng))
            word = predict_location_word(
                est, vocab, RelativeCoord(l, theta), alpha
            )
            scores.append(par(word, truth, inventory))
    return float(np.mean(scores))


def object_word_par(est: PointEstimate, vocab, object_words,
                    inventory=None) -> float:
    """Average phoneme accuracy of predicted object words per category."""
    if inventory is None:
        inventory = default_inventory()
    scores = []
    for k, truth in enumerate(object_words):
        word = predict_object_word(est, vocab, k)
        scores.append(par(word, inventory.tokenize(truth), inventory))
    return float(np.mean(scores))
