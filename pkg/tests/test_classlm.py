"""Class trigram language model: tagging, scoring, decoding, round trip."""

import json
import math
from itertools import product

import pytest

from relspace.classlm import (
    BOS,
    EOS,
    FALLBACK_CLASS,
    LOC_CLASS,
    OBJ_CLASS,
    ClassTrigramLM,
    build_lm,
    decode,
    load_lm,
    save_lm,
)
from relspace.segment import WordBase

V = 25  # inventory size used throughout


def _corpus():
    # two sentence frames, location word in the last slot
    return [
        [("k", "o"), ("m", "a", "e")],
        [("k", "o"), ("m", "i", "g", "i")],
        [("s", "o"), ("m", "a", "e")],
    ]


def _loc_lm(delta=0.01):
    corpus = _corpus()
    return build_lm(corpus, [1, 1, 1], n_symbols=V, delta=delta)


def test_majority_tagging_prefers_slot_class():
    # ("m","a","e") is tagged LOC twice and ordinary once: majority wins
    corpus = _corpus() + [[("m", "a", "e"), ("d", "a")]]
    lm = build_lm(corpus, [1, 1, 1, 1], n_symbols=V)
    assert lm.word_class[("m", "a", "e")] == LOC_CLASS
    assert lm.word_class[("k", "o")] == "w:ko"


def test_slot_class_wins_ties():
    # one LOC tag, one ordinary tag: the slot class takes the tie
    corpus = [
        [("m", "a", "e"), ("d", "a")],
        [("m", "a", "e"), ("d", "a")],
    ]
    lm = build_lm(corpus, [0, 1], n_symbols=V)
    assert lm.word_class[("m", "a", "e")] == LOC_CLASS


def test_object_slot_tagging():
    corpus = [
        [("t", "e"), ("n", "o"), ("m", "a", "e")],
        [("t", "e"), ("n", "o"), ("m", "i", "g", "i")],
    ]
    lm = build_lm(corpus, [2, 2], [0, 0], n_symbols=V)
    assert lm.word_class[("t", "e")] == OBJ_CLASS
    assert lm.word_class[("m", "a", "e")] == LOC_CLASS
    assert lm.word_class[("n", "o")] == "w:no"


def test_no_indices_gives_singleton_classes():
    lm = build_lm(_corpus(), n_symbols=V)
    classes = set(lm.word_class.values())
    assert classes == {"w:ko", "w:mae", "w:migi", "w:so"}


def test_context_normalization():
    """Transition probabilities sum to one over targets from any context.

    Smoothed estimator: (count + delta) / (total + delta * |targets|)
    summed over the fixed target list telescopes to 1 whenever every
    observed continuation is inside the target list.
    """
    lm = _loc_lm()
    contexts = set(lm.trigram) | {
        (BOS, BOS),
        (BOS, LOC_CLASS),
        ("w:ko", LOC_CLASS),
        (FALLBACK_CLASS, FALLBACK_CLASS),  # never seen
    }
    for c1, c2 in contexts:
        total = sum(
            math.exp(lm.transition_logp(c1, c2, t)) for t in lm.targets
        )
        assert abs(total - 1.0) < 1e-12, (c1, c2)


def test_observed_continuations_are_targets():
    lm = _loc_lm()
    for nxt in lm.trigram.values():
        for cls in nxt:
            assert cls in lm.targets


def test_score_by_hand():
    """Full-corpus sentence scored against hand-computed counts.

    With delta and the three-sentence corpus above, the sentence
    [ko, mae] factorizes as transitions (BOS,BOS)->w:ko,
    (BOS,w:ko)->LOC, (w:ko,LOC)->EOS times emissions ko|w:ko and
    mae|LOC.
    """
    delta = 0.01
    lm = _loc_lm(delta)
    t = len(lm.targets)
    expected = (
        math.log((2 + delta) / (3 + delta * t))  # BOS BOS -> w:ko
        + math.log(1.0)  # ko emitted by its singleton class
        + math.log((2 + delta) / (2 + delta * t))  # BOS w:ko -> LOC
        + math.log(2 / 3)  # mae | LOC
        + math.log((2 + delta) / (2 + delta * t))  # w:ko LOC -> EOS
    )
    got = lm.score([("k", "o"), ("m", "a", "e")])
    assert got == pytest.approx(expected, abs=1e-12)


def test_unknown_word_scored_by_base():
    lm = _loc_lm()
    base = WordBase(n_symbols=V, p_cont=lm.base.p_cont)
    assert lm.emission_logp(("z", "z")) == pytest.approx(
        base.logprob(("z", "z"))
    )


def _enumerate_segmentations(symbols):
    n = len(symbols)
    for mask in range(1 << max(n - 1, 0)):
        words = []
        start = 0
        for i in range(n - 1):
            if mask >> i & 1:
                words.append(tuple(symbols[start : i + 1]))
                start = i + 1
        words.append(tuple(symbols[start:]))
        yield words


def test_decode_matches_enumeration():
    """The DP finds the argmax over all segmentations of the string."""
    lm = _loc_lm()
    for joined in (("k", "o", "m", "a", "e"), ("m", "a", "e"), ("k", "o")):
        best_words, best_lp = max(
            ((w, lm.score(w)) for w in _enumerate_segmentations(joined)),
            key=lambda e: e[1],
        )
        got = decode(lm, joined, 1)
        assert len(got) == 1
        words, lp = got[0]
        assert [tuple(w) for w in words] == [tuple(w) for w in best_words]
        assert lp == pytest.approx(best_lp, abs=1e-9)


def test_decode_n_best_ordering_and_distinctness():
    # compare against the segmentations the decoder's lattice can
    # represent: known words plus one-symbol fallbacks
    lm = _loc_lm()
    joined = ("k", "o", "m", "a", "e")

    def representable(words):
        return all(tuple(w) in lm.word_class or len(w) == 1 for w in words)

    scored = sorted(
        (
            (lm.score(w), w)
            for w in _enumerate_segmentations(joined)
            if representable(w)
        ),
        key=lambda e: -e[0],
    )
    got = decode(lm, joined, 4)
    assert len(got) == 4
    seen = set()
    for (words, lp), (want_lp, want_words) in zip(got, scored):
        assert [tuple(w) for w in words] == [tuple(w) for w in want_words]
        assert lp == pytest.approx(want_lp, abs=1e-9)
        key = tuple(tuple(w) for w in words)
        assert key not in seen
        seen.add(key)


def test_decode_concatenation_invariant():
    # every returned segmentation spells the input string
    lm = _loc_lm()
    joined = ("s", "o", "m", "i", "g", "i")
    for words, _ in decode(lm, joined, 5):
        flat = tuple(sym for w in words for sym in w)
        assert flat == joined


def test_decode_unseen_string_uses_fallback():
    lm = _loc_lm()
    words, lp = decode(lm, ("z", "u", "b"), 1)[0]
    assert all(len(w) == 1 for w in words)
    assert math.isfinite(lp)


def test_decode_validations():
    lm = _loc_lm()
    with pytest.raises(ValueError):
        decode(lm, (), 1)
    with pytest.raises(ValueError):
        decode(lm, ("k",), 0)


def test_singleton_class_variant_is_word_trigram():
    """With singleton classes, class transitions are word transitions."""
    corpus = [
        [("a",), ("b",)],
        [("a",), ("c",)],
        [("a",), ("b",)],
    ]
    lm = build_lm(corpus, n_symbols=V, delta=0.5)
    t = len(lm.targets)
    # p(b | BOS a) with word counts: a->b twice, a->c once
    want = math.log((2 + 0.5) / (3 + 0.5 * t))
    assert lm.transition_logp(BOS, "w:a", "w:b") == pytest.approx(want)
    # emissions are deterministic for singleton classes
    assert lm.emission_logp(("b",)) == pytest.approx(0.0)


def test_json_round_trip(tmp_path):
    lm = build_lm(
        _corpus() + [[("t", "e"), ("n", "o"), ("m", "a", "e")]],
        [1, 1, 1, 2],
        [None, None, None, 0],
        n_symbols=V,
    )
    path = tmp_path / "lm.json"
    save_lm(lm, path)
    clone = load_lm(path)
    assert clone.word_class == lm.word_class
    assert clone.targets == lm.targets
    assert clone.trigram == lm.trigram
    assert clone.context_total == lm.context_total
    assert clone.emit_logp == pytest.approx(lm.emit_logp)
    assert clone.delta == lm.delta
    assert clone.max_word_len == lm.max_word_len
    assert (clone.base.n_symbols, clone.base.p_cont) == (
        lm.base.n_symbols,
        lm.base.p_cont,
    )
    # behavioural equality on a probe sentence
    probe = [("k", "o"), ("m", "a", "e"), ("z", "z")]
    assert clone.score(probe) == pytest.approx(lm.score(probe))
    # the serialized form is stable json
    again = tmp_path / "lm2.json"
    save_lm(clone, again)
    assert path.read_text() == again.read_text()


def test_score_decomposes_over_steps():
    lm = _loc_lm()
    words = [("k", "o"), ("m", "a", "e")]
    by_hand = (
        lm.transition_logp(BOS, BOS, "w:ko")
        + lm.emission_logp(("k", "o"))
        + lm.transition_logp(BOS, "w:ko", LOC_CLASS)
        + lm.emission_logp(("m", "a", "e"))
        + lm.transition_logp("w:ko", LOC_CLASS, EOS)
    )
    assert lm.score(words) == pytest.approx(by_hand, abs=1e-12)
