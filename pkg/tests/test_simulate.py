"""Scene generation, utterance rendering and the phoneme channel."""

import math

import numpy as np
import pytest

from relspace.evaluate import levenshtein
from relspace.geometry import frame_for, to_relative
from relspace.phonemes import default_inventory
from relspace.simulate import (
    ChannelConfig,
    DEFAULT_CONCEPTS,
    DEFAULT_OBJECT_WORDS,
    Scene,
    channel,
    generate_scenes,
    load_scenes,
    render_utterance,
    save_scenes,
    simulate_dataset,
)

INV = default_inventory()

# letters that can never merge into a digraph, see the channel tests
SAFE = ("a", "e", "i", "o", "u", "m", "k", "r", "n", "g")


def test_generate_scenes_structure():
    rng = np.random.default_rng(0)
    scenes = generate_scenes(5, 4, rng)
    assert len(scenes) == 5 * len(DEFAULT_CONCEPTS)
    for i, s in enumerate(scenes):
        assert s.concept == i % len(DEFAULT_CONCEPTS)
        assert 0 <= s.reference < 4
        assert len(s.objects) == 4 and len(s.categories) == 4
        assert all(0 <= k < len(DEFAULT_OBJECT_WORDS) for k in s.categories)


def test_generated_geometry_matches_concepts():
    rng = np.random.default_rng(1)
    scenes = generate_scenes(120, 3, rng)
    for k, spec in enumerate(DEFAULT_CONCEPTS):
        rels = []
        for s in scenes:
            if s.concept != k:
                continue
            frame = frame_for(s.objects[s.reference], s.robot)
            rels.append(to_relative(s.trainer, frame))
        thetas = np.array([r.theta for r in rels])
        ls = np.array([r.l for r in rels])
        mean_dir = math.atan2(np.sin(thetas).sum(), np.cos(thetas).sum())
        gap = (mean_dir - spec.mean_angle + math.pi) % (2 * math.pi) - math.pi
        assert abs(gap) < 0.1  # 120 draws at concentration 14
        assert abs(ls.mean() - 1.0) < 0.08


def test_render_utterance_slots():
    rng = np.random.default_rng(2)
    scenes = generate_scenes(6, 3, rng)
    for s in scenes:
        render_utterance(s, rng)
        assert s.words[s.loc_index] == DEFAULT_CONCEPTS[s.concept].word
        assert s.obj_index is None
    for s in scenes:
        render_utterance(s, rng, object_words=DEFAULT_OBJECT_WORDS)
        assert s.words[s.loc_index] == DEFAULT_CONCEPTS[s.concept].word
        obj_word = DEFAULT_OBJECT_WORDS[s.categories[s.reference]]
        assert s.words[s.obj_index] == obj_word
        # the object word names the reference, two words before the
        # location word: <object> <no|yori> <location>
        assert s.obj_index == s.loc_index - 2
        assert s.words[s.loc_index - 1] in ("no", "yori")


def test_channel_noiseless_is_identity():
    rng = np.random.default_rng(3)
    cfg = ChannelConfig(p_sub=0.0, p_ins=0.0, p_del=0.0)
    out = channel(("kokowa", "mae", "dane"), cfg, rng)
    assert out == INV.tokenize("kokowamaedane")


def test_channel_validation():
    with pytest.raises(ValueError):
        ChannelConfig(p_sub=-0.1)
    with pytest.raises(ValueError):
        ChannelConfig(p_sub=0.7, p_del=0.4)
    with pytest.raises(ValueError):
        channel((), ChannelConfig(), np.random.default_rng(0))


def _safe_string(rng, n):
    return "".join(rng.choice(SAFE, size=n))


def test_channel_deletion_rate():
    # with merge-proof letters the output length is a clean binomial
    rng = np.random.default_rng(4)
    n = 40000
    word = _safe_string(rng, n)
    out = channel((word,), ChannelConfig(0.0, 0.0, 0.12), rng)
    kept = len(out) / n
    assert abs(kept - 0.88) < 0.006  # ~3.7 binomial sigmas


def test_channel_insertion_rate():
    rng = np.random.default_rng(5)
    n = 40000
    word = _safe_string(rng, n)
    out = channel((word,), ChannelConfig(0.0, 0.07, 0.0), rng)
    # inserted symbols may merge with a neighbour into a digraph, which
    # only shrinks the count, and at most once per insertion
    grown = (len(out) - n) / n
    assert 0.05 < grown < 0.08


def test_channel_substitution_rate():
    rng = np.random.default_rng(6)
    n = 20000
    word = _safe_string(rng, n)
    out = channel((word,), ChannelConfig(0.09, 0.0, 0.0), rng)
    # substitutions never match the original, so the edit rate tracks
    # p_sub; rare digraph merges perturb it by O(p_sub^2)
    chunk = 500
    dist = sum(
        levenshtein(INV.tokenize(word)[i : i + chunk], out[i : i + chunk])
        for i in range(0, n, chunk)
    )
    assert abs(dist / n - 0.09) < 0.012


def test_channel_output_is_canonical():
    rng = np.random.default_rng(7)
    out = channel(("tsukuenomae",), ChannelConfig(0.2, 0.1, 0.1), rng)
    assert out == INV.tokenize(INV.detokenize(out))


def test_dataset_deterministic_and_serializable(tmp_path):
    a = simulate_dataset(3, 4, seed=42, object_words=DEFAULT_OBJECT_WORDS)
    b = simulate_dataset(3, 4, seed=42, object_words=DEFAULT_OBJECT_WORDS)
    assert a == b
    c = simulate_dataset(3, 4, seed=43, object_words=DEFAULT_OBJECT_WORDS)
    assert a != c
    path = tmp_path / "scenes.json"
    save_scenes(path, a)
    loaded = load_scenes(path)
    assert loaded == a
    save_scenes(path, a)
    again = (path).read_bytes()
    save_scenes(path, loaded)
    assert (path).read_bytes() == again


def test_dataset_phonemes_are_tokenized():
    scenes = simulate_dataset(2, 3, seed=9)
    for s in scenes:
        assert len(s.phonemes) >= 1
        assert all(t in INV for t in s.phonemes)
        assert s.words[s.loc_index] == DEFAULT_CONCEPTS[s.concept].word
