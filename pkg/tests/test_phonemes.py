"""Symbol inventory and greedy tokenization."""

import pytest
from hypothesis import given, strategies as st

from relspace.phonemes import PhonemeInventory, TokenizeError, default_inventory

INV = default_inventory()


def test_inventory_is_nonempty_and_unique():
    assert len(INV) == 25
    assert len(set(INV.symbols)) == len(INV.symbols)
    for digraph in ("sh", "ch", "ts"):
        assert digraph in INV


def test_tokenize_known_words():
    assert INV.tokenize("mae") == ("m", "a", "e")
    assert INV.tokenize("ushiro") == ("u", "sh", "i", "r", "o")
    assert INV.tokenize("hidari") == ("h", "i", "d", "a", "r", "i")
    assert INV.tokenize("seNpuuki") == ("s", "e", "N", "p", "u", "u", "k", "i")


def test_tokenize_longest_match():
    # digraphs must win over their letter-by-letter splits
    assert INV.tokenize("shi") == ("sh", "i")
    assert INV.tokenize("tsukue") == ("ts", "u", "k", "u", "e")
    assert INV.tokenize("chairo") == ("ch", "a", "i", "r", "o")


def test_detokenize_inverts_tokenize():
    for text in ("mae", "ushiro", "gomibako", "terebi", "seNpuuki"):
        assert INV.detokenize(INV.tokenize(text)) == text
    assert INV.tokenize("") == ()


def test_tokenize_rejects_foreign_characters():
    with pytest.raises(TokenizeError) as err:
        INV.tokenize("mig!i")
    assert err.value.position == 3
    with pytest.raises(ValueError):
        PhonemeInventory(["a", "a"])


@given(st.lists(st.sampled_from(sorted(INV.symbols)), min_size=1, max_size=12))
def test_token_stream_survives_round_trip(tokens):
    # any symbol sequence, respelled as text, re-tokenizes into symbols
    # spelling the same string (greedy parses may merge boundaries)
    text = INV.detokenize(tokens)
    back = INV.tokenize(text)
    assert "".join(back) == text
