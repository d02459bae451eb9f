"""Phoneme inventory and tokenization for romanized Japanese utterances.

Every utterance in the system is a sequence of symbols drawn from a fixed
inventory: the five vowels, the consonant letters, the moraic nasal ``N``
and the digraphs ``sh``, ``ch``, ``ts``.  The simulator, the segmenter,
the language model and the edit-distance metrics all share this alphabet,
so a "character" everywhere below means one inventory symbol, not one
letter of the romanized spelling.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources


class TokenizeError(ValueError):
    """Raised when a string cannot be parsed with the inventory."""

    def __init__(self, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(
            f"no inventory symbol matches {text!r} at position {position}"
        )


class PhonemeInventory:
    """A fixed symbol alphabet with greedy longest-match tokenization."""

    def __init__(self, symbols):
        symbols = tuple(symbols)
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate symbols in inventory")
        if any(not s or not s.isalpha() for s in symbols):
            raise ValueError("symbols must be non-empty alphabetic strings")
        self.symbols = symbols
        self.index = {s: i for i, s in enumerate(symbols)}
        self._max_len = max(len(s) for s in symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.index

    def __iter__(self):
        return iter(self.symbols)

    def tokenize(self, text: str) -> tuple[str, ...]:
        """Split ``text`` into inventory symbols, longest match first.

        Raises :class:`TokenizeError` if any position cannot be matched,
        so silent symbol drops are impossible.
        """
        out = []
        i = 0
        n = len(text)
        while i < n:
            for width in range(min(self._max_len, n - i), 0, -1):
                candidate = text[i : i + width]
                if candidate in self.index:
                    out.append(candidate)
                    i += width
                    break
            else:
                raise TokenizeError(text, i)
        return tuple(out)

    def detokenize(self, tokens) -> str:
        return "".join(tokens)


@lru_cache(maxsize=1)
def default_inventory() -> PhonemeInventory:
    """The packaged inventory (see ``data/phonemes.txt``)."""
    text = resources.files("relspace.data").joinpath("phonemes.txt").read_text()
    symbols = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    ]
    return PhonemeInventory(symbols)
