"""Class trigram language model over segmented word sequences.

Words the concept learner tagged as location words share one class (and
object words another), every other word type is its own class, so the
model generalizes across sentence frames without smearing the slots.
With no tagged indices every class is a singleton and the model reduces
to a plain word trigram, which is the ablation baseline.

Decoding turns a raw phoneme string back into the most probable word
sequences under the model; unknown stretches fall back to single-symbol
words in a dedicated class scored by the lexical base measure, so every
string has at least one parse.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .segment import WordBase

BOS = "<s>"
EOS = "</s>"
LOC_CLASS = "LOC"
OBJ_CLASS = "OBJ"
FALLBACK_CLASS = "SYL"


@dataclass
class ClassTrigramLM:
    """Word classes, class trigram counts and within-class emissions."""

    word_class: dict
    emit_logp: dict
    trigram: dict
    context_total: dict
    targets: tuple
    delta: float
    base: WordBase
    max_word_len: int

    def transition_logp(self, c1: str, c2: str, c3: str) -> float:
        count = self.trigram.get((c1, c2), {}).get(c3, 0)
        total = self.context_total.get((c1, c2), 0)
        return math.log(
            (count + self.delta) / (total + self.delta * len(self.targets))
        )

    def class_of(self, word) -> str:
        return self.word_class.get(tuple(word), FALLBACK_CLASS)

    def emission_logp(self, word) -> float:
        word = tuple(word)
        if word in self.emit_logp:
            return self.emit_logp[word]
        return self.base.logprob(word)

    def score(self, words) -> float:
        """Log probability of a word sequence, including the end event."""
        c1, c2 = BOS, BOS
        lp = 0.0
        for w in words:
            cls = self.class_of(w)
            lp += self.transition_logp(c1, c2, cls) + self.emission_logp(w)
            c1, c2 = c2, cls
        return lp + self.transition_logp(c1, c2, EOS)

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "max_word_len": self.max_word_len,
            "base": {"n_symbols": self.base.n_symbols, "p_cont": self.base.p_cont},
            "targets": list(self.targets),
            "word_class": {
                " ".join(w): c for w, c in sorted(self.word_class.items())
            },
            "emit_logp": {
                " ".join(w): lp for w, lp in sorted(self.emit_logp.items())
            },
            "trigram": {
                f"{c1}\t{c2}": dict(nxt)
                for (c1, c2), nxt in sorted(self.trigram.items())
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ClassTrigramLM":
        trigram = {}
        context_total = {}
        for key, nxt in obj["trigram"].items():
            c1, c2 = key.split("\t")
            trigram[(c1, c2)] = dict(nxt)
            context_total[(c1, c2)] = sum(nxt.values())
        return cls(
            word_class={
                tuple(k.split(" ")): v for k, v in obj["word_class"].items()
            },
            emit_logp={
                tuple(k.split(" ")): v for k, v in obj["emit_logp"].items()
            },
            trigram=trigram,
            context_total=context_total,
            targets=tuple(obj["targets"]),
            delta=obj["delta"],
            base=WordBase(**obj["base"]),
            max_word_len=obj["max_word_len"],
        )


def build_lm(
    corpus,
    loc_indices=None,
    obj_indices=None,
    *,
    n_symbols: int,
    delta: float = 0.01,
    p_cont: float = 0.6,
    max_word_len: int = 14,
) -> ClassTrigramLM:
    """Estimate the model from a segmented corpus.

    ``loc_indices[n]`` (and optionally ``obj_indices[n]``) mark which
    word of utterance ``n`` fills the location (object) slot.  A word
    type tagged inconsistently across utterances gets its majority tag,
    slot classes winning ties.  Passing no indices yields the plain word
    trigram variant.
    """
    corpus = [[tuple(w) for w in words] for words in corpus]
    votes: dict = defaultdict(Counter)
    for n, words in enumerate(corpus):
        for i, w in enumerate(words):
            if loc_indices is not None and i == loc_indices[n]:
                tag = LOC_CLASS
            elif obj_indices is not None and obj_indices[n] is not None and i == obj_indices[n]:
                tag = OBJ_CLASS
            else:
                tag = "w:" + "".join(w)
            votes[w][tag] += 1

    def rank(item):
        tag, count = item
        special = 2 if tag == LOC_CLASS else 1 if tag == OBJ_CLASS else 0
        return (count, special)

    word_class = {w: max(tags.items(), key=rank)[0] for w, tags in votes.items()}

    emit_counts: dict = defaultdict(Counter)
    trigram: dict = defaultdict(Counter)
    for words in corpus:
        c1, c2 = BOS, BOS
        for w in words:
            cls = word_class[w]
            emit_counts[cls][w] += 1
            trigram[(c1, c2)][cls] += 1
            c1, c2 = c2, cls
        trigram[(c1, c2)][EOS] += 1
    emit_logp = {}
    for cls, counter in emit_counts.items():
        total = sum(counter.values())
        for w, count in counter.items():
            emit_logp[w] = math.log(count / total)
    targets = sorted(emit_counts) + [FALLBACK_CLASS, EOS]
    return ClassTrigramLM(
        word_class=word_class,
        emit_logp=emit_logp,
        trigram={k: dict(v) for k, v in trigram.items()},
        context_total={k: sum(v.values()) for k, v in trigram.items()},
        targets=tuple(targets),
        delta=delta,
        base=WordBase(n_symbols=n_symbols, p_cont=p_cont),
        max_word_len=max_word_len,
    )


def decode(lm: ClassTrigramLM, symbols, n_best: int = 1) -> list:
    """Best segmentations of a phoneme string under the model.

    Exact dynamic program over (position, previous two classes) keeping
    ``n_best`` partial hypotheses per state.  Candidate words are the
    model's known words matching the string, plus a one-symbol fallback
    at every position so parsing never dies.  Returns up to ``n_best``
    distinct word sequences as ``(words, log probability)`` pairs, best
    first.
    """
    symbols = tuple(symbols)
    n = len(symbols)
    if n == 0:
        raise ValueError("cannot decode an empty string")
    if n_best < 1:
        raise ValueError("n_best must be at least 1")
    # states[pos][(c1, c2)] = pruned list of (score, word, parent) entries,
    # parent = (pos, key, index) pointing into an already pruned list
    states: list = [defaultdict(list) for _ in range(n + 1)]
    states[0][(BOS, BOS)] = [(0.0, None, None)]
    for pos in range(n):
        here = states[pos]
        if not here:
            continue
        for key in list(here):
            here[key] = sorted(here[key], key=lambda e: -e[0])[:n_best]
        cands = _candidates(lm, symbols, pos)
        for key, entries in here.items():
            c1, c2 = key
            for word, cls, emit in cands:
                step = lm.transition_logp(c1, c2, cls) + emit
                nxt = states[pos + len(word)][(c2, cls)]
                for idx, (score, _, _) in enumerate(entries):
                    nxt.append((score + step, word, (pos, key, idx)))
    finals = []
    for key, entries in states[n].items():
        entries.sort(key=lambda e: -e[0])
        del entries[n_best:]
        c1, c2 = key
        stop = lm.transition_logp(c1, c2, EOS)
        for idx, (score, _, _) in enumerate(entries):
            finals.append((score + stop, (n, key, idx)))
    finals.sort(key=lambda e: -e[0])
    out = []
    seen = set()
    for score, pointer in finals:
        words = _backtrace(states, pointer)
        key = tuple(words)
        if key in seen:
            continue
        seen.add(key)
        out.append((words, score))
        if len(out) == n_best:
            break
    return out


def _candidates(lm: ClassTrigramLM, symbols, pos: int) -> list:
    n = len(symbols)
    out = []
    for width in range(1, min(lm.max_word_len, n - pos) + 1):
        w = symbols[pos : pos + width]
        cls = lm.word_class.get(w)
        if cls is not None:
            out.append((w, cls, lm.emit_logp[w]))
    w1 = symbols[pos : pos + 1]
    out.append((w1, FALLBACK_CLASS, lm.base.logprob(w1)))
    return out


def _backtrace(states, pointer) -> list:
    words = []
    while pointer is not None:
        pos, key, idx = pointer
        _, word, parent = states[pos][key][idx]
        if word is not None:
            words.append(word)
        pointer = parent
    words.reverse()
    return words


def save_lm(lm: ClassTrigramLM, path) -> None:
    with open(path, "w") as fh:
        json.dump(lm.to_json(), fh, indent=1, sort_keys=True)


def load_lm(path) -> ClassTrigramLM:
    with open(path) as fh:
        return ClassTrigramLM.from_json(json.load(fh))
