"""Unsupervised word segmentation of phoneme strings.

A unigram Pitman-Yor process over a latent lexicon, sampled with blocked
Gibbs: one utterance at a time is removed from the model, re-segmented by
forward filtering / backward sampling, and seated again.  The same chain
also yields the multiple segmentation candidates handed to the concept
learner; snapshots taken along the chain are correlated but diverse
enough to rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# A "word" is a tuple of inventory symbols throughout this module.
Word = tuple

SCORE_SEED = 12345  # internal stream for deterministic re-seating scores


@dataclass(frozen=True)
class WordBase:
    """Base measure over words: uniform symbols, geometric length.

    ``logprob`` is proper over words of length >= 1 when summed over the
    whole alphabet, which keeps lexicon comparisons calibrated.
    """

    n_symbols: int
    p_cont: float = 0.6

    def __post_init__(self):
        if self.n_symbols < 1:
            raise ValueError("alphabet must be non-empty")
        if not 0.0 < self.p_cont < 1.0:
            raise ValueError("p_cont must be in (0, 1)")

    def logprob(self, word: Word) -> float:
        n = len(word)
        if n < 1:
            raise ValueError("words must have at least one symbol")
        return (
            -n * math.log(self.n_symbols)
            + (n - 1) * math.log(self.p_cont)
            + math.log(1.0 - self.p_cont)
        )


class PitmanYorLexicon:
    """Pitman-Yor restaurant over word types with explicit tables.

    ``tables`` maps each word to the list of its table sizes.  Seating
    and removal follow the usual exchangeable scheme, so removal picks a
    table proportionally to its size.
    """

    def __init__(self, base: WordBase, d: float = 0.5, strength: float = 1.0):
        if not 0.0 <= d < 1.0:
            raise ValueError("discount must be in [0, 1)")
        if strength <= -d:
            raise ValueError("strength must exceed -discount")
        self.base = base
        self.d = d
        self.strength = strength
        self.tables: dict[Word, list] = {}
        self.n_customers = 0
        self.n_tables = 0

    def count(self, word: Word) -> int:
        return sum(self.tables.get(word, ()))

    def log_predictive(self, word: Word) -> float:
        """Log probability of ``word`` under the current restaurant."""
        log_new = (
            math.log(self.strength + self.d * self.n_tables)
            + self.base.logprob(word)
        )
        seated = self.tables.get(word)
        if seated:
            reuse = sum(seated) - self.d * len(seated)
            val = np.logaddexp(math.log(reuse), log_new)
        else:
            val = log_new
        return float(val - math.log(self.strength + self.n_customers))

    def add(self, word: Word, rng: np.random.Generator) -> None:
        """Seat one customer for ``word``, opening a table if sampled."""
        seated = self.tables.setdefault(word, [])
        new_w = (self.strength + self.d * self.n_tables) * math.exp(
            self.base.logprob(word)
        )
        weights = [c - self.d for c in seated] + [new_w]
        idx = _pick(weights, rng)
        if idx == len(seated):
            seated.append(1)
            self.n_tables += 1
        else:
            seated[idx] += 1
        self.n_customers += 1

    def remove(self, word: Word, rng: np.random.Generator) -> None:
        """Unseat one customer of ``word`` from a size-weighted table."""
        seated = self.tables.get(word)
        if not seated:
            raise KeyError(f"no customers for {word!r}")
        idx = _pick(seated, rng)
        seated[idx] -= 1
        if seated[idx] == 0:
            del seated[idx]
            self.n_tables -= 1
            if not seated:
                del self.tables[word]
        self.n_customers -= 1


def ffbs_segment(
    symbols,
    lexicon: PitmanYorLexicon,
    rng: np.random.Generator,
    max_word_len: int = 14,
    temperature: float = 1.0,
) -> list:
    """Sample one segmentation of ``symbols`` by forward filtering.

    Word probabilities are frozen at their current predictive values for
    the whole pass; the draw is exact for that frozen model.  A
    ``temperature`` above 1 flattens the word probabilities, which is
    used to anneal early sweeps of the blocked Gibbs chain out of
    locally sticky segmentations.
    """
    symbols = tuple(symbols)
    n = len(symbols)
    if n == 0:
        return []
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    # span_lp[i][k-1] = log predictive of the word covering [i-k, i)
    span_lp = [
        [
            lexicon.log_predictive(symbols[i - k : i]) / temperature
            for k in range(1, min(max_word_len, i) + 1)
        ]
        for i in range(n + 1)
    ]
    log_alpha = np.full(n + 1, -np.inf)
    log_alpha[0] = 0.0
    for i in range(1, n + 1):
        terms = [
            log_alpha[i - k] + span_lp[i][k - 1]
            for k in range(1, min(max_word_len, i) + 1)
        ]
        log_alpha[i] = _logsumexp(terms)
    words = []
    i = n
    while i > 0:
        ks = range(1, min(max_word_len, i) + 1)
        logw = np.array([log_alpha[i - k] + span_lp[i][k - 1] for k in ks])
        k = 1 + _pick(np.exp(logw - logw.max()), rng)
        words.append(symbols[i - k : i])
        i -= k
    words.reverse()
    return words


def _logsumexp(terms) -> float:
    arr = np.asarray(terms, dtype=float)
    hi = arr.max()
    if hi == -np.inf:
        return -np.inf
    return float(hi + np.log(np.exp(arr - hi).sum()))


def _pick(weights, rng: np.random.Generator) -> int:
    """Index drawn proportionally to non-negative ``weights``."""
    total = float(sum(weights))
    if total <= 0.0:
        return len(weights) - 1  # all underflowed: only the last can apply
    r = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += float(w)
        if r < acc:
            return i
    return len(weights) - 1


@dataclass
class CorpusList:
    """One candidate segmentation of the whole corpus."""

    utterances: list
    score: float


class SegmentationSampler:
    """Blocked Gibbs chain over the segmentations of a corpus.

    ``evidence`` words are seated once at construction and never removed;
    they bias the lexicon towards words an external model already
    believes in without being re-segmented themselves.
    """

    def __init__(
        self,
        corpus,
        rng: np.random.Generator,
        base: WordBase,
        d: float = 0.5,
        strength: float = 1.0,
        max_word_len: int = 14,
        init=None,
        evidence=None,
    ):
        self.corpus = [tuple(u) for u in corpus]
        if any(len(u) == 0 for u in self.corpus):
            raise ValueError("utterances must be non-empty")
        self.rng = rng
        self.max_word_len = max_word_len
        self.lexicon = PitmanYorLexicon(base, d=d, strength=strength)
        self.evidence = [tuple(w) for w in (evidence or [])]
        for w in self.evidence:
            self.lexicon.add(w, rng)
        self.segmentations = []
        if init is not None:
            if len(init) != len(self.corpus):
                raise ValueError("init must cover the whole corpus")
            for utt, words in zip(self.corpus, init):
                words = [tuple(w) for w in words]
                if tuple(s for w in words for s in w) != utt:
                    raise ValueError("init segmentation does not spell the utterance")
                for w in words:
                    self.lexicon.add(w, rng)
                self.segmentations.append(words)
        else:
            for utt in self.corpus:
                words = ffbs_segment(utt, self.lexicon, rng, max_word_len)
                for w in words:
                    self.lexicon.add(w, rng)
                self.segmentations.append(words)

    def sweep(self, temperature: float = 1.0) -> None:
        """Re-segment every utterance once, in random order."""
        for n in self.rng.permutation(len(self.corpus)):
            for w in self.segmentations[n]:
                self.lexicon.remove(w, self.rng)
            words = ffbs_segment(
                self.corpus[n],
                self.lexicon,
                self.rng,
                self.max_word_len,
                temperature=temperature,
            )
            for w in words:
                self.lexicon.add(w, self.rng)
            self.segmentations[n] = words

    def snapshot(self) -> CorpusList:
        return CorpusList(
            utterances=[list(words) for words in self.segmentations],
            score=self.score(),
        )

    def score(self) -> float:
        return score_segmentation(
            self.segmentations,
            self.lexicon.base,
            d=self.lexicon.d,
            strength=self.lexicon.strength,
            evidence=self.evidence,
        )


def score_segmentation(segmentations, base: WordBase, d: float = 0.5,
                       strength: float = 1.0, evidence=()) -> float:
    """Joint log probability of a corpus segmentation.

    Computed by re-seating every word in a fresh restaurant (evidence
    first, unscored) with a fixed internal stream, so equal
    segmentations always score equally.
    """
    rng = np.random.default_rng(SCORE_SEED)
    lex = PitmanYorLexicon(base, d=d, strength=strength)
    for w in evidence:
        lex.add(tuple(w), rng)
    total = 0.0
    for words in segmentations:
        for w in words:
            total += lex.log_predictive(tuple(w))
            lex.add(tuple(w), rng)
    return total


def sample_corpus_lists(
    corpus,
    n_lists: int,
    sweeps: int,
    rng: np.random.Generator,
    n_symbols: int,
    d: float = 0.5,
    strength: float = 1.0,
    p_cont: float = 0.6,
    max_word_len: int = 14,
    init=None,
    evidence=None,
    start_temperature: float = 1.0,
) -> list[CorpusList]:
    """Draw ``n_lists`` candidate corpus segmentations.

    With ``sweeps > 0`` a single Gibbs chain is run and snapshots are
    taken at evenly spaced sweep counts, the last one after the final
    sweep.  ``sweeps == 0`` falls back to independent draws from the
    base model, which is the sensible prior when nothing has been
    learned yet.  ``start_temperature > 1`` anneals the first half of
    the sweeps from that temperature down to 1, which keeps the early
    lexicon from freezing around sub-word fragments.
    """
    if n_lists < 1:
        raise ValueError("need at least one list")
    base = WordBase(n_symbols=n_symbols, p_cont=p_cont)
    if sweeps == 0:
        out = []
        for _ in range(n_lists):
            lex = PitmanYorLexicon(base, d=d, strength=strength)
            segs = [ffbs_segment(u, lex, rng, max_word_len) for u in corpus]
            out.append(
                CorpusList(
                    utterances=segs,
                    score=score_segmentation(segs, base, d=d, strength=strength),
                )
            )
        return out
    sampler = SegmentationSampler(
        corpus,
        rng,
        base,
        d=d,
        strength=strength,
        max_word_len=max_word_len,
        init=init,
        evidence=evidence,
    )
    ramp = max(1, sweeps // 2) if start_temperature > 1.0 else 0
    # snapshots are spread over the post-anneal sweeps only; states taken
    # while hot are near-prior draws and waste a candidate slot
    first = min(ramp, sweeps - 1)
    span = sweeps - first
    take_at = {
        first + max(1, round(span * (j + 1) / n_lists)) for j in range(n_lists)
    }
    out = []
    for t in range(1, sweeps + 1):
        if ramp:
            frac = min(1.0, (t - 1) / ramp)
            temperature = start_temperature + (1.0 - start_temperature) * frac
        else:
            temperature = 1.0
        sampler.sweep(temperature=max(1.0, temperature))
        if t in take_at:
            out.append(sampler.snapshot())
    while len(out) < n_lists:  # duplicated snapshot points collapse
        out.append(sampler.snapshot())
    return out
