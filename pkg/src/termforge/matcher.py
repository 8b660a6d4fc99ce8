"""Deterministic tokenization and glossary term spotting over word spans.

The default tokenizer splits on whitespace and separates punctuation; hyphens
and apostrophes between word characters stay inside one token, so
"state-of-the-art" is a single word. For scripts written without spaces
(Chinese, Japanese) each CJK character is its own token. Spans cover every
non-space character exactly once.

Matching is case-insensitive over word sequences, exact otherwise: no fuzzy
matching and no source-side morphology. Overlaps are resolved in favor of the
longer match, then the leftmost one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .glossary import Glossary, GlossaryEntry
from .normalize import normalize_language

_CJK_RANGES = (
    "぀-ヿ"   # hiragana, katakana
    "ㇰ-ㇿ"
    "㐀-䶿"
    "一-鿿"   # unified ideographs
    "豈-﫿"
    "ｦ-ﾟ"   # halfwidth katakana
)
_WORD = r"\w+(?:[-']\w+)*"
# for no-space scripts: word characters minus the CJK ranges, so CJK
# characters fall through to the single-character alternative
_WORD_NON_CJK = rf"[^\W{_CJK_RANGES}]+(?:[-'][^\W{_CJK_RANGES}]+)*"
_TOKEN_RE = re.compile(_WORD + r"|\S")
_TOKEN_RE_CJK = re.compile(f"[{_CJK_RANGES}]|{_WORD_NON_CJK}|\\S")

NO_SPACE_LANGUAGES = frozenset({"zh", "ja"})


def _primary_subtag(language: str) -> str:
    return normalize_language(language).split("-")[0]


@dataclass(frozen=True)
class TokenizedSentence:
    """Original text plus its word list and half-open character spans."""

    text: str
    words: tuple[str, ...]
    word_spans: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if len(self.words) != len(self.word_spans):
            raise ValueError("words and word_spans must have equal length")
        prev_end = -1
        for word, (start, end) in zip(self.words, self.word_spans):
            if not (0 <= start < end <= len(self.text)):
                raise ValueError(f"span ({start}, {end}) out of bounds")
            if start < prev_end:
                raise ValueError("word spans must be ascending and non-overlapping")
            if self.text[start:end] != word:
                raise ValueError(f"span ({start}, {end}) does not reproduce {word!r}")
            prev_end = end

    def __len__(self) -> int:
        return len(self.words)


def tokenize(text: str, language: str = "en") -> TokenizedSentence:
    """Deterministic segmentation of ``text`` under the default policy."""
    pattern = _TOKEN_RE_CJK if _primary_subtag(language) in NO_SPACE_LANGUAGES else _TOKEN_RE
    words: list[str] = []
    spans: list[tuple[int, int]] = []
    for match in pattern.finditer(text):
        words.append(match.group(0))
        spans.append((match.start(), match.end()))
    return TokenizedSentence(text=text, words=tuple(words), word_spans=tuple(spans))


def detokenize(words: list[str] | tuple[str, ...], language: str) -> str:
    """Join words under the language's rule: no separator for zh/ja, else spaces."""
    sep = "" if _primary_subtag(language) in NO_SPACE_LANGUAGES else " "
    return sep.join(words)


def sentence_from_words(words: list[str] | tuple[str, ...], language: str) -> TokenizedSentence:
    """Build a TokenizedSentence from a pre-segmented word list."""
    sep = "" if _primary_subtag(language) in NO_SPACE_LANGUAGES else " "
    spans: list[tuple[int, int]] = []
    pos = 0
    for i, word in enumerate(words):
        if i > 0:
            pos += len(sep)
        spans.append((pos, pos + len(word)))
        pos += len(word)
    return TokenizedSentence(text=sep.join(words), words=tuple(words), word_spans=tuple(spans))


@dataclass(frozen=True)
class TermMatch:
    """A glossary term located in a sentence as a half-open word index range."""

    entry: GlossaryEntry
    word_range: tuple[int, int]
    surface: str

    @property
    def length(self) -> int:
        return self.word_range[1] - self.word_range[0]


def find_matches(sentence: TokenizedSentence, glossary: Glossary, language: str) -> list[TermMatch]:
    """Locate occurrences of the glossary's ``language`` entries in a sentence.

    Case-insensitive over word sequences. All candidate spans are collected,
    then accepted greedily in (longer first, then leftmost) order so accepted
    matches never overlap. The result is sorted by start index.
    """
    entries = glossary.entries_for(language)
    if not entries or not sentence.words:
        return []

    by_seq: dict[tuple[str, ...], GlossaryEntry] = {}
    for entry in entries:
        seq = tuple(w.casefold() for w in tokenize(entry.source_term).words)
        if not seq:
            continue
        # two case variants of one term map to the same sequence; keep the
        # lexicographically smaller source_term for determinism
        prior = by_seq.get(seq)
        if prior is None or entry.source_term < prior.source_term:
            by_seq[seq] = entry
    if not by_seq:
        return []
    max_term_words = max(len(seq) for seq in by_seq)

    words_cf = [w.casefold() for w in sentence.words]
    n = len(words_cf)
    candidates: list[tuple[int, int, GlossaryEntry]] = []
    for start in range(n):
        for length in range(1, min(max_term_words, n - start) + 1):
            entry = by_seq.get(tuple(words_cf[start : start + length]))
            if entry is not None:
                candidates.append((length, start, entry))

    taken = [False] * n
    accepted: list[TermMatch] = []
    for length, start, entry in sorted(candidates, key=lambda c: (-c[0], c[1])):
        if any(taken[start : start + length]):
            continue
        for i in range(start, start + length):
            taken[i] = True
        char_start = sentence.word_spans[start][0]
        char_end = sentence.word_spans[start + length - 1][1]
        accepted.append(
            TermMatch(
                entry=entry,
                word_range=(start, start + length),
                surface=sentence.text[char_start:char_end],
            )
        )
    accepted.sort(key=lambda m: m.word_range[0])
    return accepted
