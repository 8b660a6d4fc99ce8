"""Terminology glossaries: loading, validation, merging, lookup, lexical stats.

A glossary maps one (source term, target language) pair to a single curated
translation. Keys are NFC-normalized with internal whitespace collapsed; case
is preserved in storage (case handling is the matcher's concern).

File formats:
  JSONL - one object per line, UTF-8. Required: source_term, language,
          translation. Optional: contexts (array, at most 3), domains (array),
          provenance (default "external").
  TSV   - 4 tab-separated columns (source_term, language, translation,
          provenance). Tabs/newlines inside values are backslash-escaped;
          the backslash itself is escaped too, so save/load is lossless.
          Contexts and domains are JSONL-only.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .errors import (
    ConflictError,
    DuplicateKeyError,
    EmptyFieldError,
    NoEntriesError,
    ParseError,
)
from .normalize import nfc_collapse, normalize_language

PROVENANCE_VALUES = ("extracted", "external", "merged")
MAX_CONTEXTS = 3
MERGE_POLICIES = ("prefer_base", "prefer_other", "error_on_conflict")


@dataclass(frozen=True)
class GlossaryEntry:
    """One (source term, language) -> translation mapping with provenance."""

    source_term: str
    language: str
    translation: str
    contexts: tuple[str, ...] = ()
    domains: tuple[str, ...] = ()
    provenance: str = "external"

    def __post_init__(self) -> None:
        object.__setattr__(self, "source_term", nfc_collapse(self.source_term))
        object.__setattr__(self, "language", normalize_language(self.language))
        object.__setattr__(self, "translation", nfc_collapse(self.translation))
        object.__setattr__(self, "contexts", tuple(self.contexts))
        object.__setattr__(self, "domains", tuple(self.domains))
        if not self.source_term:
            raise EmptyFieldError("source_term is empty after trimming")
        if not self.language:
            raise EmptyFieldError(f"language missing for {self.source_term!r}")
        if not self.translation:
            raise EmptyFieldError(
                f"translation for {self.source_term!r} is empty after trimming"
            )
        if len(self.contexts) > MAX_CONTEXTS:
            raise ParseError(
                f"{self.source_term!r}: at most {MAX_CONTEXTS} contexts allowed, "
                f"got {len(self.contexts)}"
            )
        if self.provenance not in PROVENANCE_VALUES:
            raise ParseError(
                f"{self.source_term!r}: provenance must be one of "
                f"{PROVENANCE_VALUES}, got {self.provenance!r}"
            )

    @property
    def key(self) -> tuple[str, str]:
        return (self.language, self.source_term)


class Glossary:
    """Immutable collection of entries with a per-language lookup index.

    Immutable after construction, so concurrent reads are safe.
    """

    __slots__ = ("entries", "_index")

    def __init__(self, entries: Iterable[GlossaryEntry] = ()):
        entries = tuple(entries)
        index: dict[tuple[str, str], GlossaryEntry] = {}
        for entry in entries:
            if entry.key in index:
                raise DuplicateKeyError(
                    f"duplicate key (source_term={entry.source_term!r}, "
                    f"language={entry.language!r})"
                )
            index[entry.key] = entry
        self.entries = entries
        self._index = index

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[GlossaryEntry]:
        return iter(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Glossary):
            return NotImplemented
        return self.entries == other.entries

    def lookup(self, source_term: str, language: str) -> GlossaryEntry | None:
        """Exact lookup under load-time normalization (NFC + space collapse)."""
        key = (normalize_language(language), nfc_collapse(source_term))
        return self._index.get(key)

    def languages(self) -> tuple[str, ...]:
        return tuple(sorted({e.language for e in self.entries}))

    def entries_for(self, language: str) -> tuple[GlossaryEntry, ...]:
        language = normalize_language(language)
        return tuple(e for e in self.entries if e.language == language)


def _entry_from_obj(obj: dict, where: str) -> GlossaryEntry:
    for req in ("source_term", "language", "translation"):
        if req not in obj:
            raise ParseError(f"{where}: missing required key {req!r}")
        if not isinstance(obj[req], str):
            raise ParseError(f"{where}: key {req!r} must be a string")
    contexts = obj.get("contexts", [])
    domains = obj.get("domains", [])
    if not isinstance(contexts, list) or not all(isinstance(c, str) for c in contexts):
        raise ParseError(f"{where}: contexts must be an array of strings")
    if not isinstance(domains, list) or not all(isinstance(d, str) for d in domains):
        raise ParseError(f"{where}: domains must be an array of strings")
    if len(contexts) > MAX_CONTEXTS:
        raise ParseError(f"{where}: at most {MAX_CONTEXTS} contexts allowed")
    provenance = obj.get("provenance", "external")
    if provenance not in PROVENANCE_VALUES:
        raise ParseError(f"{where}: unknown provenance {provenance!r}")
    try:
        return GlossaryEntry(
            source_term=obj["source_term"],
            language=obj["language"],
            translation=obj["translation"],
            contexts=tuple(contexts),
            domains=tuple(domains),
            provenance=provenance,
        )
    except EmptyFieldError as exc:
        raise EmptyFieldError(f"{where}: {exc}") from exc


def _tsv_escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _tsv_unescape(value: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\" and i + 1 < len(value):
            nxt = value[i + 1]
            if nxt == "t":
                out.append("\t")
                i += 2
                continue
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def load_glossary(path: str | Path, format: str | None = None) -> Glossary:
    """Load and validate a glossary file.

    ``format`` is "jsonl" or "tsv"; when omitted it is inferred from the file
    suffix (default jsonl). Duplicate (source_term, language) keys are
    rejected. An empty file yields an empty glossary.
    """
    path = Path(path)
    if format is None:
        format = "tsv" if path.suffix.lower() == ".tsv" else "jsonl"
    if format not in ("jsonl", "tsv"):
        raise ValueError(f"unknown glossary format {format!r}")
    entries: list[GlossaryEntry] = []
    text = path.read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{path.name}:{lineno}"
        if format == "jsonl":
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(f"{where}: expected a JSON object")
            entries.append(_entry_from_obj(obj, where))
        else:
            cols = line.split("\t")
            if len(cols) != 4:
                raise ParseError(f"{where}: expected 4 tab-separated columns, got {len(cols)}")
            source_term, language, translation, provenance = (_tsv_unescape(c) for c in cols)
            if provenance not in PROVENANCE_VALUES:
                raise ParseError(f"{where}: unknown provenance {provenance!r}")
            try:
                entries.append(
                    GlossaryEntry(
                        source_term=source_term,
                        language=language,
                        translation=translation,
                        provenance=provenance,
                    )
                )
            except EmptyFieldError as exc:
                raise EmptyFieldError(f"{where}: {exc}") from exc
    return Glossary(entries)


def save_glossary(glossary: Glossary, path: str | Path, format: str | None = None) -> None:
    """Write a glossary; inverse of load_glossary for the same format."""
    path = Path(path)
    if format is None:
        format = "tsv" if path.suffix.lower() == ".tsv" else "jsonl"
    lines: list[str] = []
    for entry in glossary:
        if format == "jsonl":
            obj: dict = {
                "source_term": entry.source_term,
                "language": entry.language,
                "translation": entry.translation,
            }
            if entry.contexts:
                obj["contexts"] = list(entry.contexts)
            if entry.domains:
                obj["domains"] = list(entry.domains)
            obj["provenance"] = entry.provenance
            lines.append(json.dumps(obj, ensure_ascii=False))
        elif format == "tsv":
            lines.append(
                "\t".join(
                    _tsv_escape(v)
                    for v in (entry.source_term, entry.language, entry.translation, entry.provenance)
                )
            )
        else:
            raise ValueError(f"unknown glossary format {format!r}")
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def merge(base: Glossary, other: Glossary, policy: str = "prefer_base") -> Glossary:
    """Union of two glossaries with per-key conflict resolution.

    Keys present in both with equal translations are deduplicated (the base
    entry is kept as-is). Differing translations are resolved per policy and
    the winning entry is re-tagged provenance="merged".
    """
    if policy not in MERGE_POLICIES:
        raise ValueError(f"policy must be one of {MERGE_POLICIES}, got {policy!r}")
    merged: dict[tuple[str, str], GlossaryEntry] = {e.key: e for e in base}
    for entry in other:
        existing = merged.get(entry.key)
        if existing is None:
            merged[entry.key] = entry
            continue
        if existing.translation == entry.translation:
            continue
        if policy == "error_on_conflict":
            raise ConflictError(
                f"conflicting translations for {entry.key}: "
                f"{existing.translation!r} vs {entry.translation!r}"
            )
        winner = entry if policy == "prefer_other" else existing
        merged[entry.key] = dataclasses.replace(winner, provenance="merged")
    return Glossary(merged.values())


@dataclass(frozen=True)
class MeanStd:
    mean: float
    std: float


@dataclass(frozen=True)
class LexicalStats:
    """Per-language lexical statistics over glossary entries.

    Standard deviations are population deviations (ddof 0). Characters are
    Unicode scalar values excluding whitespace. Unique word counts are over
    casefolded surface forms.
    """

    language: str
    n_terms: int
    unique_src_words: int
    unique_tgt_words: int
    src_words_per_term: MeanStd
    tgt_words_per_term: MeanStd
    src_chars_per_term: MeanStd
    tgt_chars_per_term: MeanStd

    def to_dict(self) -> dict:
        out: dict = {
            "language": self.language,
            "n_terms": self.n_terms,
            "unique_src_words": self.unique_src_words,
            "unique_tgt_words": self.unique_tgt_words,
        }
        for name in (
            "src_words_per_term",
            "tgt_words_per_term",
            "src_chars_per_term",
            "tgt_chars_per_term",
        ):
            ms: MeanStd = getattr(self, name)
            out[name] = {"mean": ms.mean, "std": ms.std}
        return out


def _mean_std(values: list[float]) -> MeanStd:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return MeanStd(mean, math.sqrt(var))


def _default_segmenter(text: str, language: str) -> list[str]:
    from .matcher import tokenize

    return list(tokenize(text, language).words)


def lexical_stats(
    glossary: Glossary,
    language: str,
    segmenter: Callable[[str, str], list[str]] | None = None,
) -> LexicalStats:
    """Compute lexical statistics for one language of the glossary.

    ``segmenter(text, language)`` supplies word segmentation; the default
    splits on whitespace/punctuation and falls back to character segmentation
    for scripts written without spaces. Language-specific segmenters can be
    injected without touching this module.
    """
    language = normalize_language(language)
    entries = glossary.entries_for(language)
    if not entries:
        raise NoEntriesError(f"glossary has no entries for language {language!r}")
    if segmenter is None:
        segmenter = _default_segmenter

    src_words_all: set[str] = set()
    tgt_words_all: set[str] = set()
    src_word_counts: list[float] = []
    tgt_word_counts: list[float] = []
    src_char_counts: list[float] = []
    tgt_char_counts: list[float] = []
    for entry in entries:
        src_words = segmenter(entry.source_term, "en")
        tgt_words = segmenter(entry.translation, language)
        src_words_all.update(w.casefold() for w in src_words)
        tgt_words_all.update(w.casefold() for w in tgt_words)
        src_word_counts.append(float(len(src_words)))
        tgt_word_counts.append(float(len(tgt_words)))
        src_char_counts.append(float(sum(1 for ch in entry.source_term if not ch.isspace())))
        tgt_char_counts.append(float(sum(1 for ch in entry.translation if not ch.isspace())))

    return LexicalStats(
        language=language,
        n_terms=len(entries),
        unique_src_words=len(src_words_all),
        unique_tgt_words=len(tgt_words_all),
        src_words_per_term=_mean_std(src_word_counts),
        tgt_words_per_term=_mean_std(tgt_word_counts),
        src_chars_per_term=_mean_std(src_char_counts),
        tgt_chars_per_term=_mean_std(tgt_char_counts),
    )
