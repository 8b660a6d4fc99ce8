"""Pure pieces of the terminology curation pipeline.

Covers chunking document sentences into at most 64-word chunks, recording up
to three contexts per candidate term, the rule-based filter cascade
(representativeness, abbreviations, leading special characters, duplicates),
and the extraction / non-AI-filter / domain-classification prompt builders.
Sentence splitting is the caller's concern; a simple rule-based splitter is
shipped as a default. Full POS tagging is out of scope; a lightweight
function-word rule backs up the LLM noun-phrase filter.
"""

from __future__ import annotations

import dataclasses
import logging
import re
from dataclasses import dataclass

from .normalize import nfc_collapse
from .refiner import PromptSpec, render_template

log = logging.getLogger("termforge.ingest")

MAX_CHUNK_WORDS = 64
MAX_CONTEXTS = 3

DROP_SINGLE_PAPER = "single_paper"
DROP_ABBREVIATION = "abbreviation"
DROP_SPECIAL_CHAR = "special_char"
DROP_DUPLICATE = "duplicate"

_ABBREV_CAPS_RE = re.compile(r"[A-Z]{2,6}")
_ABBREV_DOTTED_RE = re.compile(r"(?:[A-Za-z]\.){2,}")

# words that cannot end a noun phrase; used by the lightweight rule check
FUNCTION_WORDS = frozenset(
    "a an the of in on for to and or with by at from as is are was were be "
    "been being this that these those into over under between".split()
)


@dataclass(frozen=True)
class Chunk:
    """A run of whole sentences (or a slice of an overlong one), <= 64 words."""

    text: str
    word_count: int
    source_doc: str
    index: int

    def __post_init__(self) -> None:
        if self.word_count > MAX_CHUNK_WORDS:
            raise ValueError(f"chunk has {self.word_count} words (limit {MAX_CHUNK_WORDS})")
        if self.word_count != len(self.text.split()):
            raise ValueError("word_count does not match the chunk text")


@dataclass(frozen=True)
class TermCandidate:
    """A candidate term with the documents and contexts it was seen in."""

    term: str
    doc_ids: frozenset[str]
    contexts: tuple[Chunk, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "doc_ids", frozenset(self.doc_ids))
        object.__setattr__(self, "contexts", tuple(self.contexts))
        if not self.doc_ids:
            raise ValueError(f"candidate {self.term!r} needs at least one document id")
        if len(self.contexts) > MAX_CONTEXTS:
            raise ValueError(f"at most {MAX_CONTEXTS} contexts allowed")


_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    """Rule-based default sentence splitter (period/question/bang + space)."""
    parts = _SENTENCE_SPLIT_RE.split(" ".join(text.split()))
    return [p for p in parts if p.strip()]


def chunk_text(
    sentences: list[str], max_words: int = MAX_CHUNK_WORDS, source_doc: str = ""
) -> list[Chunk]:
    """Greedy packing of whole sentences into chunks of at most max_words.

    A single sentence longer than max_words is split at word boundaries into
    full-size slices; the remainder becomes its own chunk. Concatenating the
    chunks' word lists reproduces the input word stream exactly.
    """
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    chunks: list[Chunk] = []
    current: list[str] = []

    def flush() -> None:
        if current:
            chunks.append(
                Chunk(
                    text=" ".join(current),
                    word_count=len(current),
                    source_doc=source_doc,
                    index=len(chunks),
                )
            )
            current.clear()

    for sentence in sentences:
        words = sentence.split()
        if not words:
            continue
        if len(words) > max_words:
            flush()
            for start in range(0, len(words), max_words):
                piece = words[start : start + max_words]
                chunks.append(
                    Chunk(
                        text=" ".join(piece),
                        word_count=len(piece),
                        source_doc=source_doc,
                        index=len(chunks),
                    )
                )
            continue
        if current and len(current) + len(words) > max_words:
            flush()
        current.extend(words)
    flush()
    return chunks


def is_abbreviation(term: str) -> bool:
    """All-caps tokens of 2-6 letters ("CNN") or dotted letter runs ("U.S.")."""
    return bool(_ABBREV_CAPS_RE.fullmatch(term) or _ABBREV_DOTTED_RE.fullmatch(term))


def ends_in_function_word(term: str) -> bool:
    """Rule check backing the noun-phrase filter: last word must carry content."""
    words = term.split()
    return bool(words) and words[-1].casefold() in FUNCTION_WORDS


def filter_candidates(
    candidates: list[TermCandidate],
) -> tuple[list[TermCandidate], list[tuple[TermCandidate, str]]]:
    """Apply the rule cascade; returns (kept, dropped-with-reason).

    Drops candidates seen in fewer than two documents, abbreviations, terms
    whose first character is not alphanumeric, and duplicates under
    NFC + casefold normalization (first occurrence wins). Every input
    candidate lands in exactly one of the two lists, and filtering the kept
    list again is a no-op.
    """
    kept: list[TermCandidate] = []
    dropped: list[tuple[TermCandidate, str]] = []
    seen: set[str] = set()
    for cand in candidates:
        if len(cand.doc_ids) < 2:
            dropped.append((cand, DROP_SINGLE_PAPER))
            continue
        if not cand.term or not cand.term[0].isalnum():
            dropped.append((cand, DROP_SPECIAL_CHAR))
            continue
        if is_abbreviation(cand.term):
            dropped.append((cand, DROP_ABBREVIATION))
            continue
        norm = nfc_collapse(cand.term).casefold()
        if norm in seen:
            dropped.append((cand, DROP_DUPLICATE))
            continue
        seen.add(norm)
        kept.append(cand)
    return kept, dropped


def record_contexts(candidate: TermCandidate, chunk: Chunk) -> TermCandidate:
    """Append the chunk as a context unless the cap is hit or it is already there."""
    if len(candidate.contexts) >= MAX_CONTEXTS or chunk in candidate.contexts:
        return candidate
    return dataclasses.replace(candidate, contexts=candidate.contexts + (chunk,))


def build_extract_prompt(chunk: Chunk) -> PromptSpec:
    """Prompt asking the extraction model to list AI terms in one chunk."""
    return render_template("extract_terms", {"chunk_text": chunk.text})


def build_filter_prompt(terms: list[str]) -> PromptSpec:
    """Prompt asking the judge model to drop non-AI terms from a list."""
    return render_template("filter_non_ai", {"term_list": "; ".join(terms)})


def parse_term_list_response(text: str) -> list[str]:
    """Parse a "term1; term2" reply; empty replies parse to an empty list."""
    return [t.strip() for t in text.split(";") if t.strip()]


def build_domain_prompt(term: str, taxonomy: list[str]) -> PromptSpec:
    """Prompt classifying a term into the taxonomy plus an "Other" bucket."""
    if not taxonomy:
        raise ValueError("taxonomy must be nonempty")
    taxonomy_block = "\n".join(f"- {label}" for label in list(taxonomy) + ["Other"])
    return render_template("classify_domain", {"term": term, "taxonomy_block": taxonomy_block})


def parse_domain_response(text: str, taxonomy: list[str]) -> str:
    """Map the reply onto a taxonomy label; anything else falls back to Other."""
    answer = text.strip()
    for label in list(taxonomy) + ["Other"]:
        if answer.casefold() == label.casefold():
            return label
    log.warning("domain answer %r not in the taxonomy; classified as Other", answer)
    return "Other"
