"""Turn term matches plus a word alignment into target-side replacements.

For every matched source term, the target span is the contiguous range from
the smallest to the largest target word linked to any word of the match, even
when the links are discontiguous (replacements are phrases). Matches with no
linked target words are skipped, not appended; skips land in the plan's
warnings. When two computed spans overlap, the match with the longer source
range wins, then the leftmost.

Edits are applied right-to-left directly on the original sentence text, so
spacing and punctuation outside the edited spans survive untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

from .aligner import Alignment
from .errors import RangeError
from .glossary import Glossary, GlossaryEntry
from .matcher import TermMatch, TokenizedSentence
from .refiner import PromptSpec, format_term_block, render_template


@dataclass(frozen=True)
class Edit:
    """Replace the half-open target word range with the glossary translation."""

    tgt_word_range: tuple[int, int]
    replacement: str
    term: GlossaryEntry


@dataclass(frozen=True)
class SubstitutionPlan:
    """Non-overlapping edits stored in application order (descending start)."""

    edits: tuple[Edit, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "edits", tuple(self.edits))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        prev_start: int | None = None
        for edit in self.edits:
            start, end = edit.tgt_word_range
            if start >= end:
                raise ValueError(f"empty edit range {edit.tgt_word_range}")
            if prev_start is not None and end > prev_start:
                raise ValueError("edits must be sorted by descending start and non-overlapping")
            prev_start = start


def plan_substitutions(
    matches: list[TermMatch],
    alignment: Alignment,
    tgt: TokenizedSentence,
    glossary: Glossary,
    language: str,
) -> SubstitutionPlan:
    """Compute target-side edits for the given matches under the alignment.

    ``matches`` must come from the same source sentence the alignment was
    computed on; entries are resolved against ``glossary`` for ``language``.
    """
    warnings: list[str] = []
    proposals: list[tuple[TermMatch, tuple[int, int], GlossaryEntry]] = []
    for match in matches:
        entry = glossary.lookup(match.entry.source_term, language) or match.entry
        start, end = match.word_range
        linked = sorted({b for (a, b) in alignment.links if start <= a < end})
        if not linked:
            warnings.append(
                f"term {entry.source_term!r} at source words {match.word_range} "
                "has no alignment links; skipped"
            )
            continue
        span = (linked[0], linked[-1] + 1)
        if span[1] > len(tgt.words):
            raise RangeError(
                f"alignment links point past the target sentence "
                f"({span[1]} > {len(tgt.words)})"
            )
        proposals.append((match, span, entry))

    accepted: list[tuple[TermMatch, tuple[int, int], GlossaryEntry]] = []
    for match, span, entry in sorted(
        proposals, key=lambda p: (-(p[0].word_range[1] - p[0].word_range[0]), p[0].word_range[0])
    ):
        if any(span[0] < a_end and a_start < span[1] for _, (a_start, a_end), _ in accepted):
            warnings.append(
                f"target span {span} for term {entry.source_term!r} overlaps an "
                "edit from a longer match; dropped"
            )
            continue
        accepted.append((match, span, entry))

    edits = tuple(
        Edit(tgt_word_range=span, replacement=entry.translation, term=entry)
        for _, span, entry in sorted(accepted, key=lambda p: -p[1][0])
    )
    return SubstitutionPlan(edits=edits, warnings=tuple(warnings))


def apply_plan(tgt: TokenizedSentence, plan: SubstitutionPlan) -> str:
    """Apply the plan's edits right-to-left; empty plans return the text as-is."""
    return apply_plan_detailed(tgt, plan)[0]


def apply_plan_detailed(
    tgt: TokenizedSentence, plan: SubstitutionPlan
) -> tuple[str, tuple[tuple[int, int], ...]]:
    """Like apply_plan but also returns the character spans of the replacements
    inside the output string, in ascending order (used for highlighting)."""
    n = len(tgt.words)
    for edit in plan.edits:
        start, end = edit.tgt_word_range
        if not (0 <= start < end <= n):
            raise RangeError(f"edit range {edit.tgt_word_range} exceeds {n} target words")
    text = tgt.text
    out_spans: list[tuple[int, int]] = []
    for edit in plan.edits:  # descending start: later splices keep earlier offsets valid
        start, end = edit.tgt_word_range
        char_start = tgt.word_spans[start][0]
        char_end = tgt.word_spans[end - 1][1]
        delta = len(edit.replacement) - (char_end - char_start)
        out_spans = [(s + delta if s >= char_end else s, e + delta if e > char_end else e) for s, e in out_spans]
        out_spans.append((char_start, char_start + len(edit.replacement)))
        text = text[:char_start] + edit.replacement + text[char_end:]
    out_spans.sort()
    return text, tuple(out_spans)


def repair_prompt(
    src_text: str,
    substituted: str,
    terms: list[tuple[str, str]],
    language: str,
) -> PromptSpec:
    """Post-hoc prompt asking a model to make the spliced translation
    morphologically coherent while keeping the enforced terms verbatim."""
    return render_template(
        "repair",
        {
            "target_lang": language,
            "source_text": src_text,
            "substituted_translation": substituted,
            "term_block": format_term_block(terms),
        },
    )
