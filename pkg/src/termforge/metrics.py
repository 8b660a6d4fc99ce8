"""Corpus translation metrics: BLEU, ChrF / ChrF++, and TER.

BLEU is corpus-level 4-gram BLEU with uniform weights, clipped counts, and
brevity penalty exp(1 - r/c) for c <= r. Orders whose total n-gram count is
zero (all hypotheses shorter than n) are excluded from the geometric mean, so
a corpus identical to its references always scores 100. Zero counts on
higher orders (n >= 2) are smoothed exponentially: the k-th zero order gets
1 / (2^k * total_n); a zero unigram count is never smoothed, so disjoint
corpora score exactly 0. Smoothing can be switched off.

ChrF is the F_beta (beta = 2) of character n-gram precision and recall
averaged over orders 1..char_order, with whitespace removed before character
n-grams. word_order > 0 mixes in whitespace-token n-gram orders, which is
ChrF++ at word_order = 2; word_order = 0 reduces ChrF++ to ChrF exactly.

TER counts insertions, deletions, substitutions, and block shifts against
the reference length, aggregated corpus-wide as (sum of edits) / (sum of
reference lengths) * 100. Shifts use the standard greedy search: repeatedly
apply the block shift that most reduces the remaining edit distance (ties
break on smaller block start, then smaller block end, then smaller
destination), each applied shift costing one edit.

Hypothesis/reference tokenization is the caller's concern. COMET needs a
neural regressor and is deliberately absent; MetricReport carries an
optional externally-supplied value for display only.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyCorpusError, EmptyReferenceError, LengthMismatchError

BLEU_ORDER = 4
CHRF_ORDER = 6
CHRF_BETA = 2.0

Tokens = Sequence[str]


def _check_corpus(hyps: Sequence, refs: Sequence) -> None:
    if len(hyps) != len(refs):
        raise LengthMismatchError(
            f"{len(hyps)} hypotheses vs {len(refs)} references"
        )
    if len(hyps) == 0:
        raise EmptyCorpusError("corpus is empty")


def _ngrams(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_statistics(
    hyps: Sequence[Tokens], refs: Sequence[Tokens]
) -> tuple[list[int], list[int], int, int]:
    """Clipped/total n-gram counts per order plus corpus lengths."""
    _check_corpus(hyps, refs)
    correct = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        hyp = list(hyp)
        ref = list(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, BLEU_ORDER + 1):
            hyp_counts = _ngrams(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngrams(ref, n)
            total[n - 1] += sum(hyp_counts.values())
            correct[n - 1] += sum((hyp_counts & ref_counts).values())
    return correct, total, hyp_len, ref_len


def bleu_from_statistics(
    correct: Sequence[int],
    total: Sequence[int],
    hyp_len: int,
    ref_len: int,
    smoothing: str = "exp",
) -> float:
    if smoothing not in ("exp", "none"):
        raise ValueError(f"unknown smoothing {smoothing!r}")
    effective = max((n for n in range(1, BLEU_ORDER + 1) if total[n - 1] > 0), default=0)
    if effective == 0 or hyp_len == 0:
        return 0.0
    if correct[0] == 0:
        return 0.0
    log_sum = math.log(correct[0] / total[0])
    zeros = 0
    for n in range(2, effective + 1):
        if correct[n - 1] > 0:
            log_sum += math.log(correct[n - 1] / total[n - 1])
        elif smoothing == "exp":
            zeros += 1
            log_sum += math.log(1.0 / (2**zeros * total[n - 1]))
        else:
            return 0.0
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_sum / effective)


def bleu(hyps: Sequence[Tokens], refs: Sequence[Tokens], smoothing: str = "exp") -> float:
    """Corpus BLEU over pre-tokenized segments, on the 0-100 scale."""
    correct, total, hyp_len, ref_len = bleu_statistics(hyps, refs)
    return bleu_from_statistics(correct, total, hyp_len, ref_len, smoothing)


def _chrf_order_statistics(
    hyps: Sequence[str], refs: Sequence[str], char_order: int, word_order: int
) -> list[list[int]]:
    """Per order slot: [hypothesis n-grams, reference n-grams, matches]."""
    slots = [[0, 0, 0] for _ in range(char_order + word_order)]
    for hyp, ref in zip(hyps, refs):
        hyp_chars = "".join(hyp.split())
        ref_chars = "".join(ref.split())
        for i in range(char_order):
            h = _ngrams(hyp_chars, i + 1)
            r = _ngrams(ref_chars, i + 1)
            slots[i][0] += sum(h.values())
            slots[i][1] += sum(r.values())
            slots[i][2] += sum((h & r).values())
        hyp_words = hyp.split()
        ref_words = ref.split()
        for i in range(word_order):
            h = _ngrams(hyp_words, i + 1)
            r = _ngrams(ref_words, i + 1)
            slots[char_order + i][0] += sum(h.values())
            slots[char_order + i][1] += sum(r.values())
            slots[char_order + i][2] += sum((h & r).values())
    return slots


def chrf(
    hyps: Sequence[str],
    refs: Sequence[str],
    char_order: int = CHRF_ORDER,
    word_order: int = 0,
    beta: float = CHRF_BETA,
) -> float:
    """Corpus ChrF on raw strings; word_order = 2 yields ChrF++."""
    _check_corpus(hyps, refs)
    slots = _chrf_order_statistics(hyps, refs, char_order, word_order)
    precision_sum = 0.0
    recall_sum = 0.0
    effective = 0
    for hyp_total, ref_total, matched in slots:
        if hyp_total > 0 and ref_total > 0:
            precision_sum += matched / hyp_total
            recall_sum += matched / ref_total
            effective += 1
    if effective == 0:
        return 0.0
    precision = precision_sum / effective
    recall = recall_sum / effective
    if precision + recall == 0.0:
        return 0.0
    beta_sq = beta * beta
    return 100.0 * (1 + beta_sq) * precision * recall / (beta_sq * precision + recall)


def chrf_plus_plus(hyps: Sequence[str], refs: Sequence[str]) -> float:
    return chrf(hyps, refs, word_order=2)


def _edit_distance(a: Sequence, b: Sequence) -> int:
    """Word-level Levenshtein distance, unit costs."""
    prev = list(range(len(b) + 1))
    for i, tok_a in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, tok_b in enumerate(b, start=1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (0 if tok_a == tok_b else 1),
            )
        prev = cur
    return prev[len(b)]


def _best_shift(hyp: list, ref: list, current: int) -> tuple[list, int] | None:
    """The block shift most reducing edit distance, or None if none helps.

    Ties break on (resulting distance, block start, block end, destination).
    """
    best_key: tuple[int, int, int, int] | None = None
    best_seq: list | None = None
    n = len(hyp)
    for i in range(n):
        for j in range(i + 1, n + 1):
            block = hyp[i:j]
            rest = hyp[:i] + hyp[j:]
            for dest in range(len(rest) + 1):
                if dest == i:
                    continue  # reinsertion at the original spot is a no-op
                shifted = rest[:dest] + block + rest[dest:]
                distance = _edit_distance(shifted, ref)
                if distance >= current:
                    continue
                key = (distance, i, j, dest)
                if best_key is None or key < best_key:
                    best_key = key
                    best_seq = shifted
    if best_key is None:
        return None
    return best_seq, best_key[0]  # type: ignore[return-value]


def ter_segment_edits(hyp: Tokens, ref: Tokens) -> int:
    """Total edits (shifts + insert/delete/substitute) for one segment."""
    current = list(hyp)
    distance = _edit_distance(current, list(ref))
    shifts = 0
    while True:
        improvement = _best_shift(current, list(ref), distance)
        if improvement is None:
            break
        current, distance = improvement
        shifts += 1
    return shifts + distance


def ter_statistics(hyps: Sequence[Tokens], refs: Sequence[Tokens]) -> tuple[int, int]:
    _check_corpus(hyps, refs)
    total_edits = 0
    total_ref = 0
    for hyp, ref in zip(hyps, refs):
        if len(ref) == 0:
            raise EmptyReferenceError("TER needs a nonempty reference per segment")
        total_edits += ter_segment_edits(hyp, ref)
        total_ref += len(ref)
    return total_edits, total_ref


def ter(hyps: Sequence[Tokens], refs: Sequence[Tokens]) -> float:
    """Corpus TER over pre-tokenized segments, x100 (lower is better)."""
    total_edits, total_ref = ter_statistics(hyps, refs)
    return 100.0 * total_edits / total_ref


@dataclass(frozen=True)
class MetricReport:
    """Corpus scores plus the component counts needed to audit them."""

    bleu: float
    chrf: float
    chrf_pp: float
    ter: float
    n_segments: int
    bleu_correct: tuple[int, ...]
    bleu_total: tuple[int, ...]
    hyp_len: int
    ref_len: int
    ter_edits: int
    ter_ref_len: int
    comet: float | None = None  # externally supplied, display only

    def __post_init__(self) -> None:
        if self.n_segments < 1:
            raise EmptyCorpusError("a report covers at least one segment")

    def to_dict(self) -> dict:
        out = {
            "bleu": self.bleu,
            "chrf": self.chrf,
            "chrf_pp": self.chrf_pp,
            "ter": self.ter,
            "n_segments": self.n_segments,
            "counts": {
                "bleu_correct": list(self.bleu_correct),
                "bleu_total": list(self.bleu_total),
                "hyp_len": self.hyp_len,
                "ref_len": self.ref_len,
                "ter_edits": self.ter_edits,
                "ter_ref_len": self.ter_ref_len,
            },
        }
        if self.comet is not None:
            out["comet"] = self.comet
        return out


def evaluate(
    hyp_lines: Sequence[str],
    ref_lines: Sequence[str],
    language: str = "en",
    comet: float | None = None,
) -> MetricReport:
    """Score a corpus of raw text lines; tokenization uses the language's
    default segmenter for BLEU/TER, raw strings for ChrF."""
    from .matcher import tokenize

    _check_corpus(hyp_lines, ref_lines)
    hyp_tokens = [list(tokenize(line, language).words) for line in hyp_lines]
    ref_tokens = [list(tokenize(line, language).words) for line in ref_lines]
    correct, total, hyp_len, ref_len = bleu_statistics(hyp_tokens, ref_tokens)
    edits, ter_ref = ter_statistics(hyp_tokens, ref_tokens)
    return MetricReport(
        bleu=bleu_from_statistics(correct, total, hyp_len, ref_len),
        chrf=chrf(hyp_lines, ref_lines),
        chrf_pp=chrf_plus_plus(hyp_lines, ref_lines),
        ter=100.0 * edits / ter_ref,
        n_segments=len(hyp_lines),
        bleu_correct=tuple(correct),
        bleu_total=tuple(total),
        hyp_len=hyp_len,
        ref_len=ref_len,
        ter_edits=edits,
        ter_ref_len=ter_ref,
        comet=comet,
    )
