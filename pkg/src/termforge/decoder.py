"""Terminology-aware decoding over an abstract incremental scorer.

Two integration paths are provided: constrained beam search, which only
accepts finished hypotheses containing every required phrase contiguously,
and multiplicative logit adjustment, which scales the logits of selected
token ids before the per-step argmax. The boost is a literal multiplication
(negative logits flip sign accordingly); an additive mode exists as a config
option but is off by default.

A hypothesis finishes by emitting the end-of-sequence token; the length
budget counts that token. Scores are raw sums of chosen-token log-softmax
values (no length normalization), so small instances can be checked against
exhaustive enumeration. Ties break toward the lexicographically smaller token
sequence, i.e. lower token ids win.

Beam hypotheses are grouped into banks by the number of constraint tokens
fulfilled (completed phrase tokens plus the longest partial prefix still in
progress); each bank keeps its own top-k, so unconstrained hypotheses cannot
crowd out progressing ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import NoCompletionError, ParseError, UnsatisfiableError

PAPER_BOOST_FACTORS = (10 / 7, 10 / 8, 10 / 9)


class ScorerInterface(Protocol):
    """Anything that maps a token prefix to a logit vector."""

    vocab_size: int
    eos_id: int

    def step(self, prefix: Sequence[int]) -> Sequence[float]: ...


@dataclass(frozen=True)
class TableScorer:
    """Toy scorer backed by an explicit prefix -> logits table."""

    vocab_size: int
    eos_id: int
    table: dict[tuple[int, ...], tuple[float, ...]]
    default: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.eos_id < self.vocab_size):
            raise ValueError("eos_id must be a valid token id")
        for key, logits in self.table.items():
            if len(logits) != self.vocab_size:
                raise ValueError(f"logits for prefix {key} have wrong length")
        if self.default is not None and len(self.default) != self.vocab_size:
            raise ValueError("default logits have wrong length")

    def step(self, prefix: Sequence[int]) -> tuple[float, ...]:
        logits = self.table.get(tuple(prefix), self.default)
        if logits is None:
            raise KeyError(f"no logits for prefix {tuple(prefix)} and no default")
        return logits

    @classmethod
    def from_json(cls, path: str | Path) -> "TableScorer":
        """Load from JSON: {vocab_size, eos_id, default?, table: {"1,2": [...]}}.

        Table keys are comma-separated token ids; the empty string keys the
        empty prefix.
        """
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        for req in ("vocab_size", "eos_id", "table"):
            if req not in obj:
                raise ParseError(f"scorer file missing key {req!r}")
        table: dict[tuple[int, ...], tuple[float, ...]] = {}
        for key, logits in obj["table"].items():
            prefix = tuple(int(t) for t in key.split(",")) if key else ()
            table[prefix] = tuple(float(v) for v in logits)
        default = tuple(float(v) for v in obj["default"]) if obj.get("default") else None
        return cls(
            vocab_size=int(obj["vocab_size"]),
            eos_id=int(obj["eos_id"]),
            table=table,
            default=default,
        )


@dataclass(frozen=True)
class DecodingConstraint:
    """Token-id phrases that must each appear contiguously in the output."""

    phrases: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "phrases", tuple(tuple(p) for p in self.phrases))
        if any(not p for p in self.phrases):
            raise ValueError("constraint phrases must be nonempty")

    @property
    def total_tokens(self) -> int:
        return sum(len(p) for p in self.phrases)


@dataclass(frozen=True)
class LogitBoost:
    """Scale (or, optionally, shift) the logits of selected token ids."""

    token_ids: frozenset[int]
    factor: float
    mode: str = "multiplicative"

    def __post_init__(self) -> None:
        object.__setattr__(self, "token_ids", frozenset(int(t) for t in self.token_ids))
        if self.mode not in ("multiplicative", "additive"):
            raise ValueError(f"unknown boost mode {self.mode!r}")
        if self.factor <= 0:
            raise ValueError("boost factor must be positive")


def adjust_logits(logits: Sequence[float], boost: LogitBoost) -> np.ndarray:
    """Return a boosted copy; non-boosted entries are bit-identical."""
    out = np.array(logits, dtype=np.float64, copy=True)
    if not boost.token_ids:
        return out
    ids = sorted(boost.token_ids)
    if ids[0] < 0 or ids[-1] >= out.shape[0]:
        raise ValueError(f"boost token ids {ids} outside vocabulary of {out.shape[0]}")
    if boost.mode == "multiplicative":
        out[ids] = out[ids] * boost.factor
    else:
        out[ids] = out[ids] + boost.factor
    return out


def _log_softmax(logits: Sequence[float]) -> np.ndarray:
    x = np.asarray(logits, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ValueError("logits must be finite")
    shifted = x - x.max()
    return shifted - math.log(float(np.exp(shifted).sum()))


def greedy_decode(
    scorer: ScorerInterface,
    boost: LogitBoost | None = None,
    max_len: int = 32,
) -> tuple[int, ...]:
    """Pick the (adjusted) argmax at each step; stop at EOS or max_len."""
    sequence: list[int] = []
    while len(sequence) < max_len:
        logits = np.asarray(scorer.step(tuple(sequence)), dtype=np.float64)
        if boost is not None:
            logits = adjust_logits(logits, boost)
        token = int(np.argmax(logits))  # first maximum: lower token id wins
        sequence.append(token)
        if token == scorer.eos_id:
            break
    return tuple(sequence)


def _completed_after(
    sequence: tuple[int, ...],
    done: frozenset[int],
    phrases: tuple[tuple[int, ...], ...],
) -> frozenset[int]:
    """Phrases completed once ``sequence`` ends where it does."""
    new_done = set(done)
    for idx, phrase in enumerate(phrases):
        if idx in new_done:
            continue
        if len(sequence) >= len(phrase) and sequence[-len(phrase) :] == phrase:
            new_done.add(idx)
    return frozenset(new_done)


def _fulfilled_tokens(
    sequence: tuple[int, ...],
    done: frozenset[int],
    phrases: tuple[tuple[int, ...], ...],
) -> int:
    """Bank key: completed phrase tokens plus the longest partial prefix."""
    total = sum(len(phrases[i]) for i in done)
    partial = 0
    for idx, phrase in enumerate(phrases):
        if idx in done:
            continue
        for k in range(min(len(phrase) - 1, len(sequence)), 0, -1):
            if sequence[-k:] == phrase[:k]:
                partial = max(partial, k)
                break
    return total + partial


def beam_search(
    scorer: ScorerInterface,
    constraint: DecodingConstraint,
    beam_width: int,
    max_len: int,
) -> tuple[int, ...]:
    """Best EOS-terminated sequence containing every constraint phrase.

    Raises UnsatisfiableError when the phrases cannot fit in max_len tokens
    and NoCompletionError when no retained hypothesis reaches EOS with all
    constraints met.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    if constraint.total_tokens > max_len:
        raise UnsatisfiableError(
            f"constraint phrases need {constraint.total_tokens} tokens "
            f"but max_len is {max_len}"
        )
    phrases = constraint.phrases
    eos = scorer.eos_id
    # hypothesis: (sequence, score, completed-phrase index set)
    active: list[tuple[tuple[int, ...], float, frozenset[int]]] = [((), 0.0, frozenset())]
    finished: list[tuple[float, tuple[int, ...]]] = []

    for _ in range(max_len):
        candidates: list[tuple[tuple[int, ...], float, frozenset[int]]] = []
        for sequence, score, done in active:
            logp = _log_softmax(scorer.step(sequence))
            for token in range(scorer.vocab_size):
                new_seq = sequence + (token,)
                new_score = score + float(logp[token])
                new_done = _completed_after(new_seq, done, phrases)
                if token == eos:
                    if len(new_done) == len(phrases):
                        finished.append((new_score, new_seq))
                    continue  # EOS ends the hypothesis either way
                candidates.append((new_seq, new_score, new_done))
        banks: dict[int, list[tuple[tuple[int, ...], float, frozenset[int]]]] = {}
        for hyp in candidates:
            banks.setdefault(_fulfilled_tokens(hyp[0], hyp[2], phrases), []).append(hyp)
        active = []
        for key in sorted(banks):
            bank = sorted(banks[key], key=lambda h: (-h[1], h[0]))
            active.extend(bank[:beam_width])
        if not active:
            break

    if not finished:
        raise NoCompletionError(
            "no hypothesis reached end-of-sequence with all constraints met"
        )
    best_score, best_seq = min(finished, key=lambda f: (-f[0], f[1]))
    return best_seq
