"""Word alignment from per-subword contextual embeddings.

Pipeline: dot-product similarity between source and target subword vectors,
bidirectional (row- and column-wise) softmax, elementwise product thresholded
against tau, then promotion of surviving subword pairs to word pairs through
the subword-to-word maps (a word pair is linked iff any of its subword pairs
survived).

Also reads the embedding-dump file the companion extraction tool writes:
a JSON object {format_version, layer, dim, pairs: [{src: {...}, tgt: {...}}]}
where each side carries words, subword_tokens, subword_to_word, and vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, ParseError


@dataclass(frozen=True)
class AlignerConfig:
    """Threshold on the product of forward and backward softmax probabilities."""

    threshold: float = 1e-4

    def __post_init__(self) -> None:
        if not (0.0 < self.threshold < 1.0):
            raise ValueError(f"threshold must lie strictly in (0, 1), got {self.threshold}")


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Subword tokens, their vectors, and the map onto word indices."""

    subword_tokens: tuple[str, ...]
    vectors: np.ndarray
    subword_to_word: tuple[int, ...]

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "subword_tokens", tuple(self.subword_tokens))
        object.__setattr__(self, "subword_to_word", tuple(int(v) for v in self.subword_to_word))
        n = len(self.subword_tokens)
        if vectors.shape[0] != n:
            raise ValueError(
                f"vector rows ({vectors.shape[0]}) != subword token count ({n})"
            )
        if len(self.subword_to_word) != n:
            raise ValueError("subword_to_word length must equal subword token count")
        if not np.isfinite(vectors).all():
            raise ValueError("vectors must be finite")
        if n:
            if self.subword_to_word[0] != 0:
                raise ValueError("subword_to_word must start at word index 0")
            for prev, cur in zip(self.subword_to_word, self.subword_to_word[1:]):
                if cur - prev not in (0, 1):
                    raise ValueError("subword_to_word must be nondecreasing and onto")

    @property
    def n_subwords(self) -> int:
        return len(self.subword_tokens)

    @property
    def n_words(self) -> int:
        return self.subword_to_word[-1] + 1 if self.subword_to_word else 0

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


@dataclass(frozen=True)
class Alignment:
    """Set of (source word index, target word index) links."""

    links: frozenset[tuple[int, int]]

    def sorted_links(self) -> list[tuple[int, int]]:
        return sorted(self.links)


def similarity(src: EmbeddingMatrix, tgt: EmbeddingMatrix) -> np.ndarray:
    """Dot products between every source and target subword vector."""
    if src.n_subwords == 0 or tgt.n_subwords == 0:
        return np.zeros((src.n_subwords, tgt.n_subwords))
    if src.dim != tgt.dim:
        raise DimensionMismatchError(
            f"embedding dimensions differ: source {src.dim}, target {tgt.dim}"
        )
    return src.vectors @ tgt.vectors.T


def _softmax(matrix: np.ndarray, axis: int) -> np.ndarray:
    shifted = matrix - matrix.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def align_subwords(sim: np.ndarray, cfg: AlignerConfig | None = None) -> set[tuple[int, int]]:
    """Keep pair (i, j) iff P_fwd[i,j] * P_bwd[i,j] > threshold.

    P_fwd is the row-wise softmax of the similarity matrix, P_bwd the
    column-wise softmax; both use max-subtraction for stability.
    """
    cfg = cfg or AlignerConfig()
    sim = np.asarray(sim, dtype=np.float64)
    if sim.size == 0:
        return set()
    if not np.isfinite(sim).all():
        raise ValueError("similarity matrix must be finite")
    product = _softmax(sim, axis=1) * _softmax(sim, axis=0)
    keep = np.argwhere(product > cfg.threshold)
    return {(int(i), int(j)) for i, j in keep}


def aggregate_to_words(
    pairs: set[tuple[int, int]],
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
) -> Alignment:
    """Promote subword pairs to word pairs (any surviving subword pair links)."""
    links = {(src.subword_to_word[i], tgt.subword_to_word[j]) for i, j in pairs}
    return Alignment(links=frozenset(links))


def align(src: EmbeddingMatrix, tgt: EmbeddingMatrix, cfg: AlignerConfig | None = None) -> Alignment:
    """similarity -> align_subwords -> aggregate_to_words."""
    cfg = cfg or AlignerConfig()
    return aggregate_to_words(align_subwords(similarity(src, tgt), cfg), src, tgt)


# --- embedding-dump file -----------------------------------------------------

DUMP_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DumpPair:
    src_words: tuple[str, ...]
    tgt_words: tuple[str, ...]
    src: EmbeddingMatrix
    tgt: EmbeddingMatrix


@dataclass(frozen=True)
class DumpData:
    format_version: int
    layer: int
    dim: int
    pairs: tuple[DumpPair, ...]


def _side_from_obj(obj: dict, dim: int, where: str) -> tuple[tuple[str, ...], EmbeddingMatrix]:
    for req in ("words", "subword_tokens", "subword_to_word", "vectors"):
        if req not in obj:
            raise ParseError(f"{where}: missing key {req!r}")
    try:
        matrix = EmbeddingMatrix(
            subword_tokens=tuple(obj["subword_tokens"]),
            vectors=np.asarray(obj["vectors"], dtype=np.float64).reshape(
                len(obj["subword_tokens"]), -1
            )
            if obj["subword_tokens"]
            else np.zeros((0, dim)),
            subword_to_word=tuple(obj["subword_to_word"]),
        )
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc
    words = tuple(str(w) for w in obj["words"])
    if matrix.n_subwords and matrix.n_words != len(words):
        raise ParseError(
            f"{where}: subword_to_word covers {matrix.n_words} words "
            f"but {len(words)} words are listed"
        )
    if matrix.n_subwords and matrix.dim != dim:
        raise ParseError(f"{where}: vector dim {matrix.dim} != declared dim {dim}")
    return words, matrix


def load_dump(path: str | Path) -> DumpData:
    """Read and validate an embedding-dump file."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path.name}: invalid JSON ({exc.msg})") from exc
    for req in ("format_version", "layer", "dim", "pairs"):
        if req not in obj:
            raise ParseError(f"{path.name}: missing key {req!r}")
    if obj["format_version"] != DUMP_FORMAT_VERSION:
        raise ParseError(
            f"{path.name}: unsupported format_version {obj['format_version']!r}"
        )
    dim = int(obj["dim"])
    pairs: list[DumpPair] = []
    for i, pair_obj in enumerate(obj["pairs"]):
        where = f"{path.name}: pair {i}"
        if "src" not in pair_obj or "tgt" not in pair_obj:
            raise ParseError(f"{where}: needs 'src' and 'tgt'")
        src_words, src = _side_from_obj(pair_obj["src"], dim, where + " (src)")
        tgt_words, tgt = _side_from_obj(pair_obj["tgt"], dim, where + " (tgt)")
        pairs.append(DumpPair(src_words=src_words, tgt_words=tgt_words, src=src, tgt=tgt))
    return DumpData(
        format_version=int(obj["format_version"]),
        layer=int(obj["layer"]),
        dim=dim,
        pairs=tuple(pairs),
    )
