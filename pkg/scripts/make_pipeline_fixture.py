#!/usr/bin/env python3
"""Regenerate the committed end-to-end pipeline fixtures.

Builds tests/fixtures/pipeline_glossary.jsonl and
tests/fixtures/pipeline_dump.json: 20 English->French segment pairs with
synthetic per-subword embeddings. Each segment is written as a list of
aligned chunks (source phrase, target phrase); every chunk gets its own
orthogonal embedding axis, so the aligner recovers exactly the intended
word groups. Longer words are split into two subword pieces to exercise
subword-to-word aggregation. Output is deterministic.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"

SCALE = math.sqrt(12.0)  # in-group dot 12 >> cross 0: survives tau=1e-4 cleanly

GLOSSARY = [
    ("beam search", "recherche en faisceau"),
    ("machine translation", "traduction automatique"),
    ("neural network", "réseau de neurones"),
    ("language model", "modèle de langue"),
    ("word alignment", "alignement de mots"),
    ("gradient descent", "descente de gradient"),
    ("attention mechanism", "mécanisme d'attention"),
    ("loss function", "fonction de perte"),
]

# each segment: list of (source chunk, target chunk); chunks align as groups
SEGMENTS = [
    [("the", "le"), ("beam search", "recherche gloutonne"), ("decoder", "décodeur"),
     ("is", "est"), ("fast", "rapide"), (".", ".")],
    [("we study", "nous étudions"), ("machine translation", "traduction de machines"),
     ("for papers", "pour les articles"), (".", ".")],
    [("a", "un"), ("neural network", "filet neuronal"), ("learns", "apprend"),
     ("features", "des traits"), (".", ".")],
    [("the", "le"), ("language model", "modèle linguistique"),
     ("predicts", "prédit"), ("tokens", "des jetons"), (".", ".")],
    [("word alignment", "appariement de mots"), ("guides", "guide"),
     ("substitution", "la substitution"), (".", ".")],
    [("gradient descent", "chute de gradient"), ("updates", "met à jour"),
     ("weights", "les poids"), (".", ".")],
    [("the", "le"), ("attention mechanism", "dispositif d'attention"),
     ("weighs", "pondère"), ("context", "le contexte"), (".", ".")],
    [("the", "la"), ("loss function", "fonction de coût"),
     ("drives training", "pilote l'entraînement"), (".", ".")],
    [("beam search", "recherche gloutonne"), ("explores", "explore"),
     ("hypotheses", "des hypothèses"), (".", ".")],
    [("robust", "robuste"), ("machine translation", "traduction mécanique"),
     ("needs terms", "exige des termes"), (".", ".")],
    [("every", "chaque"), ("neural network", "filet de neurones"),
     ("has layers", "a des couches"), (".", ".")],
    [("tuning the", "régler le"), ("language model", "modèle du langage"),
     ("helps", "aide"), (".", ".")],
    [("noisy", "bruyant"), ("word alignment", "alignement lexical"),
     ("hurts", "nuit"), (".", ".")],
    [("stochastic", "stochastique"), ("gradient descent", "descente du gradient"),
     ("converges", "converge"), (".", ".")],
    [("the", "le"), ("attention mechanism", "mécanisme attentionnel"),
     ("and the", "et la"), ("loss function", "fonction de perte"),
     ("interact", "interagissent"), (".", ".")],
    [("a", "une"), ("beam search", "recherche en faisceau"),
     ("baseline", "référence"), (".", ".")],
    [("glossaries", "les glossaires"), ("improve", "améliorent"),
     ("machine translation", "traduction automatisée"), (".", ".")],
    [("deep", "profond"), ("neural network", "réseau de nerfs"),
     ("models", "modèles"), (".", ".")],
    [("plain text", "texte brut"), ("with no terms", "sans aucun terme"),
     ("here", "ici"), (".", ".")],
    [("the", "la"), ("loss function", "fonction des pertes"),
     ("and", "et"), ("gradient descent", "baisse de gradient"),
     ("cooperate", "coopèrent"), (".", ".")],
]


def split_pieces(word: str, side: str) -> list[str]:
    """Words above a length threshold become two subword pieces."""
    limit = 9 if side == "src" else 8
    if len(word) > limit:
        half = len(word) // 2
        return [word[:half], "##" + word[half:]]
    return [word]


def build_side(chunks: list[str], side: str, axes: list[int], dim: int) -> dict:
    words: list[str] = []
    subword_tokens: list[str] = []
    subword_to_word: list[int] = []
    vectors: list[list[float]] = []
    for chunk_idx, chunk in enumerate(chunks):
        for word in chunk.split():
            word_idx = len(words)
            words.append(word)
            for piece in split_pieces(word, side):
                subword_tokens.append(piece)
                subword_to_word.append(word_idx)
                vector = [0.0] * dim
                vector[axes[chunk_idx]] = SCALE
                vectors.append(vector)
    return {
        "words": words,
        "subword_tokens": subword_tokens,
        "subword_to_word": subword_to_word,
        "vectors": vectors,
    }


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    glossary_path = FIXTURES / "pipeline_glossary.jsonl"
    with glossary_path.open("w", encoding="utf-8") as handle:
        for source, translation in GLOSSARY:
            handle.write(
                json.dumps(
                    {"source_term": source, "language": "fr", "translation": translation},
                    ensure_ascii=False,
                )
                + "\n"
            )

    dim = max(len(segment) for segment in SEGMENTS)
    pairs = []
    for segment in SEGMENTS:
        axes = list(range(len(segment)))
        src_chunks = [src for src, _ in segment]
        tgt_chunks = [tgt for _, tgt in segment]
        pairs.append(
            {
                "src": build_side(src_chunks, "src", axes, dim),
                "tgt": build_side(tgt_chunks, "tgt", axes, dim),
            }
        )
    dump = {"format_version": 1, "layer": 8, "dim": dim, "pairs": pairs}
    dump_path = FIXTURES / "pipeline_dump.json"
    dump_path.write_text(json.dumps(dump, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {glossary_path} ({len(GLOSSARY)} entries)")
    print(f"wrote {dump_path} ({len(pairs)} pairs, dim={dim})")


if __name__ == "__main__":
    main()
