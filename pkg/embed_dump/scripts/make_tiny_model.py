#!/usr/bin/env python3
"""Regenerate the committed tiny encoder used by the offline test suite.

Builds a 2-layer, 32-dim BERT-style model with deterministic (seeded) random
weights and a WordPiece vocabulary covering the committed sentence pairs,
and saves both under tests/fixtures/tiny_model/. The weights are meaningless
linguistically; the tests only need a real encoder interface with stable
outputs.
"""

from __future__ import annotations

from pathlib import Path

import torch
from transformers import BertConfig, BertModel, BertTokenizerFast

ROOT = Path(__file__).resolve().parents[1]
TARGET = ROOT / "tests" / "fixtures" / "tiny_model"

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "beam", "search", "decoder", "works",
    "a", "neural", "network", "learns",
    "model", "text", "le", "traduit", "texte",
    "gradient", "descent", "updates", "weights",
    "attention", "improves", "translation", "quality",
    "l", "la", "de", "ameliore", "qualite", "modele",
    "trans", "##late", "##s",
]


def main() -> None:
    TARGET.mkdir(parents=True, exist_ok=True)
    vocab_file = TARGET / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")

    tokenizer = BertTokenizerFast({token: i for i, token in enumerate(VOCAB)}, do_lower_case=True)
    assert tokenizer.tokenize("the translates") == ["the", "trans", "##late", "##s"]
    tokenizer.save_pretrained(TARGET)

    torch.manual_seed(20240608)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    model = BertModel(config)
    model.eval()
    model.save_pretrained(TARGET)
    print(f"wrote tiny model to {TARGET}")


if __name__ == "__main__":
    main()
