"""Dump tokenizations, subword-to-word maps, and per-subword hidden states.

Runs sentence pairs through a masked-LM encoder (any Hugging Face model id or
local path) and writes the portable JSON container consumed by the alignment
toolkit:

    {"format_version": 1, "layer": L, "dim": D,
     "pairs": [{"src": {words, subword_tokens, subword_to_word, vectors},
                "tgt": {...}}, ...]}

Words are the whitespace tokens of the input line (pre-segment no-space
scripts upstream). Sequence-delimiter special tokens are excluded so subword
indices map cleanly onto words. The run is deterministic for a given model
and inputs: eval mode, no dropout, no sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

FORMAT_VERSION = 1


class ModelLoadError(Exception):
    """The encoder or its tokenizer could not be loaded."""


class LayerOutOfRangeError(Exception):
    """Requested hidden layer does not exist in the encoder."""


@dataclass(frozen=True)
class DumpFile:
    format_version: int
    layer: int
    dim: int
    pairs: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "layer": self.layer,
            "dim": self.dim,
            "pairs": list(self.pairs),
        }


def _load_model(model_id: str):
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:  # transformers raises a zoo of types here
        raise ModelLoadError(f"could not load {model_id!r}: {exc}") from exc
    model.eval()
    torch.set_grad_enabled(False)
    return tokenizer, model


def _encode_side(text: str, tokenizer, model, layer: int) -> dict:
    import torch

    words = text.split()
    if not words:
        return {"words": [], "subword_tokens": [], "subword_to_word": [], "vectors": []}
    encoded = tokenizer(words, is_split_into_words=True, return_tensors="pt", truncation=True)
    word_ids = encoded.word_ids()
    with torch.no_grad():
        output = model(**encoded, output_hidden_states=True)
    hidden = output.hidden_states[layer][0]

    subword_tokens: list[str] = []
    subword_to_word: list[int] = []
    vectors: list[list[float]] = []
    all_tokens = tokenizer.convert_ids_to_tokens(encoded["input_ids"][0])
    for position, word_id in enumerate(word_ids):
        if word_id is None:
            continue  # sequence delimiters stay out of the dump
        subword_tokens.append(all_tokens[position])
        subword_to_word.append(word_id)
        vectors.append([float(v) for v in hidden[position]])

    covered = set(subword_to_word)
    missing = [i for i in range(len(words)) if i not in covered]
    if missing:
        raise ValueError(
            f"tokenizer produced no subwords for words {missing} of {text!r}; "
            "the dump would not map onto the word list"
        )
    return {
        "words": words,
        "subword_tokens": subword_tokens,
        "subword_to_word": subword_to_word,
        "vectors": vectors,
    }


def dump(
    sentence_pairs: list[tuple[str, str]],
    model_id: str,
    layer: int,
    out_path: str | Path,
) -> DumpFile:
    """Encode every pair at the given hidden layer and write the dump file.

    ``layer`` indexes the encoder's hidden states: 0 is the embedding output,
    1..num_hidden_layers the transformer layers.
    """
    tokenizer, model = _load_model(model_id)
    n_layers = int(model.config.num_hidden_layers)
    if not (0 <= layer <= n_layers):
        raise LayerOutOfRangeError(
            f"layer {layer} outside 0..{n_layers} for {model_id!r}"
        )
    pairs = []
    for src_text, tgt_text in sentence_pairs:
        pairs.append(
            {
                "src": _encode_side(src_text, tokenizer, model, layer),
                "tgt": _encode_side(tgt_text, tokenizer, model, layer),
            }
        )
    dims = {
        len(vec)
        for pair in pairs
        for side in (pair["src"], pair["tgt"])
        for vec in side["vectors"]
    }
    dim = dims.pop() if len(dims) == 1 else int(model.config.hidden_size)
    result = DumpFile(
        format_version=FORMAT_VERSION, layer=layer, dim=dim, pairs=tuple(pairs)
    )
    out_path = Path(out_path)
    out_path.write_text(
        json.dumps(result.to_dict(), ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return result


def read_pairs_tsv(path: str | Path) -> list[tuple[str, str]]:
    """Read sentence pairs from a 2-column TSV (source <TAB> target)."""
    pairs: list[tuple[str, str]] = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        columns = line.split("\t")
        if len(columns) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 tab-separated columns")
        pairs.append((columns[0], columns[1]))
    return pairs
