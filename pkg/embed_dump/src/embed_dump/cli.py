"""Command-line entry: `embed-dump dump --pairs pairs.tsv --layer 8 --out dump.json`."""

from __future__ import annotations

import argparse
import sys

from .dump import LayerOutOfRangeError, ModelLoadError, dump, read_pairs_tsv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-dump",
        description="Export per-subword encoder hidden states for word alignment",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_dump = sub.add_parser("dump", help="encode sentence pairs into a dump file")
    p_dump.add_argument("--pairs", required=True, help="TSV with source<TAB>target per line")
    p_dump.add_argument("--model", default="bert-base-multilingual-cased",
                        help="Hugging Face model id or local path")
    p_dump.add_argument("--layer", type=int, required=True,
                        help="hidden layer to export (0 = embeddings)")
    p_dump.add_argument("--out", required=True)
    return parser


def run(argv: list[str]) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        pairs = read_pairs_tsv(args.pairs)
        result = dump(pairs, args.model, args.layer, args.out)
    except (ModelLoadError, LayerOutOfRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}: {len(result.pairs)} pairs, layer {result.layer}, dim {result.dim}")
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
