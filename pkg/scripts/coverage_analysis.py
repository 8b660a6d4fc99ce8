#!/usr/bin/env python3
"""Coverage analysis experiment: rarefaction curve plus the one-sided test.

Reads per-paper term sets (JSONL, one {"id": ..., "terms": [...]} per line)
and a reference dictionary (one term per line), draws the rarefaction curve
over the given fractions, and tests whether the mean coverage of 60% paper
subsets exceeds the threshold. Prints a JSON document.

Usage:
    python scripts/coverage_analysis.py --paper-terms papers.jsonl \
        --dictionary dict.txt [--samples 50] [--test-samples 1000] \
        [--mu0 0.8] [--seed 0]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from termforge.stats import coverage_samples, one_sample_t_one_sided, rarefaction  # noqa: E402


def load_paper_sets(path: Path) -> list[set[str]]:
    sets = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            sets.append(set(json.loads(line)["terms"]))
    return sets


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paper-terms", required=True, type=Path)
    parser.add_argument("--dictionary", required=True, type=Path)
    parser.add_argument("--fractions", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    parser.add_argument("--samples", type=int, default=50)
    parser.add_argument("--test-fraction", type=float, default=0.6)
    parser.add_argument("--test-samples", type=int, default=1000)
    parser.add_argument("--mu0", type=float, default=0.8)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    paper_sets = load_paper_sets(args.paper_terms)
    dictionary = {
        line.strip()
        for line in args.dictionary.read_text(encoding="utf-8").splitlines()
        if line.strip()
    }
    fractions = [float(f) for f in args.fractions.split(",")]

    curve = rarefaction(paper_sets, dictionary, fractions, args.samples, args.seed)
    samples = coverage_samples(
        paper_sets, dictionary, args.test_fraction, args.test_samples, args.seed
    )
    test = one_sample_t_one_sided(samples, args.mu0, "greater")

    print(
        json.dumps(
            {
                "n_papers": len(paper_sets),
                "dictionary_size": len(dictionary),
                "rarefaction": curve.to_dict(),
                "coverage_test": {
                    "fraction": args.test_fraction,
                    "n_samples": args.test_samples,
                    "mu0": args.mu0,
                    **test.to_dict(),
                },
            },
            indent=2,
            sort_keys=True,
        )
    )


if __name__ == "__main__":
    main()
