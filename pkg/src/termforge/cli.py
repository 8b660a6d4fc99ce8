"""Subcommand front-end wiring every module together.

Outputs are JSON on stdout unless --out is given; exit codes are 0 on
success, 1 on domain errors, 2 on usage errors. A JSON config file can
supply defaults for shared settings; explicit flags always win. Identical
argv, input files, and seed produce byte-identical outputs (network
subcommands excluded). Logs go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .aligner import AlignerConfig, align, load_dump
from .decoder import DecodingConstraint, LogitBoost, TableScorer, beam_search, greedy_decode
from .errors import ParseError, TermforgeError
from .glossary import lexical_stats, load_glossary, merge, save_glossary
from .matcher import find_matches, sentence_from_words, tokenize
from .metrics import evaluate
from .refiner import ClientConfig, build_refine_prompt, chat_complete
from .report import emit_report
from .stats import RatingTable, fleiss_kappa, one_sample_t_one_sided, rarefaction
from .substituter import apply_plan_detailed, plan_substitutions

log = logging.getLogger("termforge.cli")


@dataclass(frozen=True)
class AppConfig:
    """Defaults merged under explicit flags; files are checked at validation."""

    glossary_path: str | None = None
    source_lang: str = "en"
    target_lang: str | None = None
    threshold: float = 1e-4
    beam_width: int = 4
    max_len: int = 32
    base_url: str | None = None
    model_name: str | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.glossary_path and not Path(self.glossary_path).exists():
            raise ParseError(f"configured glossary {self.glossary_path!r} does not exist")
        AlignerConfig(self.threshold)


def load_config(path: str | None) -> AppConfig:
    if not path:
        return AppConfig()
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"config {path}: invalid JSON ({exc.msg})") from exc
    known = {f for f in AppConfig.__dataclass_fields__}
    unknown = set(obj) - known
    if unknown:
        raise ParseError(f"config {path}: unknown keys {sorted(unknown)}")
    cfg = AppConfig(**obj)
    cfg.validate()
    return cfg


def _tsv_cell(value) -> str:
    if isinstance(value, str):
        return value.replace("\t", "\\t").replace("\n", "\\n")
    return json.dumps(value, ensure_ascii=False, sort_keys=True)


def _to_tsv(payload) -> str:
    """Flat TSV fallback: dicts as key/value rows, lists of dicts as a table.

    Nested values are JSON-encoded in place, keeping the output line-oriented
    for shell pipelines.
    """
    if isinstance(payload, dict):
        lines = [f"{key}\t{_tsv_cell(value)}" for key, value in sorted(payload.items())]
    elif isinstance(payload, list) and payload and all(isinstance(r, dict) for r in payload):
        keys = sorted({key for row in payload for key in row})
        lines = ["\t".join(keys)]
        lines += ["\t".join(_tsv_cell(row.get(key)) for key in keys) for row in payload]
    else:
        lines = [_tsv_cell(payload)]
    return "\n".join(lines) + "\n"


def _emit(payload, args) -> None:
    if getattr(args, "output_format", "json") == "tsv":
        text = _to_tsv(payload)
    else:
        text = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_lines(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _pick(flag_value, config_value, fallback=None):
    if flag_value is not None:
        return flag_value
    if config_value is not None:
        return config_value
    return fallback


# --- subcommand handlers ------------------------------------------------------


def _cmd_glossary(args, cfg: AppConfig) -> None:
    if args.glossary_cmd == "validate":
        glossary = load_glossary(args.infile, args.format)
        _emit(
            {
                "ok": True,
                "entries": len(glossary),
                "languages": list(glossary.languages()),
            },
            args,
        )
    elif args.glossary_cmd == "stats":
        glossary = load_glossary(args.infile, args.format)
        language = _pick(args.lang, cfg.target_lang)
        if language is None:
            raise ParseError("glossary stats needs --lang (or target_lang in the config)")
        _emit(lexical_stats(glossary, language).to_dict(), args)
    elif args.glossary_cmd == "merge":
        base = load_glossary(args.base)
        other = load_glossary(args.other)
        merged = merge(base, other, args.policy)
        if args.merged_out:
            save_glossary(merged, args.merged_out)
        _emit(
            {
                "entries": len(merged),
                "base_entries": len(base),
                "other_entries": len(other),
                "out": args.merged_out,
            },
            args,
        )


def _cmd_match(args, cfg: AppConfig) -> None:
    glossary = load_glossary(_require(args.glossary or cfg.glossary_path, "--glossary"))
    language = _require(args.lang or cfg.target_lang, "--lang")
    if args.text is not None:
        lines = [args.text]
    else:
        lines = _read_lines(_require(args.src, "--src or --text"))
    out = []
    for line in lines:
        sentence = tokenize(line, cfg.source_lang)
        matches = find_matches(sentence, glossary, language)
        out.append(
            {
                "text": line,
                "matches": [
                    {
                        "source_term": m.entry.source_term,
                        "translation": m.entry.translation,
                        "word_range": list(m.word_range),
                        "surface": m.surface,
                    }
                    for m in matches
                ],
            }
        )
    _emit(out, args)


def _cmd_align(args, cfg: AppConfig) -> None:
    dump = load_dump(args.dump)
    aligner_cfg = AlignerConfig(threshold=_pick(args.threshold, None, cfg.threshold))
    out = []
    for pair in dump.pairs:
        alignment = align(pair.src, pair.tgt, aligner_cfg)
        out.append(
            {
                "src_words": list(pair.src_words),
                "tgt_words": list(pair.tgt_words),
                "links": [list(link) for link in alignment.sorted_links()],
            }
        )
    _emit(out, args)


def _cmd_substitute(args, cfg: AppConfig) -> None:
    dump = load_dump(args.dump)
    glossary = load_glossary(_require(args.glossary or cfg.glossary_path, "--glossary"))
    language = _require(args.lang or cfg.target_lang, "--lang")
    aligner_cfg = AlignerConfig(threshold=_pick(args.threshold, None, cfg.threshold))
    segments = []
    for pair in dump.pairs:
        src_sentence = sentence_from_words(pair.src_words, cfg.source_lang)
        tgt_sentence = sentence_from_words(pair.tgt_words, language)
        matches = find_matches(src_sentence, glossary, language)
        alignment = align(pair.src, pair.tgt, aligner_cfg)
        plan = plan_substitutions(matches, alignment, tgt_sentence, glossary, language)
        substituted, spans = apply_plan_detailed(tgt_sentence, plan)
        segments.append(
            {
                "source": src_sentence.text,
                "direct": tgt_sentence.text,
                "substituted": substituted,
                "edits": [
                    {
                        "target_word_range": list(e.tgt_word_range),
                        "replacement": e.replacement,
                        "source_term": e.term.source_term,
                    }
                    for e in sorted(plan.edits, key=lambda e: e.tgt_word_range[0])
                ],
                "highlights": [list(span) for span in spans],
                "warnings": list(plan.warnings),
            }
        )
    _emit({"language": language, "segments": segments}, args)


def _cmd_refine(args, cfg: AppConfig) -> None:
    glossary = load_glossary(_require(args.glossary or cfg.glossary_path, "--glossary"))
    language = _require(args.lang or cfg.target_lang, "--lang")
    src_lines = _read_lines(args.src)
    mt_lines = _read_lines(args.mt)
    if len(src_lines) != len(mt_lines):
        raise ParseError(
            f"--src has {len(src_lines)} lines but --mt has {len(mt_lines)}"
        )
    client_cfg = None
    if args.send:
        base_url = _require(args.base_url or cfg.base_url, "--base-url")
        model_name = _require(args.model or cfg.model_name, "--model")
        client_cfg = ClientConfig(base_url=base_url, model_name=model_name)
    out = []
    for src_line, mt_line in zip(src_lines, mt_lines):
        sentence = tokenize(src_line, cfg.source_lang)
        matches = find_matches(sentence, glossary, language)
        terms = [(m.entry.source_term, m.entry.translation) for m in matches]
        prompt = build_refine_prompt(src_line, mt_line, terms, cfg.source_lang, language)
        record = {
            "source": src_line,
            "initial": mt_line,
            "terms": [list(t) for t in terms],
        }
        if client_cfg is not None:
            record["refined"] = chat_complete(client_cfg, prompt)
        else:
            record["prompt"] = prompt.rendered_text
        out.append(record)
    _emit(out, args)


def _parse_factor(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _cmd_decode_demo(args, cfg: AppConfig) -> None:
    scorer = TableScorer.from_json(args.scorer)
    boost = None
    if args.boost_ids:
        boost = LogitBoost(
            token_ids=frozenset(int(t) for t in args.boost_ids.split(",")),
            factor=_parse_factor(args.boost_factor),
            mode=args.boost_mode,
        )
    max_len = _pick(args.max_len, None, cfg.max_len)
    if args.greedy:
        tokens = greedy_decode(scorer, boost, max_len)
        _emit({"mode": "greedy", "tokens": list(tokens)}, args)
        return
    phrases = tuple(
        tuple(int(t) for t in phrase.split(",")) for phrase in (args.constraint or [])
    )
    constraint = DecodingConstraint(phrases=phrases)
    beam = _pick(args.beam, None, cfg.beam_width)
    tokens = beam_search(scorer, constraint, beam, max_len)
    _emit(
        {
            "mode": "beam",
            "beam_width": beam,
            "constraints": [list(p) for p in phrases],
            "tokens": list(tokens),
        },
        args,
    )


def _cmd_evaluate(args, cfg: AppConfig) -> None:
    hyps = _read_lines(args.hyp)
    refs = _read_lines(args.ref)
    language = args.lang or cfg.target_lang or "en"
    report = evaluate(hyps, refs, language, comet=args.comet)
    _emit(report.to_dict(), args)


def _cmd_agreement(args, cfg: AppConfig) -> None:
    rows: list[list[int]] = []
    with open(args.infile, newline="", encoding="utf-8") as handle:
        for row in csv.reader(handle):
            if not row or not any(cell.strip() for cell in row):
                continue
            try:
                rows.append([int(cell) for cell in row])
            except ValueError as exc:
                raise ParseError(f"{args.infile}: non-integer cell ({exc})") from exc
    try:
        table = RatingTable.from_rows(rows)
    except ValueError as exc:
        raise ParseError(f"{args.infile}: {exc}") from exc
    _emit(
        {
            "fleiss_kappa": fleiss_kappa(table),
            "n_items": table.n_items,
            "n_categories": table.n_categories,
            "n_raters": table.n_raters,
        },
        args,
    )


def _load_paper_term_sets(path: str) -> list[set[str]]:
    sets: list[set[str]] = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict) or "terms" not in obj:
            raise ParseError(f"{path}:{lineno}: expected an object with a 'terms' array")
        sets.append({str(t) for t in obj["terms"]})
    return sets


def _cmd_rarefy(args, cfg: AppConfig) -> None:
    paper_sets = _load_paper_term_sets(args.paper_terms)
    dictionary = {line.strip() for line in _read_lines(args.dictionary) if line.strip()}
    fractions = [float(f) for f in args.fractions.split(",")]
    seed = _pick(args.seed, None, cfg.seed)
    result = rarefaction(paper_sets, dictionary, fractions, args.samples, seed)
    payload = result.to_dict()
    if args.test_mu0 is not None:
        values = None
        for point in result.points:
            if abs(point.fraction - args.test_fraction) < 1e-9:
                values = point
        from .stats import coverage_samples

        frac_idx = sorted({p.fraction for p in result.points}).index(args.test_fraction) if values else 0
        samples = coverage_samples(
            paper_sets, dictionary, args.test_fraction, args.samples, seed, frac_idx
        )
        payload["coverage_test"] = one_sample_t_one_sided(
            samples, args.test_mu0, "greater"
        ).to_dict()
    _emit(payload, args)


def _cmd_report(args, cfg: AppConfig) -> None:
    if args.pipeline:
        payload = json.loads(Path(args.pipeline).read_text(encoding="utf-8"))
        segments = payload["segments"]
        src = [s["source"] for s in segments]
        direct = [s["direct"] for s in segments]
        refined = [s["substituted"] for s in segments]
        highlights = [[tuple(span) for span in s.get("highlights", [])] for s in segments]
    else:
        src = _read_lines(_require(args.src, "--src"))
        direct = _read_lines(_require(args.direct, "--direct"))
        refined = _read_lines(_require(args.refined, "--refined"))
        highlights = None
    html = emit_report(src, direct, refined, highlights)
    Path(args.out_html).write_text(html, encoding="utf-8")
    _emit({"segments": len(src), "out": args.out_html}, args)


def _require(value, flag: str):
    if value is None:
        raise ParseError(f"missing required option {flag}")
    return value


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="termforge",
        description="Glossary-constrained machine translation post-editing toolkit",
    )
    parser.add_argument("--version", action="version", version=f"termforge {__version__}")
    parser.add_argument("--config", help="JSON config file with default settings")
    parser.add_argument("--out", help="write JSON output to this path instead of stdout")
    parser.add_argument(
        "--format",
        dest="output_format",
        choices=("json", "tsv"),
        default="json",
        help="output rendering (flat TSV fallback for shell pipelines)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    # --out is also accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering a value given at the top level
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="write JSON output to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p_glossary = sub.add_parser("glossary", help="validate, inspect, or merge glossaries")
    gsub = p_glossary.add_subparsers(dest="glossary_cmd", required=True)
    p_validate = gsub.add_parser("validate", parents=[common])
    p_validate.add_argument("--in", dest="infile", required=True)
    p_validate.add_argument("--format", choices=("jsonl", "tsv"))
    p_stats = gsub.add_parser("stats", parents=[common])
    p_stats.add_argument("--in", dest="infile", required=True)
    p_stats.add_argument("--format", choices=("jsonl", "tsv"))
    p_stats.add_argument("--lang")
    p_merge = gsub.add_parser("merge", parents=[common])
    p_merge.add_argument("--base", required=True)
    p_merge.add_argument("--other", required=True)
    p_merge.add_argument(
        "--policy",
        choices=("prefer_base", "prefer_other", "error_on_conflict"),
        default="prefer_base",
    )
    p_merge.add_argument("--merged-out", help="write the merged glossary here")

    p_match = sub.add_parser("match", parents=[common], help="locate glossary terms in source text")
    p_match.add_argument("--glossary")
    p_match.add_argument("--lang")
    p_match.add_argument("--text")
    p_match.add_argument("--src", help="file with one segment per line")

    p_align = sub.add_parser("align", parents=[common], help="word-align an embedding dump")
    p_align.add_argument("--dump", required=True)
    p_align.add_argument("--threshold", type=float)

    p_sub = sub.add_parser("substitute", parents=[common], help="term substitution via word alignment")
    p_sub.add_argument("--dump", required=True)
    p_sub.add_argument("--glossary")
    p_sub.add_argument("--lang")
    p_sub.add_argument("--threshold", type=float)

    p_refine = sub.add_parser("refine", parents=[common], help="build or send terminology refinement prompts")
    p_refine.add_argument("--glossary")
    p_refine.add_argument("--lang")
    p_refine.add_argument("--src", required=True)
    p_refine.add_argument("--mt", required=True)
    p_refine.add_argument("--send", action="store_true", help="call the endpoint (default: emit prompts)")
    p_refine.add_argument("--base-url")
    p_refine.add_argument("--model")

    p_decode = sub.add_parser("decode-demo", parents=[common], help="toy constrained/boosted decoding")
    p_decode.add_argument("--scorer", required=True, help="JSON prefix->logits table")
    p_decode.add_argument("--constraint", action="append", help="comma-separated token ids; repeatable")
    p_decode.add_argument("--beam", type=int)
    p_decode.add_argument("--max-len", type=int)
    p_decode.add_argument("--greedy", action="store_true")
    p_decode.add_argument("--boost-ids", help="comma-separated token ids to boost")
    p_decode.add_argument("--boost-factor", default="10/7", help="factor, e.g. 10/7 or 1.25")
    p_decode.add_argument("--boost-mode", choices=("multiplicative", "additive"), default="multiplicative")

    p_eval = sub.add_parser("evaluate", parents=[common], help="BLEU/ChrF/ChrF++/TER over line files")
    p_eval.add_argument("--hyp", required=True)
    p_eval.add_argument("--ref", required=True)
    p_eval.add_argument("--lang")
    p_eval.add_argument("--comet", type=float, help="externally computed COMET for display")

    p_agree = sub.add_parser("agreement", parents=[common], help="Fleiss' kappa from a ratings CSV")
    p_agree.add_argument("--in", dest="infile", required=True)

    p_rarefy = sub.add_parser("rarefy", parents=[common], help="terminology coverage rarefaction")
    p_rarefy.add_argument("--paper-terms", required=True, help="JSONL with a 'terms' array per paper")
    p_rarefy.add_argument("--dictionary", required=True, help="one term per line")
    p_rarefy.add_argument("--fractions", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p_rarefy.add_argument("--samples", type=int, default=50)
    p_rarefy.add_argument("--seed", type=int)
    p_rarefy.add_argument("--test-mu0", type=float, help="also run a one-sided coverage test")
    p_rarefy.add_argument("--test-fraction", type=float, default=0.6)

    p_report = sub.add_parser("report", parents=[common], help="side-by-side HTML report")
    p_report.add_argument("--pipeline", help="JSON produced by the substitute subcommand")
    p_report.add_argument("--src")
    p_report.add_argument("--direct")
    p_report.add_argument("--refined")
    p_report.add_argument("--out-html", required=True)

    return parser


_HANDLERS = {
    "glossary": _cmd_glossary,
    "match": _cmd_match,
    "align": _cmd_align,
    "substitute": _cmd_substitute,
    "refine": _cmd_refine,
    "decode-demo": _cmd_decode_demo,
    "evaluate": _cmd_evaluate,
    "agreement": _cmd_agreement,
    "rarefy": _cmd_rarefy,
    "report": _cmd_report,
}


def run(argv: list[str]) -> int:
    """Dispatch a command line; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(
        stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.WARNING
    )
    try:
        cfg = load_config(args.config)
        _HANDLERS[args.command](args, cfg)
    except TermforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
