import json
import subprocess
from pathlib import Path

import pytest

from embed_dump.cli import run
from embed_dump.dump import (
    LayerOutOfRangeError,
    ModelLoadError,
    dump,
    read_pairs_tsv,
)

FIXTURES = Path(__file__).parent / "fixtures"
MODEL = str(FIXTURES / "tiny_model")
PAIRS_TSV = str(FIXTURES / "pairs_5.tsv")


@pytest.fixture(scope="module")
def committed_pairs():
    return read_pairs_tsv(PAIRS_TSV)


@pytest.fixture(scope="module")
def dump_file(committed_pairs, tmp_path_factory):
    out = tmp_path_factory.mktemp("dump") / "dump.json"
    result = dump(committed_pairs, MODEL, layer=2, out_path=out)
    return out, result


class TestPairsFile:
    def test_five_committed_pairs(self, committed_pairs):
        assert len(committed_pairs) == 5

    def test_contains_identical_sentence_pairs(self, committed_pairs):
        assert sum(1 for src, tgt in committed_pairs if src == tgt) >= 2

    def test_malformed_tsv_rejected(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("only one column\n")
        with pytest.raises(ValueError):
            read_pairs_tsv(bad)


class TestDump:
    def test_empty_input_writes_valid_file(self, tmp_path):
        out = tmp_path / "empty.json"
        result = dump([], MODEL, layer=1, out_path=out)
        assert result.pairs == ()
        payload = json.loads(out.read_text())
        assert payload["pairs"] == []
        assert payload["format_version"] == 1

    def test_identical_sentences_tokenize_identically(self, dump_file, committed_pairs):
        _, result = dump_file
        for pair, (src_text, tgt_text) in zip(result.pairs, committed_pairs):
            if src_text == tgt_text:
                assert pair["src"]["subword_tokens"] == pair["tgt"]["subword_tokens"]
                assert pair["src"]["vectors"] == pair["tgt"]["vectors"]

    def test_subword_to_word_is_nondecreasing_and_onto(self, dump_file):
        _, result = dump_file
        for pair in result.pairs:
            for side in (pair["src"], pair["tgt"]):
                word_map = side["subword_to_word"]
                assert len(word_map) == len(side["subword_tokens"])
                assert word_map[0] == 0
                assert all(b - a in (0, 1) for a, b in zip(word_map, word_map[1:]))
                assert word_map[-1] == len(side["words"]) - 1

    def test_vector_count_matches_subword_count(self, dump_file):
        _, result = dump_file
        for pair in result.pairs:
            for side in (pair["src"], pair["tgt"]):
                assert len(side["vectors"]) == len(side["subword_tokens"])
                assert all(len(v) == result.dim for v in side["vectors"])

    def test_special_tokens_excluded(self, dump_file):
        _, result = dump_file
        for pair in result.pairs:
            for side in (pair["src"], pair["tgt"]):
                assert "[CLS]" not in side["subword_tokens"]
                assert "[SEP]" not in side["subword_tokens"]

    def test_multi_piece_word_maps_to_one_word(self, dump_file):
        _, result = dump_file
        side = result.pairs[2]["src"]  # "the model translates text"
        pieces = [t for t, w in zip(side["subword_tokens"], side["subword_to_word"]) if w == 2]
        assert len(pieces) > 1

    def test_deterministic_across_runs(self, committed_pairs, tmp_path):
        a = dump(committed_pairs, MODEL, layer=2, out_path=tmp_path / "a.json")
        b = dump(committed_pairs, MODEL, layer=2, out_path=tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert a.to_dict() == b.to_dict()

    def test_layers_differ(self, committed_pairs, tmp_path):
        shallow = dump(committed_pairs[:1], MODEL, layer=0, out_path=tmp_path / "l0.json")
        deep = dump(committed_pairs[:1], MODEL, layer=2, out_path=tmp_path / "l2.json")
        assert shallow.pairs[0]["src"]["vectors"] != deep.pairs[0]["src"]["vectors"]

    def test_layer_out_of_range(self, committed_pairs, tmp_path):
        with pytest.raises(LayerOutOfRangeError):
            dump(committed_pairs, MODEL, layer=3, out_path=tmp_path / "x.json")
        with pytest.raises(LayerOutOfRangeError):
            dump(committed_pairs, MODEL, layer=-1, out_path=tmp_path / "x.json")

    def test_model_load_error(self, committed_pairs, tmp_path):
        with pytest.raises(ModelLoadError):
            dump(committed_pairs, str(tmp_path / "no_such_model"), layer=0, out_path=tmp_path / "x.json")


class TestCli:
    def test_dump_subcommand(self, tmp_path, capsys):
        out = tmp_path / "cli_dump.json"
        code = run(["dump", "--pairs", PAIRS_TSV, "--model", MODEL, "--layer", "2", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["layer"] == 2
        assert len(payload["pairs"]) == 5

    def test_bad_layer_exits_nonzero(self, tmp_path, capsys):
        code = run(["dump", "--pairs", PAIRS_TSV, "--model", MODEL, "--layer", "9", "--out", str(tmp_path / "x.json")])
        assert code == 1


class TestAlignerRoundTrip:
    """Consume the primary toolkit through its external interfaces only:
    the dump file format and the `termforge align` CLI."""

    def test_dump_loads_in_aligner_with_no_violations(self, dump_file):
        path, _ = dump_file
        proc = subprocess.run(
            ["termforge", "align", "--dump", str(path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(proc.stdout)
        assert len(payload) == 5

    def test_identical_pairs_align_nonempty_at_default_threshold(self, dump_file, committed_pairs):
        path, _ = dump_file
        proc = subprocess.run(
            ["termforge", "align", "--dump", str(path), "--threshold", "1e-4"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(proc.stdout)
        for segment, (src_text, tgt_text) in zip(payload, committed_pairs):
            if src_text == tgt_text:
                assert len(segment["links"]) > 0
