import json
import math
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termforge.errors import (
    ConflictError,
    DuplicateKeyError,
    EmptyFieldError,
    NoEntriesError,
    ParseError,
)
from termforge.glossary import (
    Glossary,
    GlossaryEntry,
    lexical_stats,
    load_glossary,
    merge,
    save_glossary,
)


def entry(term, lang="fr", translation="t", **kw):
    return GlossaryEntry(source_term=term, language=lang, translation=translation, **kw)


class TestLoad:
    def test_single_valid_jsonl_line(self, tmp_path):
        path = tmp_path / "g.jsonl"
        path.write_text(
            '{"source_term":"beam search","language":"fr","translation":"recherche en faisceau"}\n'
        )
        glossary = load_glossary(path, "jsonl")
        assert len(glossary) == 1
        assert glossary.entries[0].provenance == "external"

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "g.jsonl"
        line = '{"source_term":"beam search","language":"fr","translation":"x"}\n'
        path.write_text(line + line)
        with pytest.raises(DuplicateKeyError):
            load_glossary(path)

    def test_empty_file_is_empty_glossary(self, tmp_path):
        path = tmp_path / "g.jsonl"
        path.write_text("")
        assert len(load_glossary(path)) == 0

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "g.jsonl"
        path.write_text('{"source_term":"a","language":"fr","translation":"b"}\nnot json\n')
        with pytest.raises(ParseError, match=":2"):
            load_glossary(path)

    def test_empty_translation_rejected(self, tmp_path):
        path = tmp_path / "g.jsonl"
        path.write_text('{"source_term":"a","language":"fr","translation":"  "}\n')
        with pytest.raises(EmptyFieldError):
            load_glossary(path)

    def test_too_many_contexts_rejected(self, tmp_path):
        path = tmp_path / "g.jsonl"
        obj = {"source_term": "a", "language": "fr", "translation": "b", "contexts": ["1", "2", "3", "4"]}
        path.write_text(json.dumps(obj) + "\n")
        with pytest.raises(ParseError):
            load_glossary(path)

    def test_tsv_wrong_column_count(self, tmp_path):
        path = tmp_path / "g.tsv"
        path.write_text("a\tfr\tb\n")
        with pytest.raises(ParseError, match=":1"):
            load_glossary(path)


class TestLookup:
    def test_hit_and_miss(self):
        g = Glossary([entry("beam search", translation="recherche en faisceau")])
        assert g.lookup("beam search", "fr").translation == "recherche en faisceau"
        assert g.lookup("beam search", "zh") is None
        assert g.lookup("missing", "fr") is None

    def test_nfd_input_found_via_nfc_normalization(self):
        g = Glossary([entry("caf\u00e9 model")])  # NFC e-acute
        nfd = unicodedata.normalize("NFD", "caf\u00e9 model")
        assert nfd != "caf\u00e9 model"
        assert g.lookup(nfd, "fr") is not None

    def test_whitespace_collapse_on_lookup(self):
        g = Glossary([entry("beam search")])
        assert g.lookup("beam   search", " FR ") is not None


class TestMerge:
    def test_disjoint_union_counts(self):
        a = Glossary([entry("alpha"), entry("beta")])
        b = Glossary([entry("gamma")])
        assert len(merge(a, b, "prefer_base")) == 3

    def test_same_translation_deduplicates(self):
        a = Glossary([entry("alpha", translation="x")])
        b = Glossary([entry("alpha", translation="x")])
        merged = merge(a, b, "error_on_conflict")
        assert len(merged) == 1
        assert merged.entries[0].provenance == "external"

    def test_prefer_other_keeps_other_translation_with_merged_provenance(self):
        a = Glossary([entry("alpha", translation="x")])
        b = Glossary([entry("alpha", translation="y")])
        merged = merge(a, b, "prefer_other")
        got = merged.lookup("alpha", "fr")
        assert got.translation == "y"
        assert got.provenance == "merged"

    def test_prefer_base_keeps_base_translation_with_merged_provenance(self):
        a = Glossary([entry("alpha", translation="x")])
        b = Glossary([entry("alpha", translation="y")])
        got = merge(a, b, "prefer_base").lookup("alpha", "fr")
        assert got.translation == "x"
        assert got.provenance == "merged"

    def test_error_on_conflict(self):
        a = Glossary([entry("alpha", translation="x")])
        b = Glossary([entry("alpha", translation="y")])
        with pytest.raises(ConflictError):
            merge(a, b, "error_on_conflict")

    @pytest.mark.parametrize("policy", ["prefer_base", "prefer_other", "error_on_conflict"])
    def test_merge_with_empty_is_identity(self, policy):
        g = Glossary([entry("alpha"), entry("beta", lang="zh", translation="x")])
        empty = Glossary()
        assert merge(g, empty, policy) == g
        assert merge(empty, g, policy) == g


_term_text = st.text(
    alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd")), min_size=1, max_size=8
)


@st.composite
def glossaries(draw, max_entries=8):
    n = draw(st.integers(0, max_entries))
    entries = []
    seen = set()
    for _ in range(n):
        term = draw(_term_text)
        lang = draw(st.sampled_from(["ar", "zh", "fr", "ja", "ru"]))
        if (lang, term) in seen:
            continue
        seen.add((lang, term))
        entries.append(
            GlossaryEntry(
                source_term=term,
                language=lang,
                translation=draw(_term_text),
                contexts=tuple(draw(st.lists(_term_text, max_size=3))),
                domains=tuple(draw(st.lists(_term_text, max_size=2))),
                provenance=draw(st.sampled_from(["extracted", "external", "merged"])),
            )
        )
    return Glossary(entries)


class TestRoundTrip:
    @settings(max_examples=50, deadline=None)
    @given(g=glossaries())
    def test_jsonl_round_trip_identity(self, tmp_path_factory, g):
        path = tmp_path_factory.mktemp("rt") / "g.jsonl"
        save_glossary(g, path, "jsonl")
        assert load_glossary(path, "jsonl") == g

    @settings(max_examples=50, deadline=None)
    @given(g=glossaries())
    def test_tsv_round_trip_identity_on_flat_entries(self, tmp_path_factory, g):
        flat = Glossary(
            GlossaryEntry(
                source_term=e.source_term,
                language=e.language,
                translation=e.translation,
                provenance=e.provenance,
            )
            for e in g
        )
        path = tmp_path_factory.mktemp("rt") / "g.tsv"
        save_glossary(flat, path, "tsv")
        assert load_glossary(path, "tsv") == flat

    def test_tsv_escaping_survives_backslashes(self, tmp_path):
        g = Glossary([entry("path C:\\temp", translation="x\\ny")])
        path = tmp_path / "g.tsv"
        save_glossary(g, path, "tsv")
        assert load_glossary(path, "tsv") == g


class TestLexicalStats:
    def test_hand_counted_example(self):
        g = Glossary(
            [
                GlossaryEntry("beam search", "fr", "X Y"),
                GlossaryEntry("gradient", "fr", "Z"),
            ]
        )
        stats = lexical_stats(g, "fr")
        assert stats.n_terms == 2
        assert stats.src_words_per_term.mean == pytest.approx(1.5)
        assert stats.tgt_words_per_term.mean == pytest.approx(1.5)
        assert stats.unique_src_words == 3
        assert stats.unique_tgt_words == 3

    def test_single_entry_has_zero_stddev(self):
        g = Glossary([entry("beam search", translation="recherche")])
        stats = lexical_stats(g, "fr")
        assert stats.src_words_per_term.std == 0.0
        assert stats.tgt_chars_per_term.std == 0.0

    def test_no_entries_for_language(self):
        g = Glossary([entry("beam search")])
        with pytest.raises(NoEntriesError):
            lexical_stats(g, "zh")

    def test_chars_exclude_spaces(self):
        g = Glossary([entry("beam search", translation="a b")])
        stats = lexical_stats(g, "fr")
        assert stats.src_chars_per_term.mean == pytest.approx(10.0)
        assert stats.tgt_chars_per_term.mean == pytest.approx(2.0)

    @settings(max_examples=40, deadline=None)
    @given(glossaries(max_entries=12))
    def test_matches_brute_force_recomputation(self, g):
        from termforge.matcher import tokenize

        for lang in g.languages():
            entries = [e for e in g if e.language == lang]
            stats = lexical_stats(g, lang)
            src_counts = [len(tokenize(e.source_term).words) for e in entries]
            mean = sum(src_counts) / len(src_counts)
            var = sum((c - mean) ** 2 for c in src_counts) / len(src_counts)
            assert abs(stats.src_words_per_term.mean - mean) < 1e-12
            assert abs(stats.src_words_per_term.std - math.sqrt(var)) < 1e-12
            chars = [sum(1 for ch in e.translation if not ch.isspace()) for e in entries]
            cmean = sum(chars) / len(chars)
            assert abs(stats.tgt_chars_per_term.mean - cmean) < 1e-12
