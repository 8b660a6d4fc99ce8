import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termforge.ingest import (
    Chunk,
    TermCandidate,
    build_domain_prompt,
    build_extract_prompt,
    build_filter_prompt,
    chunk_text,
    ends_in_function_word,
    filter_candidates,
    is_abbreviation,
    parse_domain_response,
    parse_term_list_response,
    record_contexts,
    split_sentences,
)


def words(n, prefix="w"):
    return " ".join(f"{prefix}{i}" for i in range(n))


def candidate(term, docs=("d1", "d2"), contexts=()):
    return TermCandidate(term=term, doc_ids=frozenset(docs), contexts=tuple(contexts))


class TestChunker:
    def test_empty_input(self):
        assert chunk_text([]) == []

    def test_greedy_packing_60_30(self):
        chunks = chunk_text([words(30), words(30), words(30)])
        assert [c.word_count for c in chunks] == [60, 30]

    def test_overlong_sentence_split_64_64_2(self):
        chunks = chunk_text([words(130)])
        assert [c.word_count for c in chunks] == [64, 64, 2]

    def test_sentence_exactly_at_limit(self):
        chunks = chunk_text([words(64), words(1)])
        assert [c.word_count for c in chunks] == [64, 1]

    def test_concatenation_reproduces_word_stream(self):
        sentences = [words(10, "a"), words(70, "b"), words(5, "c")]
        chunks = chunk_text(sentences)
        stream = [w for s in sentences for w in s.split()]
        rebuilt = [w for c in chunks for w in c.text.split()]
        assert rebuilt == stream

    def test_indices_are_sequential(self):
        chunks = chunk_text([words(50), words(50), words(50)])
        assert [c.index for c in chunks] == list(range(len(chunks)))

    @settings(max_examples=80, deadline=None)
    @given(data=st.data())
    def test_random_documents_cap_and_stream(self, data):
        n_sentences = data.draw(st.integers(0, 12))
        sizes = data.draw(
            st.lists(st.integers(0, 90), min_size=n_sentences, max_size=n_sentences)
        )
        sentences = [words(n, f"s{i}_") for i, n in enumerate(sizes)]
        chunks = chunk_text(sentences)
        assert all(c.word_count <= 64 for c in chunks)
        stream = [w for s in sentences for w in s.split()]
        rebuilt = [w for c in chunks for w in c.text.split()]
        assert rebuilt == stream

    def test_chunk_invariant_enforced(self):
        with pytest.raises(ValueError):
            Chunk(text=words(65), word_count=65, source_doc="d", index=0)


class TestSplitSentences:
    def test_basic(self):
        got = split_sentences("One sentence. Two sentences! Three? Yes.")
        assert got == ["One sentence.", "Two sentences!", "Three?", "Yes."]

    def test_empty(self):
        assert split_sentences("   ") == []


class TestFilterCascade:
    def test_single_paper_dropped(self):
        kept, dropped = filter_candidates([candidate("neural network", docs=("d1",))])
        assert kept == []
        assert dropped[0][1] == "single_paper"

    def test_abbreviation_dropped(self):
        kept, dropped = filter_candidates([candidate("CNN")])
        assert kept == []
        assert dropped[0][1] == "abbreviation"

    def test_dotted_abbreviation_dropped(self):
        _, dropped = filter_candidates([candidate("U.S.")])
        assert dropped[0][1] == "abbreviation"

    def test_special_char_start_dropped(self):
        _, dropped = filter_candidates([candidate("-gram model")])
        assert dropped[0][1] == "special_char"

    def test_case_duplicates_collapse(self):
        kept, dropped = filter_candidates(
            [candidate("Beam Search"), candidate("beam search")]
        )
        assert [c.term for c in kept] == ["Beam Search"]
        assert dropped[0][1] == "duplicate"

    def test_partition_is_lossless_and_disjoint(self):
        cands = [
            candidate("neural network"),
            candidate("CNN"),
            candidate("one-paper term", docs=("d1",)),
            candidate("Neural Network"),
            candidate("#hash"),
        ]
        kept, dropped = filter_candidates(cands)
        assert len(kept) + len(dropped) == len(cands)
        kept_ids = {id(c) for c in kept}
        dropped_ids = {id(c) for c, _ in dropped}
        assert kept_ids.isdisjoint(dropped_ids)

    def test_filtering_is_idempotent(self):
        rng = random.Random(4)
        pool = ["neural net", "CNN", "beam search", "Beam Search", "x", "-y", "U.S."]
        cands = [
            candidate(rng.choice(pool), docs=tuple(f"d{i}" for i in range(rng.randint(1, 3))))
            for _ in range(20)
        ]
        kept, _ = filter_candidates(cands)
        kept_again, dropped_again = filter_candidates(kept)
        assert kept_again == kept
        assert dropped_again == []

    def test_abbreviation_heuristic_bounds(self):
        assert is_abbreviation("CNN")
        assert is_abbreviation("LSTMGR")  # six caps
        assert not is_abbreviation("SEVENCAPS")
        assert not is_abbreviation("Cnn")
        assert not is_abbreviation("beam")

    def test_function_word_rule_helper(self):
        assert ends_in_function_word("state of the")
        assert not ends_in_function_word("beam search")


class TestRecordContexts:
    def chunk(self, i):
        return Chunk(text=f"context {i}", word_count=2, source_doc="d", index=i)

    def test_append_first_context(self):
        cand = record_contexts(candidate("t"), self.chunk(0))
        assert len(cand.contexts) == 1

    def test_cap_at_three(self):
        cand = candidate("t", contexts=(self.chunk(0), self.chunk(1), self.chunk(2)))
        assert record_contexts(cand, self.chunk(3)) is cand

    def test_duplicate_chunk_ignored(self):
        cand = candidate("t", contexts=(self.chunk(0),))
        assert record_contexts(cand, self.chunk(0)) is cand


class TestPrompts:
    def test_extract_prompt_contains_chunk_verbatim(self):
        chunk = Chunk(text="the beam search decoder", word_count=4, source_doc="d", index=0)
        prompt = build_extract_prompt(chunk)
        assert chunk.text in prompt.rendered_text
        assert prompt.template_id == "extract_terms"

    def test_extract_response_parses_two_terms(self):
        assert parse_term_list_response("term1; term2") == ["term1", "term2"]

    def test_empty_response_parses_to_zero(self):
        assert parse_term_list_response("") == []
        assert parse_term_list_response("  ;  ") == []

    def test_filter_prompt_lists_terms(self):
        prompt = build_filter_prompt(["alpha", "beta"])
        assert "alpha; beta" in prompt.rendered_text

    def test_domain_prompt_renders_taxonomy_plus_other(self):
        taxonomy = ["Statistics", "Math", "CS", "NLP", "DS", "CV"]
        prompt = build_domain_prompt("beam search", taxonomy)
        lines = [l for l in prompt.fields["taxonomy_block"].splitlines()]
        assert len(lines) == 7
        assert lines[-1] == "- Other"

    def test_domain_prompt_requires_taxonomy(self):
        with pytest.raises(ValueError):
            build_domain_prompt("x", [])

    def test_domain_response_exact_label(self):
        assert parse_domain_response(" NLP ", ["NLP", "CV"]) == "NLP"

    def test_domain_response_fallback_to_other(self):
        assert parse_domain_response("Botany", ["NLP", "CV"]) == "Other"
