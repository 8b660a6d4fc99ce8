import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bleu_oracle, ter_oracle, ter_segment_oracle
from termforge.errors import EmptyCorpusError, EmptyReferenceError, LengthMismatchError
from termforge.metrics import (
    bleu,
    bleu_statistics,
    chrf,
    chrf_plus_plus,
    evaluate,
    ter,
    ter_segment_edits,
)

VOCAB = ["the", "cat", "is", "on", "mat", "a", "dog", "sat"]


def random_corpus(rng, max_segments=3, max_tokens=6, min_tokens=0):
    n = rng.randint(1, max_segments)
    hyps = [
        [rng.choice(VOCAB) for _ in range(rng.randint(min_tokens, max_tokens))]
        for _ in range(n)
    ]
    refs = [
        [rng.choice(VOCAB) for _ in range(rng.randint(1, max_tokens))] for _ in range(n)
    ]
    return hyps, refs


class TestBleu:
    def test_perfect_match_scores_100(self):
        corpus = [["the", "cat"], ["a", "dog", "sat"]]
        assert bleu(corpus, corpus) == pytest.approx(100.0)

    def test_clipped_unigram_counts(self):
        hyp = ["the"] * 7
        ref = "the cat is on the mat".split()
        correct, total, hyp_len, ref_len = bleu_statistics([hyp], [ref])
        assert correct[0] == 2
        assert total[0] == 7
        assert (hyp_len, ref_len) == (7, 6)

    def test_disjoint_scores_zero(self):
        assert bleu([["aa", "bb"]], [["cc", "dd"]]) == 0.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            bleu([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(LengthMismatchError):
            bleu([["a"]], [["a"], ["b"]])

    def test_brevity_penalty_applies_when_short(self):
        hyp = [["the", "cat"]]
        ref = [["the", "cat", "is", "on"]]
        score = bleu(hyp, ref)
        no_penalty = bleu(hyp, [["the", "cat"]])
        assert score < no_penalty

    def test_matches_oracle_on_randomized_corpora(self):
        rng = random.Random(42)
        for _ in range(300):
            hyps, refs = random_corpus(rng)
            assert bleu(hyps, refs) == pytest.approx(bleu_oracle(hyps, refs), abs=1e-9)

    def test_smoothing_none_zeroes_on_missing_higher_order(self):
        hyps = [["the", "cat", "on", "mat"]]
        refs = [["the", "dog", "on", "sat"]]
        assert bleu(hyps, refs, smoothing="none") == 0.0
        assert bleu(hyps, refs, smoothing="exp") > 0.0

    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_corpus_permutation_invariance(self, data):
        n = data.draw(st.integers(2, 4))
        hyps = data.draw(
            st.lists(st.lists(st.sampled_from(VOCAB), max_size=5), min_size=n, max_size=n)
        )
        refs = data.draw(
            st.lists(st.lists(st.sampled_from(VOCAB), min_size=1, max_size=5), min_size=n, max_size=n)
        )
        order = data.draw(st.permutations(range(n)))
        base = bleu(hyps, refs)
        shuffled = bleu([hyps[i] for i in order], [refs[i] for i in order])
        assert shuffled == pytest.approx(base, abs=1e-12)


class TestChrf:
    def test_perfect_match(self):
        corpus = ["le chat", "un chien"]
        assert chrf(corpus, corpus) == pytest.approx(100.0)
        assert chrf_plus_plus(corpus, corpus) == pytest.approx(100.0)

    def test_disjoint_characters(self):
        assert chrf(["abc"], ["xyz"]) == 0.0

    def test_hand_computed_order_one(self):
        # P = R = 2/3 at order 1, so F2 = 2/3
        assert chrf(["abc"], ["abd"], char_order=1) == pytest.approx(200.0 / 3.0)

    def test_whitespace_removed_before_char_ngrams(self):
        assert chrf(["ab"], ["a b"]) == pytest.approx(chrf(["ab"], ["ab"]))

    def test_word_order_zero_reduces_chrfpp_to_chrf(self):
        rng = random.Random(7)
        for _ in range(100):
            n = rng.randint(1, 3)
            hyps = [" ".join(rng.choice(VOCAB) for _ in range(rng.randint(0, 6))) for _ in range(n)]
            refs = [" ".join(rng.choice(VOCAB) for _ in range(rng.randint(1, 6))) for _ in range(n)]
            assert chrf(hyps, refs, word_order=0) == chrf(hyps, refs)
            assert chrf_plus_plus(hyps, refs) == chrf(hyps, refs, word_order=2)

    def test_beta_weighting_favors_recall(self):
        hyp = ["abcd"]
        ref = ["ab"]
        precision_heavy = chrf(hyp, ref, char_order=1, beta=0.5)
        recall_heavy = chrf(hyp, ref, char_order=1, beta=2.0)
        assert recall_heavy > precision_heavy


class TestTer:
    def test_identical_corpus_zero(self):
        corpus = [["a", "b", "c"]]
        assert ter(corpus, corpus) == 0.0

    def test_single_substitution_in_five_token_reference(self):
        hyp = [["a", "b", "X", "d", "e"]]
        ref = [["a", "b", "c", "d", "e"]]
        assert ter(hyp, ref) == pytest.approx(20.0)

    def test_block_move_counts_one_shift(self):
        ref = ["a", "b", "c", "d", "e"]
        hyp = ["c", "d", "a", "b", "e"]
        assert ter_segment_edits(hyp, ref) == 1
        assert ter([hyp], [ref]) == pytest.approx(100.0 / 5.0)

    def test_empty_reference_rejected(self):
        with pytest.raises(EmptyReferenceError):
            ter([["a"]], [[]])

    def test_empty_hypothesis_all_insertions(self):
        assert ter([[]], [["a", "b"]]) == pytest.approx(100.0)

    def test_matches_exhaustive_shift_oracle(self):
        rng = random.Random(13)
        for _ in range(300):
            hyps, refs = random_corpus(rng)
            assert ter(hyps, refs) == pytest.approx(ter_oracle(hyps, refs), abs=1e-9)

    def test_segment_oracle_agreement_on_shifty_cases(self):
        rng = random.Random(29)
        for _ in range(100):
            ref = [rng.choice(VOCAB[:4]) for _ in range(rng.randint(1, 6))]
            hyp = ref[:]
            rng.shuffle(hyp)
            assert ter_segment_edits(hyp, ref) == ter_segment_oracle(hyp, ref)


class TestIdentityRelations:
    def test_equal_corpus_all_identities(self):
        lines = ["the cat sat", "a dog", "on the mat"]
        tokens = [line.split() for line in lines]
        assert bleu(tokens, tokens) == pytest.approx(100.0)
        assert chrf(lines, lines) == pytest.approx(100.0)
        assert chrf_plus_plus(lines, lines) == pytest.approx(100.0)
        assert ter(tokens, tokens) == 0.0


class TestEvaluate:
    def test_report_fields(self):
        report = evaluate(["the cat"], ["the cat"], "en")
        assert report.bleu == pytest.approx(100.0)
        assert report.ter == 0.0
        assert report.n_segments == 1
        payload = report.to_dict()
        assert payload["counts"]["hyp_len"] == 2
        assert "comet" not in payload

    def test_comet_passthrough(self):
        report = evaluate(["a"], ["a"], "en", comet=77.7)
        assert report.to_dict()["comet"] == 77.7
