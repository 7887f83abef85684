"""Lexical F1, CIDEr-D against an independent oracle, and the textsim/1 client."""
import json
import math
import sys
from collections import Counter
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaptereval import (
    Chapter,
    ExternalScorer,
    LexicalScorer,
    ScoreRequest,
    cider_d,
    concat_group_text,
    lexical_f1,
    score_batch,
    tokenize,
)
from chaptereval.errors import (
    EmptyCorpusError,
    MissingFieldError,
    MissingResponseError,
    ScorerProtocolError,
    ScorerTimeoutError,
)

DATA = Path(__file__).parent / "data"
REF_SIDECAR = [sys.executable, "-m", "chaptereval.ref_sidecar"]


class TestConcatGroupText:
    def test_joins_in_temporal_order(self):
        group = [Chapter(0, 5, "intro"), Chapter(5, 10, "overview")]
        assert concat_group_text(group) == "intro overview"

    def test_single_chapter_identity(self):
        assert concat_group_text([Chapter(0, 5, "  Hello  World ")]) == "hello world"

    def test_missing_field_names_the_chapter(self):
        group = [Chapter(0, 5, "a", title="t"), Chapter(5, 10, "b")]
        with pytest.raises(MissingFieldError) as err:
            concat_group_text(group, field="title")
        assert err.value.chapter_index == 1


class TestLexicalF1:
    def test_identity(self):
        assert lexical_f1("main results", "main results") == 1.0

    def test_partial(self):
        assert lexical_f1("intro overview", "intro") == pytest.approx(2 / 3, abs=1e-9)

    def test_disjoint(self):
        assert lexical_f1("aaa", "bbb") == 0.0

    def test_empty_cases(self):
        assert lexical_f1("", "") == 1.0
        assert lexical_f1("", "x") == 0.0
        assert lexical_f1("x", "") == 0.0

    @given(st.text(max_size=40), st.text(max_size=40))
    def test_symmetric(self, a, b):
        assert lexical_f1(a, b) == pytest.approx(lexical_f1(b, a), abs=1e-12)

    @given(st.text(min_size=1, max_size=40))
    def test_self_similarity_is_one_for_tokenizable_text(self, text):
        if tokenize(text):
            assert lexical_f1(text, text) == 1.0

    @given(st.text(max_size=40), st.text(max_size=40))
    def test_output_in_unit_range(self, a, b):
        assert 0.0 <= lexical_f1(a, b) <= 1.0


# --- independent CIDEr oracle -------------------------------------------------


def cider_oracle(candidates, references):
    """From-scratch TF-IDF n-gram cosine with CIDEr-D clipping and length penalty.

    Mirrors the documented scoring rules through an independent code path:
    per-pair skip of n-gram orders absent from both texts, plain-TF fallback
    when the run's IDF zeroes both vectors, sigma=6 Gaussian length penalty.
    """
    def ngrams(tokens, n):
        return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]

    ref_toks = [tokenize(r) for r in references]
    cand_toks = [tokenize(c) for c in candidates]
    n_docs = len(references)

    per_item = []
    for c_tok, r_tok in zip(cand_toks, ref_toks):
        penalty = math.exp(-((len(c_tok) - len(r_tok)) ** 2) / 72.0)
        levels = []
        for n in range(1, 5):
            c_grams, r_grams = ngrams(c_tok, n), ngrams(r_tok, n)
            if not c_grams and not r_grams:
                continue
            if not c_grams or not r_grams:
                levels.append(0.0)
                continue

            def weight(gram):
                df = sum(1 for toks in ref_toks if gram in set(ngrams(toks, n)))
                return math.log(n_docs) - math.log(max(1.0, df))

            cv = {g: cnt * weight(g) for g, cnt in Counter(c_grams).items()}
            rv = {g: cnt * weight(g) for g, cnt in Counter(r_grams).items()}
            cn = math.sqrt(sum(v * v for v in cv.values()))
            rn = math.sqrt(sum(v * v for v in rv.values()))
            if cn == 0.0 and rn == 0.0:
                cv = dict(Counter(c_grams))
                rv = dict(Counter(r_grams))
                cn = math.sqrt(sum(v * v for v in cv.values()))
                rn = math.sqrt(sum(v * v for v in rv.values()))
            if cn == 0.0 or rn == 0.0:
                levels.append(0.0)
                continue
            dot = sum(min(cv[g], rv.get(g, 0.0)) * rv.get(g, 0.0) for g in cv)
            levels.append(dot / (cn * rn) * penalty)
        per_item.append(10.0 * sum(levels) / len(levels) if levels else 10.0)
    return sum(per_item) / len(per_item)


class TestCiderD:
    def test_identical_corpus_scores_ten(self):
        corpus = ["intro", "main results", "wrap up and questions"]
        assert cider_d(corpus, corpus) == pytest.approx(10.0, abs=1e-9)

    def test_disjoint_pair_scores_zero(self):
        assert cider_d(["aaa"], ["bbb"]) == 0.0

    def test_half_exact_half_disjoint_averages_to_five(self):
        candidates = ["the main results", "xxx yyy"]
        references = ["the main results", "aaa bbb"]
        assert cider_d(candidates, references) == pytest.approx(5.0, abs=1e-9)
        assert cider_d(candidates, references) == pytest.approx(
            cider_oracle(candidates, references), abs=1e-12
        )

    def test_partial_overlap_matches_oracle(self):
        candidates = [
            "intro and motivation",
            "the big demo",
            "closing remarks thanks",
            "setup steps",
        ]
        references = [
            "intro and goals",
            "live demo walkthrough",
            "closing remarks",
            "setup steps",
        ]
        assert cider_d(candidates, references) == pytest.approx(
            cider_oracle(candidates, references), abs=1e-12
        )

    def test_single_token_identity_still_ten(self):
        assert cider_d(["intro"], ["intro"]) == pytest.approx(10.0, abs=1e-9)

    def test_length_penalty_reduces_score(self):
        close = cider_d(["big demo time"], ["big demo"])
        far = cider_d(["big demo " + "x " * 20], ["big demo"])
        assert far < close

    def test_corpus_order_permutation_invariant(self):
        candidates = ["intro talk", "demo run", "wrap up"]
        references = ["intro chat", "demo run", "closing wrap"]
        base = cider_d(candidates, references)
        perm = [2, 0, 1]
        assert cider_d([candidates[i] for i in perm], [references[i] for i in perm]) == pytest.approx(
            base, abs=1e-12
        )

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            cider_d([], [])
        with pytest.raises(EmptyCorpusError):
            cider_d(["a"], ["a", "b"])

    def test_empty_candidate_scores_zero(self):
        assert cider_d(["", "same text"], ["missed chapter", "same text"]) == pytest.approx(
            5.0, abs=1e-9
        )


# --- batch scoring -------------------------------------------------------------


class TestLexicalBatch:
    def test_batch_equals_per_pair(self):
        scorer = LexicalScorer()
        requests = [
            ScoreRequest("1", "intro overview", "intro"),
            ScoreRequest("2", "main results", "main results"),
            ScoreRequest("3", "aaa", "bbb"),
        ]
        responses = score_batch(scorer, requests)
        assert [r.id for r in responses] == ["1", "2", "3"]
        assert [r.score for r in responses] == [
            pytest.approx(lexical_f1(q.candidate, q.reference)) for q in requests
        ]

    def test_duplicate_ids_rejected(self):
        scorer = LexicalScorer()
        with pytest.raises(ScorerProtocolError):
            score_batch(scorer, [ScoreRequest("1", "a", "a"), ScoreRequest("1", "b", "b")])

    def test_reproducible_bit_for_bit(self):
        scorer = LexicalScorer()
        requests = [ScoreRequest(str(i), f"tok{i} shared", "shared") for i in range(20)]
        first = score_batch(scorer, requests)
        second = score_batch(scorer, requests)
        assert first == second


# --- external client against the reference sidecar -----------------------------


def _sidecar_script(body: str):
    return [sys.executable, "-c", body]


class TestExternalScorer:
    def test_reference_sidecar_matches_lexical(self):
        requests = [
            ScoreRequest("1", "intro overview", "intro"),
            ScoreRequest("2", "main results", "main results"),
            ScoreRequest("3", "aaa", "bbb"),
        ]
        with ExternalScorer(REF_SIDECAR) as scorer:
            assert scorer.backend == "lexical-f1/1"
            responses = score_batch(scorer, requests)
        assert [r.score for r in responses] == [
            pytest.approx(lexical_f1(q.candidate, q.reference)) for q in requests
        ]

    def test_conformance_corpus_against_reference_sidecar(self):
        corpus = json.loads((DATA / "textsim_conformance.json").read_text())
        with ExternalScorer(REF_SIDECAR) as scorer:
            for case in corpus["cases"]:
                requests = [
                    ScoreRequest(r["id"], r["candidate"], r["reference"])
                    for r in case["requests"]
                ]
                responses = score_batch(scorer, requests)
                by_id = {r.id: r.score for r in responses}
                assert sorted(by_id) == sorted(r.id for r in requests), case["name"]
                assert all(0.0 <= s <= 1.0 for s in by_id.values()), case["name"]
                for rid in case["identical_ids"]:
                    assert by_id[rid] >= 0.99, case["name"]
                # shuffled resend must give identical per-id scores
                shuffled = score_batch(scorer, list(reversed(requests)))
                assert {r.id: r.score for r in shuffled} == by_id, case["name"]

    def test_sidecar_exits_cleanly_on_eof(self):
        scorer = ExternalScorer(REF_SIDECAR)
        scorer.score_batch([ScoreRequest("1", "a", "a")])
        scorer.close()
        assert scorer._proc.returncode == 0

    def test_missing_response_detected(self):
        body = (
            "import sys, json\n"
            "print(json.dumps({'protocol': 'textsim/1', 'backend': 'half'}), flush=True)\n"
            "pending = []\n"
            "for line in sys.stdin:\n"
            "    msg = json.loads(line)\n"
            "    if msg.get('flush'):\n"
            "        for m in pending[:-1]:\n"
            "            print(json.dumps({'id': m['id'], 'score': 0.5}), flush=True)\n"
            "        print(json.dumps({'done': True}), flush=True)\n"
            "        pending = []\n"
            "    else:\n"
            "        pending.append(msg)\n"
        )
        with ExternalScorer(_sidecar_script(body)) as scorer:
            with pytest.raises(MissingResponseError) as err:
                score_batch(scorer, [ScoreRequest(str(i), "a", "a") for i in range(3)])
        assert err.value.missing_ids == ("2",)

    def test_bad_handshake_rejected(self):
        body = "print('{\"protocol\": \"other/9\"}', flush=True)\nimport time; time.sleep(5)\n"
        with pytest.raises(ScorerProtocolError):
            ExternalScorer(_sidecar_script(body))

    def test_garbage_response_line_rejected(self):
        body = (
            "import sys, json\n"
            "print(json.dumps({'protocol': 'textsim/1', 'backend': 'x'}), flush=True)\n"
            "for line in sys.stdin:\n"
            "    msg = json.loads(line)\n"
            "    if msg.get('flush'):\n"
            "        print('not json at all', flush=True)\n"
        )
        with ExternalScorer(_sidecar_script(body)) as scorer:
            with pytest.raises(ScorerProtocolError):
                score_batch(scorer, [ScoreRequest("1", "a", "a")])

    def test_timeout_enforced(self):
        body = (
            "import sys, json, time\n"
            "print(json.dumps({'protocol': 'textsim/1', 'backend': 'slow'}), flush=True)\n"
            "time.sleep(30)\n"
        )
        scorer = ExternalScorer(_sidecar_script(body), timeout_s=0.3)
        try:
            with pytest.raises(ScorerTimeoutError):
                score_batch(scorer, [ScoreRequest("1", "a", "a")])
        finally:
            scorer._proc.kill()
            scorer._proc.wait()

    def test_out_of_range_scores_clamped(self):
        body = (
            "import sys, json\n"
            "print(json.dumps({'protocol': 'textsim/1', 'backend': 'wild'}), flush=True)\n"
            "pending = []\n"
            "for line in sys.stdin:\n"
            "    msg = json.loads(line)\n"
            "    if msg.get('flush'):\n"
            "        print(json.dumps({'id': pending[0]['id'], 'score': 1.7}), flush=True)\n"
            "        print(json.dumps({'id': pending[1]['id'], 'score': -0.4}), flush=True)\n"
            "        print(json.dumps({'done': True}), flush=True)\n"
            "        pending = []\n"
            "    else:\n"
            "        pending.append(msg)\n"
        )
        with ExternalScorer(_sidecar_script(body)) as scorer:
            responses = score_batch(
                scorer, [ScoreRequest("hi", "a", "a"), ScoreRequest("lo", "a", "a")]
            )
        assert [r.score for r in responses] == [1.0, 0.0]

    def test_reference_sidecar_rejects_missing_key(self):
        import subprocess

        proc = subprocess.run(
            REF_SIDECAR,
            input='{"id": "1", "candidate": "x"}\n',
            capture_output=True,
            text=True,
            timeout=30,
        )
        assert proc.returncode != 0
        lines = [json.loads(l) for l in proc.stdout.splitlines() if l.strip()]
        assert any("error" in l for l in lines)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.text(max_size=20), st.text(max_size=20)), min_size=1, max_size=6))
def test_all_scorer_outputs_clamped(pairs):
    scorer = LexicalScorer()
    responses = score_batch(
        scorer, [ScoreRequest(str(i), c, r) for i, (c, r) in enumerate(pairs)]
    )
    assert all(0.0 <= r.score <= 1.0 for r in responses)
