"""Pluggable group-text similarity: lexical F1, CIDEr-D, external scorer client.

The group metrics treat similarity as an opaque, deterministic scorer with
outputs clamped to [0, 1]. The lexical token-F1 backend keeps the whole
suite reproducible with no model downloads; the external backend talks to a
sidecar process over the newline-delimited textsim/1 protocol.
"""
from __future__ import annotations

import json
import math
import os
import queue
import subprocess
import threading
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence

from .core import Chapter
from .errors import (
    EmptyCorpusError,
    MissingFieldError,
    MissingResponseError,
    ScorerProtocolError,
    ScorerTimeoutError,
)
from .formats import normalize_text, tokenize

TIMEOUT_ENV_VAR = "CHAPTEREVAL_SCORER_TIMEOUT_S"
DEFAULT_TIMEOUT_S = 120.0

CIDER_MAX_NGRAM = 4
CIDER_SIGMA = 6.0
CIDER_SCALE = 10.0


class ScorerKind(Enum):
    LEXICAL_F1 = "lexical"
    EXTERNAL = "external"


@dataclass(frozen=True)
class ScoreRequest:
    id: str
    candidate: str
    reference: str


@dataclass(frozen=True)
class ScoreResponse:
    id: str
    score: float


def concat_group_text(group: Sequence[Chapter], field: str = "short_title") -> str:
    """Join one group's chapter texts in temporal order into a single normalized sentence."""
    parts = []
    for index, chapter in enumerate(group):
        value = chapter.text(field)
        if value is None or not value.strip():
            raise MissingFieldError(
                f"chapter {index} has no {field!r} text", chapter_index=index
            )
        parts.append(value)
    return normalize_text(" ".join(parts))


def lexical_f1(candidate: str, reference: str) -> float:
    """Token-multiset precision/recall harmonic mean in [0, 1]."""
    cand = Counter(tokenize(candidate))
    ref = Counter(tokenize(reference))
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    if n_cand == 0 and n_ref == 0:
        return 1.0
    if n_cand == 0 or n_ref == 0:
        return 0.0
    overlap = sum((cand & ref).values())
    if overlap == 0:
        return 0.0
    precision = overlap / n_cand
    recall = overlap / n_ref
    return 2 * precision * recall / (precision + recall)


# ---------------------------------------------------------------------------
# CIDEr-D
# ---------------------------------------------------------------------------


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _tfidf_vector(counts: Counter, doc_freq: Dict[tuple, int], n_docs: int):
    log_n = math.log(n_docs)
    vec = {ng: tf * (log_n - math.log(max(1.0, doc_freq.get(ng, 0)))) for ng, tf in counts.items()}
    norm = math.sqrt(sum(w * w for w in vec.values()))
    return vec, norm


def _clipped_cosine(cand_vec, cand_norm, ref_vec, ref_norm) -> float:
    if cand_norm == 0.0 or ref_norm == 0.0:
        return 0.0
    dot = 0.0
    for ng, w in cand_vec.items():
        rw = ref_vec.get(ng, 0.0)
        if rw:
            dot += min(w, rw) * rw  # candidate counts clipped, per CIDEr-D
    return dot / (cand_norm * ref_norm)


def cider_d(candidates: Sequence[str], references: Sequence[str]) -> float:
    """Corpus CIDEr-D: TF-IDF n-gram cosine with length penalty, scaled so a
    perfect corpus scores 10.

    IDF is computed over the reference list of this run. N-gram orders with
    no n-grams on either side of a pair are skipped so short texts can still
    reach the perfect score; orders where the run's IDF weights vanish fall
    back to plain term-frequency cosine.
    """
    if len(candidates) != len(references):
        raise EmptyCorpusError(
            f"candidate/reference count mismatch: {len(candidates)} vs {len(references)}"
        )
    if not candidates:
        raise EmptyCorpusError("empty corpus")

    cand_tokens = [tokenize(c) for c in candidates]
    ref_tokens = [tokenize(r) for r in references]
    n_docs = len(references)

    doc_freq: List[Dict[tuple, int]] = []
    for n in range(1, CIDER_MAX_NGRAM + 1):
        df: Dict[tuple, int] = defaultdict(int)
        for tokens in ref_tokens:
            for ng in set(_ngram_counts(tokens, n)):
                df[ng] += 1
        doc_freq.append(dict(df))

    scores = []
    for cand, ref in zip(cand_tokens, ref_tokens):
        delta = len(cand) - len(ref)
        penalty = math.exp(-(delta * delta) / (2 * CIDER_SIGMA * CIDER_SIGMA))
        level_scores = []
        for n in range(1, CIDER_MAX_NGRAM + 1):
            c_counts = _ngram_counts(cand, n)
            r_counts = _ngram_counts(ref, n)
            if not c_counts and not r_counts:
                continue  # order not applicable to either text
            if not c_counts or not r_counts:
                level_scores.append(0.0)
                continue
            c_vec, c_norm = _tfidf_vector(c_counts, doc_freq[n - 1], n_docs)
            r_vec, r_norm = _tfidf_vector(r_counts, doc_freq[n - 1], n_docs)
            if c_norm == 0.0 and r_norm == 0.0:
                # degenerate IDF (every n-gram in every reference): plain TF cosine
                c_vec, c_norm = dict(c_counts), math.sqrt(sum(v * v for v in c_counts.values()))
                r_vec, r_norm = dict(r_counts), math.sqrt(sum(v * v for v in r_counts.values()))
            level_scores.append(_clipped_cosine(c_vec, c_norm, r_vec, r_norm) * penalty)
        if level_scores:
            scores.append(CIDER_SCALE * sum(level_scores) / len(level_scores))
        else:
            # both texts empty: identical by convention
            scores.append(CIDER_SCALE)
    return sum(scores) / len(scores)


# ---------------------------------------------------------------------------
# Scorers
# ---------------------------------------------------------------------------


def _clamp01(value: float) -> float:
    return 0.0 if value < 0.0 else 1.0 if value > 1.0 else value


class SimilarityScorer:
    """Base scorer interface: deterministic, outputs clamped to [0, 1]."""

    kind: ScorerKind
    supports_batch = True

    def score(self, candidate: str, reference: str) -> float:
        raise NotImplementedError

    def score_batch(self, requests: Sequence[ScoreRequest]) -> List[ScoreResponse]:
        _check_unique_ids(requests)
        return [ScoreResponse(r.id, _clamp01(self.score(r.candidate, r.reference))) for r in requests]

    def close(self):
        pass

    def describe(self) -> str:
        return self.kind.value


def _check_unique_ids(requests: Sequence[ScoreRequest]):
    ids = [r.id for r in requests]
    if len(set(ids)) != len(ids):
        raise ScorerProtocolError("request ids must be unique within a batch")


class LexicalScorer(SimilarityScorer):
    """Pure in-process token-F1 scorer; the default for tests and CI."""

    kind = ScorerKind.LEXICAL_F1

    def score(self, candidate: str, reference: str) -> float:
        return _clamp01(lexical_f1(candidate, reference))


class ExternalScorer(SimilarityScorer):
    """Client for a sidecar process speaking the textsim/1 protocol.

    One instance drives one sidecar over stdin/stdout and must not be shared
    across threads without external serialization; `lock` is provided for
    callers that fan work out.
    """

    kind = ScorerKind.EXTERNAL

    def __init__(self, command: Sequence[str], timeout_s: Optional[float] = None):
        if timeout_s is None:
            timeout_s = float(os.environ.get(TIMEOUT_ENV_VAR, DEFAULT_TIMEOUT_S))
        self.timeout_s = timeout_s
        self.command = list(command)
        self.lock = threading.Lock()
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._eof = False
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self.backend = self._handshake()

    def _read_loop(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _next_line(self) -> str:
        if self._eof:
            raise ScorerProtocolError("scorer closed its output stream mid-conversation")
        try:
            line = self._lines.get(timeout=self.timeout_s)
        except queue.Empty:
            raise ScorerTimeoutError(
                f"no response from scorer within {self.timeout_s}s"
            ) from None
        if line is None:
            self._eof = True
            self._lines.put(None)  # keep the sentinel visible to later callers
            raise ScorerProtocolError("scorer closed its output stream mid-conversation")
        return line

    def _handshake(self) -> str:
        line = self._next_line()
        try:
            header = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScorerProtocolError(f"bad handshake line: {line!r}") from exc
        if not isinstance(header, dict) or header.get("protocol") != "textsim/1":
            raise ScorerProtocolError(f"unsupported scorer protocol in handshake: {line!r}")
        return str(header.get("backend", "unknown"))

    def _write(self, obj: dict):
        assert self._proc.stdin is not None
        if self._eof:
            raise ScorerProtocolError("scorer process is gone")
        try:
            self._proc.stdin.write(json.dumps(obj, ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ScorerProtocolError("scorer process is gone") from exc

    def score(self, candidate: str, reference: str) -> float:
        [response] = self.score_batch([ScoreRequest("0", candidate, reference)])
        return response.score

    def score_batch(self, requests: Sequence[ScoreRequest]) -> List[ScoreResponse]:
        _check_unique_ids(requests)
        if not requests:
            return []
        for request in requests:
            self._write(
                {"id": request.id, "candidate": request.candidate, "reference": request.reference}
            )
        self._write({"flush": True})

        by_id: Dict[str, float] = {}
        expected = {r.id for r in requests}
        while True:
            line = self._next_line()
            try:
                message = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScorerProtocolError(f"bad response line: {line!r}") from exc
            if not isinstance(message, dict):
                raise ScorerProtocolError(f"bad response line: {line!r}")
            if message.get("done") is True:
                break
            if "error" in message:
                raise ScorerProtocolError(f"scorer reported error: {message['error']}")
            if "id" not in message or "score" not in message:
                raise ScorerProtocolError(f"response missing id/score: {line!r}")
            rid = str(message["id"])
            if rid not in expected:
                raise ScorerProtocolError(f"response for unknown id {rid!r}")
            if rid in by_id:
                raise ScorerProtocolError(f"duplicate response for id {rid!r}")
            try:
                by_id[rid] = float(message["score"])
            except (TypeError, ValueError) as exc:
                raise ScorerProtocolError(f"non-numeric score for id {rid!r}") from exc

        missing = sorted(expected - set(by_id))
        if missing:
            raise MissingResponseError(
                f"scorer left {len(missing)} request(s) unanswered: {', '.join(missing)}",
                missing_ids=missing,
            )
        return [ScoreResponse(r.id, _clamp01(by_id[r.id])) for r in requests]

    def describe(self) -> str:
        return f"{self.kind.value}:{self.backend}"

    def close(self):
        if self._proc.stdin is not None and not self._proc.stdin.closed:
            try:
                self._proc.stdin.close()
            except BrokenPipeError:
                pass
        try:
            self._proc.wait(timeout=self.timeout_s)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def score_batch(scorer: SimilarityScorer, requests: Sequence[ScoreRequest]) -> List[ScoreResponse]:
    """Score a batch of candidate/reference pairs, one response per request id."""
    return scorer.score_batch(requests)
