"""Interleaving, rendering, boundary verification, granularity perturbation."""
import random
from collections import Counter

import pytest

from chaptereval import (
    BoundaryStatus,
    Chapter,
    ChapterTimeline,
    Source,
    TranscriptSegment,
    interleave,
    parse_rendered_transcript,
    perturb_granularity,
    render_transcript,
    snap_boundaries,
    tokenize,
    verify_boundaries,
)
from chaptereval.errors import PerturbationInfeasibleError
from chaptereval.formats import TranscriptDocument
from chaptereval.pipeline import MultimodalTranscript, PerturbMode
from conftest import contiguous_timeline


def doc(starts, source, prefix="s"):
    return TranscriptDocument(
        segments=tuple(TranscriptSegment(t, f"{prefix}{i}", source) for i, t in enumerate(starts))
    )


class TestInterleave:
    def test_merge_order(self):
        merged = interleave(doc([1, 5], Source.ASR, "a"), doc([3], Source.VISUAL, "v"))
        assert [(s.start, s.source) for s in merged] == [
            (1.0, Source.ASR),
            (3.0, Source.VISUAL),
            (5.0, Source.ASR),
        ]

    def test_empty_visual_is_identity(self):
        asr = doc([1, 2, 3], Source.ASR)
        merged = interleave(asr, TranscriptDocument(segments=()))
        assert tuple(merged) == asr.segments

    def test_asr_wins_timestamp_ties(self):
        merged = interleave(doc([2.0], Source.ASR, "a"), doc([2.0], Source.VISUAL, "v"))
        assert [s.source for s in merged] == [Source.ASR, Source.VISUAL]

    def test_multiset_preserved_and_matches_sort_oracle(self):
        rng = random.Random(4)
        for _ in range(50):
            asr = doc(sorted(rng.uniform(0, 100) for _ in range(rng.randint(0, 8))) , Source.ASR, "a") \
                if rng.random() > 0.1 else TranscriptDocument(segments=())
            vis = doc(sorted(rng.uniform(0, 100) for _ in range(rng.randint(0, 8))), Source.VISUAL, "v") \
                if rng.random() > 0.1 else TranscriptDocument(segments=())
            merged = interleave(asr, vis)
            assert len(merged) == len(asr.segments) + len(vis.segments)
            assert Counter(merged.segments) == Counter(asr.segments + vis.segments)
            starts = [s.start for s in merged]
            assert starts == sorted(starts)


class TestRenderTranscript:
    def test_asr_line_format(self):
        t = MultimodalTranscript(segments=(TranscriptSegment(90.0, "hello", Source.ASR),))
        assert render_transcript(t) == "00:01:30: hello\n"

    def test_visual_marker_and_flooring(self):
        t = MultimodalTranscript(
            segments=(TranscriptSegment(3723.4, "chart on screen", Source.VISUAL),)
        )
        assert render_transcript(t) == "01:02:03: [VIS] chart on screen\n"

    def test_empty_transcript(self):
        assert render_transcript(MultimodalTranscript(segments=())) == ""

    def test_inverse_parser_recovers_floored_timestamps(self):
        rng = random.Random(8)
        segments = tuple(
            TranscriptSegment(
                rng.uniform(0, 5000),
                f"line {i}",
                Source.VISUAL if rng.random() < 0.4 else Source.ASR,
            )
            for i in range(20)
        )
        t = MultimodalTranscript(segments=tuple(sorted(segments, key=lambda s: s.start)))
        back = parse_rendered_transcript(render_transcript(t))
        assert len(back) == len(t)
        for original, parsed in zip(t, back):
            assert parsed.start == float(int(original.start))
            assert parsed.text == original.text
            assert parsed.source == original.source


class TestVerifyBoundaries:
    def test_exact_starts_are_ok(self):
        tl = ChapterTimeline("v", (Chapter(0, 90, "a"), Chapter(90, 200, "b")))
        verdicts = verify_boundaries(tl, anchors=[0.0, 90.0], tolerance=1.0)
        assert [v.status for v in verdicts] == [BoundaryStatus.OK, BoundaryStatus.OK]
        assert all(v.delta == 0 for v in verdicts)

    def test_near_miss_snapped_with_delta(self):
        tl = ChapterTimeline("v", (Chapter(0, 90.4, "a"), Chapter(90.4, 200, "b")))
        verdicts = verify_boundaries(tl, anchors=[0.0, 90.0], tolerance=1.0)
        assert verdicts[1].status is BoundaryStatus.SNAPPED
        assert verdicts[1].delta == pytest.approx(0.4)

    def test_far_miss_rejected(self):
        tl = ChapterTimeline("v", (Chapter(120, 200, "a"),))
        verdicts = verify_boundaries(tl, anchors=[0.0, 90.0], tolerance=1.0)
        assert verdicts[0].status is BoundaryStatus.REJECTED
        assert verdicts[0].delta == pytest.approx(30.0)

    def test_one_verdict_per_chapter(self):
        tl = ChapterTimeline("v", tuple(Chapter(i * 10, i * 10 + 10, "c") for i in range(7)))
        verdicts = verify_boundaries(tl, anchors=[0.0], tolerance=0.5)
        assert len(verdicts) == len(tl)
        assert [v.chapter_index for v in verdicts] == list(range(7))

    def test_nearest_anchor_matches_linear_scan_oracle(self):
        rng = random.Random(13)
        for _ in range(100):
            anchors = sorted({round(rng.uniform(0, 1000), 3) for _ in range(rng.randint(1, 20))})
            start = round(rng.uniform(0, 1000), 3)
            tl = ChapterTimeline("v", (Chapter(start, start + 1, "c"),))
            verdict = verify_boundaries(tl, anchors, tolerance=5.0)[0]
            oracle = min(anchors, key=lambda a: (abs(a - start), a))
            assert verdict.anchor == oracle

    def test_snap_produces_corrected_timeline(self):
        tl = ChapterTimeline("v", (Chapter(0, 90.4, "a"), Chapter(90.4, 200, "b")))
        snapped = snap_boundaries(tl, anchors=[0.0, 90.0], tolerance=1.0)
        assert snapped.chapters[1].start == 90.0
        assert snapped.chapters[0].end == 90.0  # glued neighbor follows


class TestPerturbGranularity:
    def test_split_doubles_chapters_preserving_span(self):
        rng = random.Random(2)
        gt = contiguous_timeline(rng, 6, span=600.0)
        fine = perturb_granularity(gt, PerturbMode.SPLIT, seed=1)
        assert len(fine) == 2 * len(gt)
        assert fine.span == pytest.approx(gt.span, abs=1e-9)
        assert fine.chapters[0].start == gt.chapters[0].start
        assert fine.chapters[-1].end == gt.chapters[-1].end

    def test_split_preserves_token_multiset(self):
        rng = random.Random(21)
        gt = contiguous_timeline(rng, 5, span=500.0)
        fine = perturb_granularity(gt, PerturbMode.SPLIT, seed=3)
        before = Counter(tok for c in gt for tok in tokenize(c.short_title))
        after = Counter(tok for c in fine for tok in tokenize(c.short_title))
        assert before == after

    def test_split_then_merge_is_identity_at_zero_jitter(self):
        gt = ChapterTimeline(
            "v",
            (Chapter(0, 100, "alpha beta"), Chapter(100, 260, "gamma delta"),
             Chapter(260, 400, "epsilon zeta")),
        )
        fine = perturb_granularity(gt, PerturbMode.SPLIT, seed=0, jitter_frac=0.0)
        back = perturb_granularity(fine, PerturbMode.MERGE, seed=0)
        assert [(c.start, c.end, c.short_title) for c in back] == [
            (c.start, c.end, c.short_title) for c in gt
        ]

    def test_fixed_seed_is_deterministic(self):
        rng = random.Random(30)
        gt = contiguous_timeline(rng, 8, span=800.0)
        one = perturb_granularity(gt, PerturbMode.SPLIT, seed=7)
        two = perturb_granularity(gt, PerturbMode.SPLIT, seed=7)
        assert one == two
        other = perturb_granularity(gt, PerturbMode.SPLIT, seed=8)
        assert other != one

    def test_split_jitter_stays_within_ten_percent(self):
        gt = ChapterTimeline("v", (Chapter(0, 100, "two tokens"),))
        for seed in range(50):
            fine = perturb_granularity(gt, PerturbMode.SPLIT, seed=seed)
            cut = fine.chapters[0].end
            assert 40.0 <= cut <= 60.0

    def test_split_requires_length_and_tokens(self):
        short = ChapterTimeline("v", (Chapter(0, 1.5, "two tokens"),))
        with pytest.raises(PerturbationInfeasibleError):
            perturb_granularity(short, PerturbMode.SPLIT, seed=0)
        one_token = ChapterTimeline("v", (Chapter(0, 10, "single"),))
        with pytest.raises(PerturbationInfeasibleError):
            perturb_granularity(one_token, PerturbMode.SPLIT, seed=0)

    def test_merge_pairs_adjacent_chapters(self):
        gt = ChapterTimeline(
            "v",
            (Chapter(0, 10, "a"), Chapter(10, 20, "b"), Chapter(20, 30, "c"),
             Chapter(30, 40, "d"), Chapter(40, 50, "e")),
        )
        coarse = perturb_granularity(gt, PerturbMode.MERGE, seed=0)
        assert [(c.start, c.end, c.short_title) for c in coarse] == [
            (0.0, 20.0, "a b"), (20.0, 40.0, "c d"), (40.0, 50.0, "e"),
        ]

    def test_merge_needs_two_chapters(self):
        single = ChapterTimeline("v", (Chapter(0, 10, "only"),))
        with pytest.raises(PerturbationInfeasibleError):
            perturb_granularity(single, PerturbMode.MERGE, seed=0)
