"""Transcript assembly and chapter-boundary verification.

Covers the implementable slice of the annotation flow: merge speech and
visual-caption streams into one chronological transcript, render it in the
timestamped line format the chaptering model consumes, check generated
chapter boundaries against authoritative anchor timestamps, and produce
granularity-perturbed timelines for the robustness harness.
"""
from __future__ import annotations

import bisect
import random
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

from .core import Chapter, ChapterTimeline, Source, TranscriptSegment
from .errors import CueSyntaxError, PerturbationInfeasibleError
from .formats import TranscriptDocument, format_timestamp, parse_timestamp, tokenize

VISUAL_PREFIX = "[VIS] "
DEFAULT_BOUNDARY_TOLERANCE_S = 1.0


@dataclass(frozen=True)
class MultimodalTranscript:
    """Chronologically ordered mixed-source segments; speech wins timestamp ties."""

    segments: Tuple[TranscriptSegment, ...]

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)


def interleave(asr: TranscriptDocument, visual: TranscriptDocument) -> MultimodalTranscript:
    """Stable merge of both streams by start time, ASR before VISUAL at ties."""
    source_rank = {Source.ASR: 0, Source.VISUAL: 1}
    merged = sorted(
        list(asr.segments) + list(visual.segments),
        key=lambda s: (s.start, source_rank[s.source]),
    )
    return MultimodalTranscript(segments=tuple(merged))


def render_transcript(transcript: MultimodalTranscript) -> str:
    """Render one "hh:mm:ss: <text>" line per segment, flooring sub-second starts.

    Visual-caption lines carry a "[VIS] " marker after the timestamp so the
    two modalities stay distinguishable in the merged stream.
    """
    lines = []
    for segment in transcript:
        marker = VISUAL_PREFIX if segment.source is Source.VISUAL else ""
        lines.append(f"{format_timestamp(segment.start)}: {marker}{segment.text}")
    return "".join(line + "\n" for line in lines)


def parse_rendered_transcript(text: str) -> MultimodalTranscript:
    """Inverse of render_transcript (timestamps come back floored to seconds)."""
    segments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        head, sep, body = line.partition(": ")
        if not sep:
            raise CueSyntaxError(f"line {lineno}: expected 'hh:mm:ss: <text>'", lineno)
        start = parse_timestamp(head)
        if body.startswith(VISUAL_PREFIX):
            segments.append(
                TranscriptSegment(start=start, text=body[len(VISUAL_PREFIX):], source=Source.VISUAL)
            )
        else:
            segments.append(TranscriptSegment(start=start, text=body, source=Source.ASR))
    return MultimodalTranscript(segments=tuple(segments))


# ---------------------------------------------------------------------------
# Boundary verification
# ---------------------------------------------------------------------------


class BoundaryStatus(Enum):
    OK = "ok"
    SNAPPED = "snapped"
    REJECTED = "rejected"


@dataclass(frozen=True)
class BoundaryVerdict:
    """Outcome of checking one chapter start against the anchor timestamps."""

    chapter_index: int
    status: BoundaryStatus
    delta: float
    anchor: float


def _nearest_anchor(anchors: Sequence[float], value: float) -> float:
    pos = bisect.bisect_left(anchors, value)
    candidates = []
    if pos > 0:
        candidates.append(anchors[pos - 1])
    if pos < len(anchors):
        candidates.append(anchors[pos])
    return min(candidates, key=lambda a: (abs(a - value), a))


def verify_boundaries(
    chapters: ChapterTimeline,
    anchors: Sequence[float],
    tolerance: float = DEFAULT_BOUNDARY_TOLERANCE_S,
) -> List[BoundaryVerdict]:
    """Compare each chapter start to its nearest anchor timestamp.

    Exact hits are OK, near misses within tolerance are SNAPPED, the rest
    REJECTED; callers choose whether to snap or drop. One verdict per chapter.
    """
    if not anchors:
        raise ValueError("anchors must be non-empty")
    anchors = sorted(anchors)
    verdicts = []
    for index, chapter in enumerate(chapters):
        anchor = _nearest_anchor(anchors, chapter.start)
        delta = chapter.start - anchor
        if delta == 0:
            status = BoundaryStatus.OK
        elif abs(delta) <= tolerance:
            status = BoundaryStatus.SNAPPED
        else:
            status = BoundaryStatus.REJECTED
        verdicts.append(BoundaryVerdict(chapter_index=index, status=status, delta=delta, anchor=anchor))
    return verdicts


def snap_boundaries(
    chapters: ChapterTimeline,
    anchors: Sequence[float],
    tolerance: float = DEFAULT_BOUNDARY_TOLERANCE_S,
) -> ChapterTimeline:
    """Corrected timeline with every SNAPPED start moved onto its anchor.

    A preceding chapter that ended exactly at the old start is kept glued to
    the moved boundary; REJECTED starts are left untouched.
    """
    verdicts = verify_boundaries(chapters, anchors, tolerance)
    snapped = [
        {"start": c.start, "end": c.end, "short_title": c.short_title, "title": c.title,
         "abstract": c.abstract, "introduction": c.introduction}
        for c in chapters
    ]
    for verdict in verdicts:
        if verdict.status is not BoundaryStatus.SNAPPED:
            continue
        k = verdict.chapter_index
        old_start = snapped[k]["start"]
        snapped[k]["start"] = verdict.anchor
        if k > 0:
            prev = snapped[k - 1]
            if prev["end"] == old_start or prev["end"] > verdict.anchor:
                prev["end"] = verdict.anchor
    return ChapterTimeline(
        video_id=chapters.video_id,
        chapters=tuple(Chapter(**kw) for kw in snapped),
        duration=chapters.duration,
    )


# ---------------------------------------------------------------------------
# Granularity perturbation
# ---------------------------------------------------------------------------


class PerturbMode(Enum):
    SPLIT = "split"
    MERGE = "merge"


def perturb_granularity(
    gt: ChapterTimeline,
    mode: PerturbMode,
    seed: int,
    jitter_frac: float = 0.1,
) -> ChapterTimeline:
    """Re-chapter a timeline at finer (SPLIT) or coarser (MERGE) granularity.

    SPLIT halves every chapter near its temporal midpoint (seeded jitter up
    to jitter_frac of the chapter length) and divides the title tokens
    between the halves. MERGE joins adjacent chapter pairs and concatenates
    their titles. Total covered span and the combined token multiset are
    preserved either way.
    """
    if mode is PerturbMode.SPLIT:
        return _split(gt, seed, jitter_frac)
    if mode is PerturbMode.MERGE:
        return _merge(gt)
    raise ValueError(f"unknown perturbation mode {mode!r}")


def _split(gt: ChapterTimeline, seed: int, jitter_frac: float) -> ChapterTimeline:
    rng = random.Random(seed)
    for index, chapter in enumerate(gt):
        if chapter.length < 2.0:
            raise PerturbationInfeasibleError(
                f"chapter {index} is {chapter.length:.3f}s long; splitting needs >= 2s"
            )
        if len(tokenize(chapter.short_title)) < 2:
            raise PerturbationInfeasibleError(
                f"chapter {index} title has fewer than 2 tokens; cannot divide it"
            )
    halves: List[Chapter] = []
    for chapter in gt:
        midpoint = (chapter.start + chapter.end) / 2.0
        offset = rng.uniform(-jitter_frac, jitter_frac) * chapter.length if jitter_frac else 0.0
        cut = midpoint + offset
        tokens = tokenize(chapter.short_title)
        head = len(tokens) // 2
        halves.append(Chapter(start=chapter.start, end=cut, short_title=" ".join(tokens[:head])))
        halves.append(Chapter(start=cut, end=chapter.end, short_title=" ".join(tokens[head:])))
    return ChapterTimeline(video_id=gt.video_id, chapters=tuple(halves), duration=gt.duration)


def _merge(gt: ChapterTimeline) -> ChapterTimeline:
    if len(gt) < 2:
        raise PerturbationInfeasibleError("merging needs at least 2 chapters")
    merged: List[Chapter] = []
    chapters = list(gt.chapters)
    for first, second in zip(chapters[0::2], chapters[1::2]):
        merged.append(
            Chapter(
                start=first.start,
                end=second.end,
                short_title=f"{first.short_title} {second.short_title}".strip(),
            )
        )
    if len(chapters) % 2 == 1:
        merged.append(chapters[-1])
    return ChapterTimeline(video_id=gt.video_id, chapters=tuple(merged), duration=gt.duration)
