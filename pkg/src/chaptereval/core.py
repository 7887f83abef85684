"""Domain types and interval arithmetic for chapter timelines.

Chapters are half-open intervals [start, end) in seconds, so back-to-back
chapters have zero intersection and "non-overlapping" needs no epsilon.
All types are immutable after construction; all operations are pure.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

from .errors import BucketGapError, GroupShapeError, InvalidChapterError

# Consecutive chapters overlapping by no more than this are treated as
# rounding jitter and clamped; anything larger is a hard error.
OVERLAP_CLAMP_S = 0.01


def _check_time(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InvalidChapterError(f"{what} must be a finite non-negative number of seconds, got {value!r}")
    return value


class Source(Enum):
    """Origin of a transcript segment."""

    ASR = "asr"
    VISUAL = "visual"


@dataclass(frozen=True)
class Chapter:
    """A temporal interval with a short title and optional structured text."""

    start: float
    end: float
    short_title: str = ""
    title: Optional[str] = None
    abstract: Optional[str] = None
    introduction: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "start", _check_time(self.start, "chapter start"))
        object.__setattr__(self, "end", _check_time(self.end, "chapter end"))
        if self.start >= self.end:
            raise InvalidChapterError(
                f"chapter must have positive duration, got [{self.start}, {self.end})"
            )

    @property
    def length(self) -> float:
        return self.end - self.start

    def text(self, field_name: str = "short_title") -> Optional[str]:
        """Return one of the four text fields by name."""
        if field_name not in ("short_title", "title", "abstract", "introduction"):
            raise ValueError(f"unknown chapter text field {field_name!r}")
        return getattr(self, field_name)


@dataclass(frozen=True)
class ChapterTimeline:
    """An ordered, non-overlapping, non-empty sequence of chapters for one video."""

    video_id: str
    chapters: tuple
    duration: Optional[float] = None

    def __post_init__(self):
        chapters = tuple(self.chapters)
        if not chapters:
            raise InvalidChapterError(f"timeline {self.video_id!r} has no chapters")
        chapters = _clamp_tiny_overlaps(chapters, self.video_id)
        for prev, cur in zip(chapters, chapters[1:]):
            if prev.start >= cur.start:
                raise InvalidChapterError(
                    f"timeline {self.video_id!r}: chapters not sorted by start "
                    f"({prev.start} then {cur.start})"
                )
            if prev.end > cur.start:
                raise InvalidChapterError(
                    f"timeline {self.video_id!r}: chapter ending at {prev.end} overlaps "
                    f"next starting at {cur.start}"
                )
        object.__setattr__(self, "chapters", chapters)
        if self.duration is not None:
            duration = _check_time(self.duration, "video duration")
            if chapters[-1].end > duration:
                raise InvalidChapterError(
                    f"timeline {self.video_id!r}: last chapter ends at {chapters[-1].end} "
                    f"after declared duration {duration}"
                )
            object.__setattr__(self, "duration", duration)

    def __len__(self) -> int:
        return len(self.chapters)

    def __iter__(self):
        return iter(self.chapters)

    @property
    def span(self) -> float:
        """Covered span from first start to last end."""
        return self.chapters[-1].end - self.chapters[0].start

    @property
    def effective_duration(self) -> float:
        """Declared duration when present, else the last chapter end."""
        return self.duration if self.duration is not None else self.chapters[-1].end


def _clamp_tiny_overlaps(chapters, video_id):
    """Truncate earlier chapters over sub-centisecond overlaps (VTT rounding jitter)."""
    fixed = list(chapters)
    for k in range(len(fixed) - 1):
        overlap = fixed[k].end - fixed[k + 1].start
        if 0 < overlap <= OVERLAP_CLAMP_S:
            warnings.warn(
                f"timeline {video_id!r}: clamping {overlap:.4f}s overlap between "
                f"chapters {k} and {k + 1}",
                stacklevel=3,
            )
            fixed[k] = replace(fixed[k], end=fixed[k + 1].start)
    return tuple(fixed)


@dataclass(frozen=True)
class TranscriptSegment:
    """A timestamped text unit from speech recognition or visual captioning."""

    start: float
    text: str
    source: Source = Source.ASR

    def __post_init__(self):
        object.__setattr__(self, "start", _check_time(self.start, "segment start"))
        if not self.text.strip():
            raise InvalidChapterError("transcript segment text is empty")


class BucketLabel(Enum):
    SHORT = "short"
    MEDIUM = "medium"
    LONG = "long"
    ALL = "all"


@dataclass(frozen=True)
class DurationBucket:
    """A half-open duration range (min, max] used for report breakdowns."""

    label: BucketLabel
    min_s: float
    max_s: float

    def __post_init__(self):
        if not self.min_s < self.max_s:
            raise BucketGapError(
                f"bucket {self.label.value}: min {self.min_s} must be below max {self.max_s}"
            )

    def contains(self, duration: float) -> bool:
        return self.min_s < duration <= self.max_s


ALL_BUCKET = DurationBucket(BucketLabel.ALL, 0.0, math.inf)

# Only the long bucket's 30-60 min range is fixed; the lower cut points are a
# configurable reporting convention.
DEFAULT_BUCKETS = (
    DurationBucket(BucketLabel.SHORT, 0.0, 15 * 60.0),
    DurationBucket(BucketLabel.MEDIUM, 15 * 60.0, 30 * 60.0),
    DurationBucket(BucketLabel.LONG, 30 * 60.0, 60 * 60.0),
)


def validate_bucket_scheme(buckets: Sequence[DurationBucket]) -> tuple:
    """Check that specific buckets tile (0, top] contiguously, in order."""
    specific = [b for b in buckets if b.label is not BucketLabel.ALL]
    if not specific:
        raise BucketGapError("bucket scheme has no specific buckets")
    specific.sort(key=lambda b: b.min_s)
    if specific[0].min_s != 0.0:
        raise BucketGapError(f"bucket scheme must start at 0, got {specific[0].min_s}")
    for prev, cur in zip(specific, specific[1:]):
        if prev.max_s != cur.min_s:
            raise BucketGapError(
                f"gap or overlap between buckets {prev.label.value} and {cur.label.value}: "
                f"{prev.max_s} vs {cur.min_s}"
            )
    return tuple(specific)


def bucket_of(duration: float, buckets: Sequence[DurationBucket] = DEFAULT_BUCKETS) -> DurationBucket:
    """Map a video duration to its specific bucket.

    Durations above the top-most specific bucket belong to ALL only, so the
    ALL bucket is returned for them. Non-positive durations are a hard error.
    """
    specific = validate_bucket_scheme(buckets)
    if not (duration > 0) or not math.isfinite(duration):
        raise BucketGapError(f"duration {duration!r} is outside every bucket")
    for b in specific:
        if b.contains(duration):
            return b
    if duration > specific[-1].max_s:
        return ALL_BUCKET
    raise BucketGapError(f"duration {duration!r} is not covered by the bucket scheme")


def iou(a: Chapter, b: Chapter) -> float:
    """Temporal intersection-over-union of two chapters, in [0, 1]."""
    inter = min(a.end, b.end) - max(a.start, b.start)
    if inter <= 0:
        return 0.0
    union = a.length + b.length - inter
    return inter / union


def phi(pred_group: Sequence[Chapter], gt_group: Sequence[Chapter]) -> float:
    """Mean pairwise temporal IoU between two chapter groups.

    One side must be a single chapter; grouping on both sides at once is not
    a valid alignment shape.
    """
    if not pred_group or not gt_group:
        raise GroupShapeError("phi requires non-empty groups on both sides")
    if min(len(pred_group), len(gt_group)) != 1:
        raise GroupShapeError(
            f"group pair must be 1-to-n or n-to-1, got {len(pred_group)}x{len(gt_group)}"
        )
    total = 0.0
    for p in pred_group:
        for g in gt_group:
            total += iou(p, g)
    return total / (len(pred_group) * len(gt_group))
