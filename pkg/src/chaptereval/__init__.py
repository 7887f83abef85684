"""Granularity-robust evaluation toolkit for long-form video chaptering."""

__version__ = "0.1.0"

from .alignment import (
    GroupMatching,
    GroupPair,
    OneToOneMatching,
    match_groups,
    match_groups_bruteforce,
    match_one_to_one,
)
from .core import (
    DEFAULT_BUCKETS,
    BucketLabel,
    Chapter,
    ChapterTimeline,
    DurationBucket,
    Source,
    TranscriptSegment,
    bucket_of,
    iou,
    phi,
)
from .formats import (
    ChapterDocument,
    SourceFormat,
    TranscriptDocument,
    format_timestamp,
    normalize_text,
    parse_canonical,
    parse_canonical_transcript,
    parse_chapter_list,
    parse_srt_transcript,
    parse_timestamp,
    parse_vtt_chapters,
    parse_vtt_transcript,
    serialize_canonical,
    serialize_canonical_transcript,
    tokenize,
)
from .metrics import (
    EvalReport,
    GraceNormalization,
    MetricConfig,
    VideoScores,
    aggregate,
    chapter_cider,
    cider_pairs,
    grace,
    grpo_reward,
    render_markdown,
    score_video,
    segmentation_scores,
    soda,
)
from .pipeline import (
    BoundaryStatus,
    BoundaryVerdict,
    MultimodalTranscript,
    PerturbMode,
    interleave,
    parse_rendered_transcript,
    perturb_granularity,
    render_transcript,
    snap_boundaries,
    verify_boundaries,
)
from .textsim import (
    ExternalScorer,
    LexicalScorer,
    ScoreRequest,
    ScoreResponse,
    ScorerKind,
    SimilarityScorer,
    cider_d,
    concat_group_text,
    lexical_f1,
    score_batch,
)

__all__ = [name for name in dir() if not name.startswith("_")]
