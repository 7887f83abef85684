"""Reported metrics: GRACE, SODA, segmentation F1/tIoU, chapter CIDEr, reward.

Per-video scoring is pure; corpus-level CIDEr and bucket aggregation are a
sequential reduce over per-video results. All percentage metrics are on a
0-100 scale; the reward is reported both raw and normalized to [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .alignment import GroupMatching, match_groups, match_one_to_one
from .core import (
    DEFAULT_BUCKETS,
    BucketLabel,
    ChapterTimeline,
    DurationBucket,
    bucket_of,
    iou,
    validate_bucket_scheme,
)
from .errors import ConfigError, EmptyCorpusError
from .textsim import (
    LexicalScorer,
    ScoreRequest,
    SimilarityScorer,
    cider_d,
    concat_group_text,
)

DEFAULT_F1_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))

METRIC_FIELDS = (
    "f1",
    "tiou",
    "precision",
    "recall",
    "soda",
    "cider",
    "grace",
    "reward_raw",
    "reward_norm",
)


class GraceNormalization(Enum):
    PER_GROUP_MEAN = "per_group_mean"
    GT_COUNT = "gt_count"
    NONE = "none"


@dataclass(frozen=True)
class MetricConfig:
    """Configuration surface for every reported metric column."""

    similarity: SimilarityScorer = field(default_factory=LexicalScorer)
    text_field: str = "short_title"
    grace_normalization: GraceNormalization = GraceNormalization.PER_GROUP_MEAN
    f1_thresholds: Tuple[float, ...] = DEFAULT_F1_THRESHOLDS
    buckets: Tuple[DurationBucket, ...] = DEFAULT_BUCKETS

    def __post_init__(self):
        thresholds = tuple(self.f1_thresholds)
        if not thresholds:
            raise ConfigError("f1_thresholds must not be empty")
        if any(not (0.0 < t <= 1.0) for t in thresholds):
            raise ConfigError(f"f1_thresholds must lie in (0, 1], got {thresholds}")
        if any(a >= b for a, b in zip(thresholds, thresholds[1:])):
            raise ConfigError(f"f1_thresholds must be strictly increasing, got {thresholds}")
        object.__setattr__(self, "f1_thresholds", thresholds)
        validate_bucket_scheme(self.buckets)
        if self.text_field not in ("short_title", "title", "abstract", "introduction"):
            raise ConfigError(f"unknown text_field {self.text_field!r}")

    def echo(self) -> dict:
        return {
            "similarity": self.similarity.describe(),
            "text_field": self.text_field,
            "grace_normalization": self.grace_normalization.value,
            "f1_thresholds": list(self.f1_thresholds),
            "buckets": [
                {"label": b.label.value, "min_s": b.min_s, "max_s": b.max_s}
                for b in self.buckets
            ],
        }


@dataclass(frozen=True)
class VideoScores:
    """All per-video metric values plus the group matching behind them."""

    video_id: str
    duration: float
    f1: float
    tiou: float
    precision: float
    recall: float
    soda: float
    cider: float
    grace: float
    reward_raw: float
    reward_norm: float
    matching: Optional[GroupMatching] = None
    error: Optional[str] = None

    @classmethod
    def zero(cls, video_id: str, duration: float, error: str) -> "VideoScores":
        return cls(
            video_id=video_id,
            duration=duration,
            f1=0.0,
            tiou=0.0,
            precision=0.0,
            recall=0.0,
            soda=0.0,
            cider=0.0,
            grace=0.0,
            reward_raw=0.0,
            reward_norm=0.0,
            matching=None,
            error=error,
        )

    def to_dict(self) -> dict:
        out = {"video_id": self.video_id, "duration_s": self.duration}
        for name in METRIC_FIELDS:
            out[name] = getattr(self, name)
        out["matching"] = (
            None
            if self.matching is None
            else [
                {"pred": list(g.pred_indices), "gt": list(g.gt_indices), "phi": g.phi}
                for g in self.matching.groups
            ]
        )
        out["error"] = self.error
        return out


# ---------------------------------------------------------------------------
# Individual metrics
# ---------------------------------------------------------------------------


def _normalize_grace(raw: float, matching: GroupMatching, gt_count: int, mode: GraceNormalization) -> float:
    if mode is GraceNormalization.PER_GROUP_MEAN:
        return raw / len(matching.groups) * 100.0
    if mode is GraceNormalization.GT_COUNT:
        return raw / gt_count * 100.0
    return raw * 100.0


def grace(
    pred: ChapterTimeline,
    gt: ChapterTimeline,
    cfg: MetricConfig,
    matching: Optional[GroupMatching] = None,
) -> float:
    """Granularity-robust score: sum over matched groups of phi times group-text similarity."""
    if matching is None:
        matching = match_groups(pred, gt)
    requests = []
    for index, group in enumerate(matching.groups):
        cand = concat_group_text([pred.chapters[i] for i in group.pred_indices], cfg.text_field)
        ref = concat_group_text([gt.chapters[j] for j in group.gt_indices], cfg.text_field)
        requests.append(ScoreRequest(id=str(index), candidate=cand, reference=ref))
    responses = {r.id: r.score for r in cfg.similarity.score_batch(requests)}
    raw = sum(g.phi * responses[str(i)] for i, g in enumerate(matching.groups))
    return _normalize_grace(raw, matching, len(gt), cfg.grace_normalization)


def soda(pred: ChapterTimeline, gt: ChapterTimeline, cfg: MetricConfig) -> float:
    """One-to-one story-oriented score: optimal order-preserving IoU x similarity assignment."""
    ious = [[iou(p, g) for g in gt.chapters] for p in pred.chapters]
    requests = []
    for i, p in enumerate(pred.chapters):
        for j, g in enumerate(gt.chapters):
            if ious[i][j] > 0.0:
                requests.append(
                    ScoreRequest(
                        id=f"{i}:{j}",
                        candidate=concat_group_text([p], cfg.text_field),
                        reference=concat_group_text([g], cfg.text_field),
                    )
                )
    sims = {r.id: r.score for r in cfg.similarity.score_batch(requests)}
    pred_index = {chapter: i for i, chapter in enumerate(pred.chapters)}
    gt_index = {chapter: j for j, chapter in enumerate(gt.chapters)}

    def pair_score(p, g):
        i, j = pred_index[p], gt_index[g]
        if ious[i][j] <= 0.0:
            return 0.0
        return ious[i][j] * sims[f"{i}:{j}"]

    matching = match_one_to_one(pred, gt, pair_score)
    total = matching.total
    if total <= 0.0:
        return 0.0
    precision = total / len(pred)
    recall = total / len(gt)
    return 100.0 * 2 * precision * recall / (precision + recall)


def segmentation_scores(
    pred: ChapterTimeline, gt: ChapterTimeline, cfg: MetricConfig
) -> Tuple[float, float, float, float]:
    """Return (f1, tiou, precision, recall) on the 0-100 scale.

    F1 averages the matched-pair harmonic mean over the configured IoU
    thresholds; precision/recall are reported at the 0.5 threshold; tIoU is
    the symmetric mean of directional best-IoU averages.
    """
    ious = [[iou(p, g) for g in gt.chapters] for p in pred.chapters]
    pred_index = {chapter: i for i, chapter in enumerate(pred.chapters)}
    gt_index = {chapter: j for j, chapter in enumerate(gt.chapters)}

    def matched_at(threshold: float) -> int:
        matching = match_one_to_one(
            pred,
            gt,
            lambda p, g: 1.0 if ious[pred_index[p]][gt_index[g]] >= threshold else 0.0,
        )
        return len(matching.pairs)

    def f1_at(threshold: float) -> float:
        matched = matched_at(threshold)
        if matched == 0:
            return 0.0
        precision = matched / len(pred)
        recall = matched / len(gt)
        return 2 * precision * recall / (precision + recall)

    f1 = 100.0 * sum(f1_at(t) for t in cfg.f1_thresholds) / len(cfg.f1_thresholds)

    matched_half = matched_at(0.5)
    precision = 100.0 * matched_half / len(pred)
    recall = 100.0 * matched_half / len(gt)

    gt_best = sum(max(ious[i][j] for i in range(len(pred))) for j in range(len(gt))) / len(gt)
    pred_best = sum(max(ious[i][j] for j in range(len(gt))) for i in range(len(pred))) / len(pred)
    tiou = 100.0 * 0.5 * (gt_best + pred_best)
    return f1, tiou, precision, recall


def grpo_reward(
    pred: ChapterTimeline,
    gt: ChapterTimeline,
    matching: Optional[GroupMatching] = None,
) -> Tuple[float, float]:
    """Temporal-only reward: summed phi over the optimal matching, raw and per-group mean."""
    if matching is None:
        matching = match_groups(pred, gt)
    raw = matching.objective
    return raw, raw / len(matching.groups)


def cider_pairs(
    pred: ChapterTimeline, gt: ChapterTimeline, cfg: MetricConfig
) -> List[Tuple[str, str]]:
    """(candidate, reference) text pairs for CIDEr: each GT chapter paired with
    its max-IoU predicted chapter, or the empty string when nothing overlaps."""
    pairs = []
    for g in gt.chapters:
        best_iou, best_p = 0.0, None
        for p in pred.chapters:
            value = iou(p, g)
            if value > best_iou:
                best_iou, best_p = value, p
        candidate = concat_group_text([best_p], cfg.text_field) if best_p is not None else ""
        pairs.append((candidate, concat_group_text([g], cfg.text_field)))
    return pairs


def chapter_cider(pair_corpus: Sequence[Tuple[str, str]]) -> float:
    """Corpus CIDEr-D over pooled (candidate, reference) chapter pairs."""
    if not pair_corpus:
        raise EmptyCorpusError("no chapter pairs to score")
    candidates = [c for c, _ in pair_corpus]
    references = [r for _, r in pair_corpus]
    return cider_d(candidates, references)


# ---------------------------------------------------------------------------
# Per-video scoring and aggregation
# ---------------------------------------------------------------------------


def score_video(pred: ChapterTimeline, gt: ChapterTimeline, cfg: MetricConfig) -> VideoScores:
    """Compute every per-video metric for one prediction/ground-truth pair."""
    matching = match_groups(pred, gt)
    f1, tiou, precision, recall = segmentation_scores(pred, gt, cfg)
    grace_value = grace(pred, gt, cfg, matching=matching)
    soda_value = soda(pred, gt, cfg)
    reward_raw, reward_norm = grpo_reward(pred, gt, matching=matching)
    cider_value = chapter_cider(cider_pairs(pred, gt, cfg))
    return VideoScores(
        video_id=gt.video_id,
        duration=gt.effective_duration,
        f1=f1,
        tiou=tiou,
        precision=precision,
        recall=recall,
        soda=soda_value,
        cider=cider_value,
        grace=grace_value,
        reward_raw=reward_raw,
        reward_norm=reward_norm,
        matching=matching,
    )


@dataclass(frozen=True)
class BucketAggregate:
    """Macro-averaged metrics for one duration bucket (CIDEr is corpus-level)."""

    label: str
    n_videos: int
    values: Dict[str, Optional[float]]

    def to_dict(self) -> dict:
        out = {"n_videos": self.n_videos}
        out.update(self.values)
        return out


@dataclass(frozen=True)
class EvalReport:
    """Per-video scores plus bucketed aggregates and the config that made them."""

    config: dict
    videos: Tuple[VideoScores, ...]
    buckets: Dict[str, BucketAggregate]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "videos": [v.to_dict() for v in self.videos],
            "buckets": {label: agg.to_dict() for label, agg in self.buckets.items()},
        }


def aggregate(
    videos: Sequence[VideoScores],
    cfg: MetricConfig,
    cider_pairs_by_video: Optional[Dict[str, Sequence[Tuple[str, str]]]] = None,
) -> EvalReport:
    """Macro-average per-video metrics per duration bucket and overall.

    When per-video CIDEr pair corpora are supplied, bucket CIDEr is computed
    corpus-level over the pooled pairs rather than averaged from per-video
    values.
    """
    if not videos:
        raise EmptyCorpusError("cannot aggregate an empty score list")
    videos = tuple(sorted(videos, key=lambda v: v.video_id))
    specific = validate_bucket_scheme(cfg.buckets)

    members: Dict[str, List[VideoScores]] = {b.label.value: [] for b in specific}
    members[BucketLabel.ALL.value] = list(videos)
    for video in videos:
        bucket = bucket_of(video.duration, cfg.buckets)
        if bucket.label is not BucketLabel.ALL:
            members[bucket.label.value].append(video)

    buckets: Dict[str, BucketAggregate] = {}
    ordered_labels = [b.label.value for b in specific] + [BucketLabel.ALL.value]
    for label in ordered_labels:
        group = members[label]
        if not group:
            buckets[label] = BucketAggregate(
                label=label, n_videos=0, values={name: None for name in METRIC_FIELDS}
            )
            continue
        values: Dict[str, Optional[float]] = {
            name: sum(getattr(v, name) for v in group) / len(group) for name in METRIC_FIELDS
        }
        if cider_pairs_by_video is not None:
            pooled = [
                pair
                for video in group
                for pair in cider_pairs_by_video.get(video.video_id, ())
            ]
            values["cider"] = chapter_cider(pooled) if pooled else 0.0
        buckets[label] = BucketAggregate(label=label, n_videos=len(group), values=values)

    return EvalReport(config=cfg.echo(), videos=videos, buckets=buckets)


_MD_COLUMNS = ("f1", "tiou", "soda", "cider", "grace")
_MD_HEADERS = ("F1", "tIoU", "S", "C", "G")


def render_markdown(report: EvalReport) -> str:
    """Render the bucketed aggregate table as markdown (F1, tIoU, S, C, G per bucket)."""
    lines = [
        "| Bucket | n | " + " | ".join(_MD_HEADERS) + " |",
        "|---|---:|" + "---:|" * len(_MD_HEADERS),
    ]
    for label, agg in report.buckets.items():
        cells = [label.capitalize(), str(agg.n_videos)]
        for name in _MD_COLUMNS:
            value = agg.values.get(name)
            cells.append("-" if value is None else f"{value:.1f}")
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
