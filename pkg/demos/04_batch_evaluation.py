"""Walkthrough: a full dataset evaluation with bucketed reporting.

Builds a tiny in-memory dataset of three videos in different duration
buckets, scores each prediction, aggregates per bucket, and prints the
markdown table the batch CLI writes for real runs. The same flow is
available from the shell:

    chaptereval evaluate --pred preds/ --gt gts/ --out report/
"""
from chaptereval import (
    Chapter,
    ChapterTimeline,
    MetricConfig,
    aggregate,
    cider_pairs,
    render_markdown,
    score_video,
)


def minutes(m: float) -> float:
    return m * 60.0


def main():
    cfg = MetricConfig()

    gt_short = ChapterTimeline(
        "howto_clip",
        (
            Chapter(0, minutes(3), "what we are building"),
            Chapter(minutes(3), minutes(9), "the build"),
            Chapter(minutes(9), minutes(12), "final result"),
        ),
        duration=minutes(12),
    )
    pred_short = gt_short  # a perfect prediction

    gt_medium = ChapterTimeline(
        "design_talk",
        (
            Chapter(0, minutes(5), "speaker introduction"),
            Chapter(minutes(5), minutes(13), "core principles"),
            Chapter(minutes(13), minutes(21), "case studies"),
            Chapter(minutes(21), minutes(28), "audience questions"),
        ),
        duration=minutes(28),
    )
    pred_medium = ChapterTimeline(
        "design_talk",
        (
            Chapter(0, minutes(5.5), "speaker introduction"),
            Chapter(minutes(5.5), minutes(20), "core principles case studies"),
            Chapter(minutes(20), minutes(28), "audience questions"),
        ),
        duration=minutes(28),
    )

    gt_long = ChapterTimeline(
        "deep_dive",
        (
            Chapter(0, minutes(12), "problem statement"),
            Chapter(minutes(12), minutes(30), "architecture walkthrough"),
            Chapter(minutes(30), minutes(45), "performance analysis"),
        ),
        duration=minutes(45),
    )
    pred_long = ChapterTimeline(
        "deep_dive",
        (
            Chapter(0, minutes(11), "problem statement"),
            Chapter(minutes(11), minutes(32), "system walkthrough"),
            Chapter(minutes(32), minutes(45), "benchmarks"),
        ),
        duration=minutes(45),
    )

    dataset = [
        (pred_short, gt_short),
        (pred_medium, gt_medium),
        (pred_long, gt_long),
    ]

    scores = [score_video(pred, gt, cfg) for pred, gt in dataset]
    pairs = {gt.video_id: cider_pairs(pred, gt, cfg) for pred, gt in dataset}
    report = aggregate(scores, cfg, cider_pairs_by_video=pairs)

    print("== per-video ==")
    for video in report.videos:
        print(
            f"  {video.video_id:<12} f1 {video.f1:5.1f}  tIoU {video.tiou:5.1f}  "
            f"soda {video.soda:5.1f}  grace {video.grace:5.1f}  reward {video.reward_norm:.2f}"
        )

    print("\n== bucketed report ==")
    print(render_markdown(report))


if __name__ == "__main__":
    main()
