"""Walkthrough: assembling the multimodal transcript and checking boundaries.

The annotation flow feeds a language model one chronological text stream
built from speech recognition plus visual captions, then verifies that any
generated chapter boundaries land on real timestamps from that stream.
"""
from chaptereval import (
    Chapter,
    ChapterTimeline,
    Source,
    TranscriptSegment,
    interleave,
    render_transcript,
    snap_boundaries,
    verify_boundaries,
)
from chaptereval.formats import TranscriptDocument


def main():
    asr = TranscriptDocument(
        segments=(
            TranscriptSegment(0.0, "hey everyone welcome back", Source.ASR),
            TranscriptSegment(14.2, "let's look at the agenda", Source.ASR),
            TranscriptSegment(95.8, "first up the new dashboard", Source.ASR),
            TranscriptSegment(241.0, "now the part you have been waiting for", Source.ASR),
        ),
        video_id="weekly_update",
    )
    visual = TranscriptDocument(
        segments=(
            TranscriptSegment(1.0, "title card: weekly update", Source.VISUAL),
            TranscriptSegment(96.0, "screen shows a dashboard with charts", Source.VISUAL),
            TranscriptSegment(242.5, "demo of the drag and drop editor", Source.VISUAL),
        ),
        video_id="weekly_update",
    )

    print("== interleaved transcript (model input format) ==")
    merged = interleave(asr, visual)
    print(render_transcript(merged))

    # chapter starts proposed downstream; one is slightly off, one is wrong
    proposed = ChapterTimeline(
        "weekly_update",
        (
            Chapter(0.0, 95.8, "welcome and agenda"),
            Chapter(95.8, 240.6, "dashboard tour"),
            Chapter(240.6, 300.0, "editor demo"),
        ),
        duration=300.0,
    )
    anchors = [segment.start for segment in merged]

    print("== boundary verification against transcript timestamps ==")
    for verdict in verify_boundaries(proposed, anchors, tolerance=1.0):
        print(
            f"  chapter {verdict.chapter_index}: {verdict.status.value:<8} "
            f"delta {verdict.delta:+.2f}s (nearest anchor {verdict.anchor:.1f}s)"
        )

    print("\n== snapped timeline ==")
    for chapter in snap_boundaries(proposed, anchors, tolerance=1.0):
        print(f"  [{chapter.start:6.1f}, {chapter.end:6.1f})  {chapter.short_title}")


if __name__ == "__main__":
    main()
