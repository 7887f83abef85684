"""Walkthrough: getting chapters and transcripts into canonical form.

Every external format converts through one canonical JSON document, so the
rest of the toolkit only ever sees validated timelines. This script parses
a YouTube-style chapter list and a WebVTT transcript, shows the canonical
renderings, and demonstrates that parsing is a round trip.
"""
from chaptereval import (
    parse_canonical,
    parse_chapter_list,
    parse_vtt_transcript,
    serialize_canonical,
    serialize_canonical_transcript,
)

CHAPTER_LIST = """\
00:00 Intro
01:30 - Setting up the environment
07:45 Writing the first test
12:10 Wrap up
"""

VTT = """\
WEBVTT

00:00:02.000 --> 00:00:05.500
welcome back to the channel

00:00:05.500 --> 00:00:09.000
today we are talking about testing
"""


def main():
    print("== chapter list -> canonical JSON ==")
    doc = parse_chapter_list(CHAPTER_LIST, duration=15 * 60.0, video_id="demo_video")
    for chapter in doc.timeline:
        print(f"  [{chapter.start:7.1f}, {chapter.end:7.1f})  {chapter.short_title}")
    canonical = serialize_canonical(doc.timeline)
    print(canonical)

    print("== round trip ==")
    again = parse_canonical(canonical).timeline
    print("  parse(serialize(x)) == x:", again == doc.timeline)

    print("== WebVTT transcript -> canonical transcript JSON ==")
    transcript = parse_vtt_transcript(VTT, video_id="demo_video")
    print(serialize_canonical_transcript(transcript))


if __name__ == "__main__":
    main()
