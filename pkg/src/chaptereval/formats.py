"""Parsers and serializers for every external text format.

Canonical chapter/transcript JSON is the interchange hub; chapter lists,
WebVTT chapter files, and WebVTT/SRT transcripts all convert through it.
This module also owns the text normalization and tokenization rules used
by every similarity scorer.
"""
from __future__ import annotations

import json
import re
import unicodedata
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from .core import Chapter, ChapterTimeline, Source, TranscriptSegment
from .errors import (
    CanonicalFormatError,
    CueSyntaxError,
    InvalidChapterError,
    MissingDurationError,
    NonMonotonicTimestampError,
    TimestampSyntaxError,
)


class SourceFormat(Enum):
    CANONICAL_JSON = "canonical_json"
    TIMESTAMP_LIST = "timestamp_list"
    WEBVTT_CHAPTERS = "webvtt_chapters"


@dataclass(frozen=True)
class ChapterDocument:
    """A parsed chapter timeline plus the format it came from."""

    timeline: ChapterTimeline
    source_format: SourceFormat


@dataclass(frozen=True)
class TranscriptDocument:
    """An ordered list of transcript segments for one video."""

    segments: tuple
    video_id: str = ""
    language: Optional[str] = None

    def __post_init__(self):
        segments = tuple(self.segments)
        starts = [s.start for s in segments]
        if starts != sorted(starts):
            # stable for ties by construction; only ordering is enforced here
            segments = tuple(sorted(segments, key=lambda s: s.start))
        object.__setattr__(self, "segments", segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)


# ---------------------------------------------------------------------------
# Timestamps
# ---------------------------------------------------------------------------

_TIMESTAMP_RE = re.compile(
    r"^(?:(?P<h>\d{1,3}):)?(?P<m>\d{1,2}):(?P<s>\d{1,2})(?:\.(?P<ms>\d{1,3}))?$",
    re.ASCII,
)


def parse_timestamp(text: str) -> float:
    """Parse hh:mm:ss, h:mm:ss, mm:ss, or hh:mm:ss.mmm into seconds.

    Raises TimestampSyntaxError carrying the column of the offending field.
    """
    m = _TIMESTAMP_RE.match(text.strip())
    if m is None:
        raise TimestampSyntaxError(f"unrecognized timestamp {text!r}", column=0)
    minutes = int(m.group("m"))
    seconds = int(m.group("s"))
    if minutes >= 60:
        raise TimestampSyntaxError(
            f"minutes field must be below 60 in {text!r}", column=m.start("m")
        )
    if seconds >= 60:
        raise TimestampSyntaxError(
            f"seconds field must be below 60 in {text!r}", column=m.start("s")
        )
    hours = int(m.group("h")) if m.group("h") else 0
    millis = int(m.group("ms").ljust(3, "0")) if m.group("ms") else 0
    return hours * 3600.0 + minutes * 60.0 + seconds + millis / 1000.0


def format_timestamp(seconds: float, with_millis: bool = False) -> str:
    """Render seconds as hh:mm:ss (flooring) or hh:mm:ss.mmm."""
    if seconds < 0:
        raise ValueError(f"cannot format negative timestamp {seconds}")
    whole = int(seconds)
    h, rem = divmod(whole, 3600)
    m, s = divmod(rem, 60)
    base = f"{h:02d}:{m:02d}:{s:02d}"
    if with_millis:
        ms = int(round((seconds - whole) * 1000))
        if ms == 1000:  # rounding carry
            return format_timestamp(whole + 1.0, with_millis=True)
        return f"{base}.{ms:03d}"
    return base


# ---------------------------------------------------------------------------
# Text normalization (shared by all lexical scoring)
# ---------------------------------------------------------------------------

# Unicode ranges segmented per code point: CJK ideographs plus kana.
_CJK_RANGES = (
    (0x3040, 0x30FF),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
)


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def normalize_text(text: str) -> str:
    """Unicode NFC, lowercase, whitespace collapsed to single spaces."""
    text = unicodedata.normalize("NFC", text)
    return " ".join(text.lower().split())


def tokenize(text: str) -> List[str]:
    """Split normalized text on whitespace, strip edge punctuation, split CJK per code point."""
    tokens: List[str] = []
    for raw in normalize_text(text).split():
        word = _strip_edge_punct(raw)
        if not word:
            continue
        run = []
        for ch in word:
            if _is_cjk(ch):
                if run:
                    tokens.append("".join(run))
                    run = []
                tokens.append(ch)
            else:
                run.append(ch)
        if run:
            tokens.append("".join(run))
    return tokens


def _strip_edge_punct(word: str) -> str:
    start, end = 0, len(word)
    while start < end and unicodedata.category(word[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(word[end - 1]).startswith("P"):
        end -= 1
    return word[start:end]


# ---------------------------------------------------------------------------
# Chapter lists ("00:00 Intro" per line)
# ---------------------------------------------------------------------------

_LIST_LINE_RE = re.compile(r"^(?P<ts>\S+)(?:\s+-\s+|\s+)(?P<title>.*)$")


def parse_chapter_list(
    text: str, duration: Optional[float] = None, video_id: str = ""
) -> ChapterDocument:
    """Parse a start-timestamp + title list into a timeline.

    Each chapter ends where the next begins. The final chapter needs either
    an explicit `duration` or a trailing timestamp-only end line.
    """
    entries = []  # (start, title)
    end_marker: Optional[float] = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if end_marker is not None:
            raise NonMonotonicTimestampError(
                f"line {lineno}: content after the timestamp-only end line"
            )
        m = _LIST_LINE_RE.match(line)
        if m is not None:
            start = parse_timestamp(m.group("ts"))
            title = m.group("title").strip()
        else:
            # a bare timestamp marks the end of the final chapter
            start = parse_timestamp(line)
            title = ""
        if entries and start <= entries[-1][0]:
            raise NonMonotonicTimestampError(
                f"line {lineno}: timestamp {line.split()[0]} is not after the previous chapter"
            )
        if title:
            entries.append((start, title))
        else:
            end_marker = start
    if not entries:
        raise InvalidChapterError("chapter list has no chapters")

    last_end = end_marker if end_marker is not None else duration
    if last_end is None:
        raise MissingDurationError(
            "final chapter has no end: pass a video duration or add a timestamp-only end line"
        )
    if last_end <= entries[-1][0]:
        raise NonMonotonicTimestampError(
            f"video duration {last_end} does not extend past the last chapter start"
        )

    chapters = []
    for (start, title), (next_start, _) in zip(entries, entries[1:] + [(last_end, "")]):
        chapters.append(Chapter(start=start, end=next_start, short_title=title))
    timeline = ChapterTimeline(video_id=video_id, chapters=tuple(chapters), duration=duration)
    return ChapterDocument(timeline=timeline, source_format=SourceFormat.TIMESTAMP_LIST)


def serialize_chapter_list(timeline: ChapterTimeline) -> str:
    """Render a timeline as a start-timestamp + title list with an end line."""
    lines = [f"{format_timestamp(c.start)} {c.short_title}".rstrip() for c in timeline]
    lines.append(format_timestamp(timeline.chapters[-1].end))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# WebVTT / SRT
# ---------------------------------------------------------------------------

_CUE_TIMING_RE = re.compile(
    r"^\s*(?P<start>[\d:.,]+)\s+-->\s+(?P<end>[\d:.,]+)(?:\s+.*)?$"
)


def _parse_cue_timestamp(text: str, cue_index: int) -> float:
    try:
        return parse_timestamp(text.replace(",", "."))
    except TimestampSyntaxError as exc:
        raise CueSyntaxError(f"cue {cue_index}: bad timestamp {text!r}", cue_index) from exc


def _parse_cue_blocks(lines, cue_index_offset=0):
    """Yield (index, start_s, text) for each --> cue block in the given lines."""
    cues = []
    i = 0
    cue_index = cue_index_offset
    while i < len(lines):
        line = lines[i].strip()
        if "-->" in line:
            m = _CUE_TIMING_RE.match(line)
            if m is None:
                raise CueSyntaxError(f"cue {cue_index}: bad timing line {line!r}", cue_index)
            start = _parse_cue_timestamp(m.group("start"), cue_index)
            end = _parse_cue_timestamp(m.group("end"), cue_index)
            if end < start:
                raise CueSyntaxError(
                    f"cue {cue_index}: end {m.group('end')} precedes start", cue_index
                )
            i += 1
            text_lines = []
            while i < len(lines) and lines[i].strip():
                text_lines.append(lines[i].strip())
                i += 1
            cues.append((cue_index, start, end, " ".join(text_lines)))
            cue_index += 1
        else:
            i += 1
    return cues


def parse_vtt_transcript(text: str, video_id: str = "") -> TranscriptDocument:
    """Parse a WebVTT file into ASR transcript segments (one per cue)."""
    lines = text.splitlines()
    if not lines or not lines[0].lstrip("﻿").startswith("WEBVTT"):
        raise CueSyntaxError("missing WEBVTT header", cue_index=-1)
    segments = []
    for idx, start, _end, cue_text in _parse_cue_blocks(lines[1:]):
        if not cue_text.strip():
            warnings.warn(f"skipping empty cue {idx}", stacklevel=2)
            continue
        segments.append(TranscriptSegment(start=start, text=cue_text, source=Source.ASR))
    return TranscriptDocument(segments=tuple(segments), video_id=video_id)


def parse_srt_transcript(text: str, video_id: str = "") -> TranscriptDocument:
    """Parse an SRT file into ASR transcript segments (one per cue)."""
    segments = []
    for idx, start, _end, cue_text in _parse_cue_blocks(text.splitlines()):
        if not cue_text.strip():
            warnings.warn(f"skipping empty cue {idx}", stacklevel=2)
            continue
        segments.append(TranscriptSegment(start=start, text=cue_text, source=Source.ASR))
    return TranscriptDocument(segments=tuple(segments), video_id=video_id)


def parse_vtt_chapters(text: str, video_id: str = "") -> ChapterDocument:
    """Parse a WebVTT chapters file (cue text = chapter title)."""
    lines = text.splitlines()
    if not lines or not lines[0].lstrip("﻿").startswith("WEBVTT"):
        raise CueSyntaxError("missing WEBVTT header", cue_index=-1)
    chapters = []
    for idx, start, end, cue_text in _parse_cue_blocks(lines[1:]):
        if end <= start:
            raise CueSyntaxError(f"cue {idx}: chapter has no duration", idx)
        chapters.append(Chapter(start=start, end=end, short_title=cue_text))
    if not chapters:
        raise InvalidChapterError("WebVTT chapter file has no cues")
    timeline = ChapterTimeline(video_id=video_id, chapters=tuple(chapters))
    return ChapterDocument(timeline=timeline, source_format=SourceFormat.WEBVTT_CHAPTERS)


def serialize_vtt_chapters(timeline: ChapterTimeline) -> str:
    """Render a timeline as a WebVTT chapters file."""
    parts = ["WEBVTT", ""]
    for chapter in timeline:
        parts.append(
            f"{format_timestamp(chapter.start, with_millis=True)} --> "
            f"{format_timestamp(chapter.end, with_millis=True)}"
        )
        parts.append(chapter.short_title)
        parts.append("")
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------


def _round3(value: float) -> float:
    # keeps serialized floats at <= 3 decimal places (millisecond precision)
    return float(format(value, ".3f"))


def timeline_to_dict(timeline: ChapterTimeline) -> dict:
    return {
        "video_id": timeline.video_id,
        "duration_s": None if timeline.duration is None else _round3(timeline.duration),
        "chapters": [
            {
                "start_s": _round3(c.start),
                "end_s": _round3(c.end),
                "short_title": c.short_title,
                "title": c.title,
                "abstract": c.abstract,
                "introduction": c.introduction,
            }
            for c in timeline
        ],
    }


def serialize_canonical(timeline: ChapterTimeline) -> str:
    """Serialize a timeline as canonical chapter JSON (stable key order, 1 ms floats)."""
    return json.dumps(timeline_to_dict(timeline), ensure_ascii=False, indent=2) + "\n"


def _require(mapping: dict, key: str, types, where: str):
    if key not in mapping:
        raise CanonicalFormatError(f"{where}: missing key {key!r}")
    value = mapping[key]
    if not isinstance(value, types):
        raise CanonicalFormatError(f"{where}: key {key!r} has wrong type {type(value).__name__}")
    return value


def parse_canonical(text: str) -> ChapterDocument:
    """Parse canonical chapter JSON back into a timeline."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CanonicalFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CanonicalFormatError("canonical document must be a JSON object")
    video_id = _require(doc, "video_id", str, "document")
    duration = doc.get("duration_s")
    if duration is not None and not isinstance(duration, (int, float)):
        raise CanonicalFormatError("duration_s must be a number or null")
    raw_chapters = _require(doc, "chapters", list, "document")
    chapters = []
    for i, item in enumerate(raw_chapters):
        if not isinstance(item, dict):
            raise CanonicalFormatError(f"chapters[{i}] must be an object")
        start = _require(item, "start_s", (int, float), f"chapters[{i}]")
        end = _require(item, "end_s", (int, float), f"chapters[{i}]")
        title = _require(item, "short_title", str, f"chapters[{i}]")
        optional = {}
        for key in ("title", "abstract", "introduction"):
            value = item.get(key)
            if value is not None and not isinstance(value, str):
                raise CanonicalFormatError(f"chapters[{i}].{key} must be a string or null")
            optional[key] = value
        try:
            chapters.append(Chapter(start=float(start), end=float(end), short_title=title, **optional))
        except InvalidChapterError as exc:
            raise CanonicalFormatError(f"chapters[{i}]: {exc}") from exc
    try:
        timeline = ChapterTimeline(
            video_id=video_id,
            chapters=tuple(chapters),
            duration=None if duration is None else float(duration),
        )
    except InvalidChapterError as exc:
        raise CanonicalFormatError(str(exc)) from exc
    return ChapterDocument(timeline=timeline, source_format=SourceFormat.CANONICAL_JSON)


def transcript_to_dict(doc: TranscriptDocument) -> dict:
    return {
        "video_id": doc.video_id,
        "segments": [
            {"start_s": _round3(s.start), "text": s.text, "source": s.source.value}
            for s in doc.segments
        ],
    }


def serialize_canonical_transcript(doc: TranscriptDocument) -> str:
    """Serialize a transcript as canonical transcript JSON."""
    return json.dumps(transcript_to_dict(doc), ensure_ascii=False, indent=2) + "\n"


def parse_canonical_transcript(text: str) -> TranscriptDocument:
    """Parse canonical transcript JSON."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CanonicalFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CanonicalFormatError("canonical transcript must be a JSON object")
    video_id = _require(doc, "video_id", str, "document")
    raw_segments = _require(doc, "segments", list, "document")
    segments = []
    for i, item in enumerate(raw_segments):
        if not isinstance(item, dict):
            raise CanonicalFormatError(f"segments[{i}] must be an object")
        start = _require(item, "start_s", (int, float), f"segments[{i}]")
        text_value = _require(item, "text", str, f"segments[{i}]")
        source_value = _require(item, "source", str, f"segments[{i}]")
        try:
            source = Source(source_value)
        except ValueError as exc:
            raise CanonicalFormatError(
                f"segments[{i}].source must be 'asr' or 'visual', got {source_value!r}"
            ) from exc
        try:
            segments.append(TranscriptSegment(start=float(start), text=text_value, source=source))
        except InvalidChapterError as exc:
            raise CanonicalFormatError(f"segments[{i}]: {exc}") from exc
    return TranscriptDocument(segments=tuple(segments), video_id=video_id)
