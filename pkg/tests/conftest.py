"""Shared fixtures and seeded generators used across the suite."""
import random

import pytest

from chaptereval import Chapter, ChapterTimeline

WORDS = (
    "intro", "overview", "setup", "demo", "results", "summary", "questions",
    "background", "method", "analysis", "discussion", "outro", "review",
    "deep", "dive", "quick", "tour", "main", "points", "closing",
)


def random_timeline(rng: random.Random, max_chapters: int = 5, span: float = 600.0,
                    min_chapters: int = 1, video_id: str = "v") -> ChapterTimeline:
    """Random non-overlapping titled chapters inside [0, span]."""
    n = rng.randint(min_chapters, max_chapters)
    # 2n sorted cut points with enough separation to keep chapters non-degenerate
    while True:
        cuts = sorted(rng.uniform(0.0, span) for _ in range(2 * n))
        if all(cuts[i + 1] - cuts[i] > 0.05 for i in range(0, 2 * n - 1, 2)):
            break
    chapters = []
    for i in range(n):
        start, end = cuts[2 * i], cuts[2 * i + 1]
        title = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 4)))
        chapters.append(Chapter(start=start, end=end, short_title=title))
    return ChapterTimeline(video_id=video_id, chapters=tuple(chapters))


def contiguous_timeline(rng: random.Random, n_chapters: int, span: float = 600.0,
                        tokens_per_title=(2, 6), min_len: float = 5.0,
                        video_id: str = "v") -> ChapterTimeline:
    """Back-to-back chapters tiling [0, span] with multi-token titles."""
    while True:
        cuts = sorted(rng.uniform(1.0, span - 1.0) for _ in range(n_chapters - 1))
        bounds = [0.0] + cuts + [span]
        if all(b - a >= min_len for a, b in zip(bounds, bounds[1:])):
            break
    chapters = []
    for i in range(n_chapters):
        title = " ".join(rng.choice(WORDS) for _ in range(rng.randint(*tokens_per_title)))
        chapters.append(Chapter(start=bounds[i], end=bounds[i + 1], short_title=title))
    return ChapterTimeline(video_id=video_id, chapters=tuple(chapters))


@pytest.fixture
def worked_pair():
    """The 2-prediction vs 3-ground-truth worked instance used throughout."""
    pred = ChapterTimeline(
        "worked",
        (Chapter(0, 10, "intro overview"), Chapter(10, 20, "main results")),
    )
    gt = ChapterTimeline(
        "worked",
        (Chapter(0, 5, "intro"), Chapter(5, 10, "overview"), Chapter(10, 20, "main results")),
    )
    return pred, gt
