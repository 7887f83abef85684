"""Constrained many-to-one chapter matching and the one-to-one contrast.

The group matcher splits both chapter sequences into aligned contiguous
group pairs, each pair grouping on at most one side (1-to-n or n-to-1),
covering every chapter exactly once, and maximizing the summed temporal
group score. A warping path that revisits an index would put one chapter
into two groups and break the disjointness constraint, so the search runs
over segmentations directly instead of over raw warping paths.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

from .core import Chapter, ChapterTimeline, iou, phi
from .errors import EmptyTimelineError, GroupShapeError, InstanceTooLargeError

BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class GroupPair:
    """One aligned group: contiguous index ranges into P and G plus their score."""

    pred_indices: Tuple[int, ...]
    gt_indices: Tuple[int, ...]
    phi: float

    def __post_init__(self):
        if not self.pred_indices or not self.gt_indices:
            raise GroupShapeError("group pair has an empty side")
        if min(len(self.pred_indices), len(self.gt_indices)) != 1:
            raise GroupShapeError(
                f"group pair must be 1-to-n or n-to-1, got "
                f"{len(self.pred_indices)}x{len(self.gt_indices)}"
            )


@dataclass(frozen=True)
class GroupMatching:
    """An ordered partition of both chapter sequences into aligned group pairs."""

    groups: Tuple[GroupPair, ...]
    objective: float

    def pred_cover(self) -> List[int]:
        return [i for g in self.groups for i in g.pred_indices]

    def gt_cover(self) -> List[int]:
        return [j for g in self.groups for j in g.gt_indices]


@dataclass(frozen=True)
class OneToOneMatching:
    """Order-preserving one-to-one index pairs with their total score."""

    pairs: Tuple[Tuple[int, int], ...]
    total: float


def _check_timelines(pred: ChapterTimeline, gt: ChapterTimeline):
    if len(pred) == 0 or len(gt) == 0:
        raise EmptyTimelineError("both timelines must contain at least one chapter")


def _iou_matrix(pred: Sequence[Chapter], gt: Sequence[Chapter]):
    return [[iou(p, g) for g in gt] for p in pred]


def match_groups(pred: ChapterTimeline, gt: ChapterTimeline) -> GroupMatching:
    """Find the maximum-score constrained many-to-one group matching.

    Dynamic program over prefix pairs: state (i, j) holds the best matching
    of the first i predicted and j ground-truth chapters, extended either by
    one predicted chapter against a run of k ground-truth chapters or the
    mirror image. O(|P|*|G|*(|P|+|G|)) after prefix-summing the IoU matrix.

    Ties resolve deterministically: fewer groups first, then grouping on the
    ground-truth side, then the shorter trailing run.
    """
    _check_timelines(pred, gt)
    P = list(pred.chapters)
    G = list(gt.chapters)
    n, m = len(P), len(G)
    ious = _iou_matrix(P, G)

    # row_prefix[i][j] = sum of ious[i][0..j-1]; col_prefix[j][i] mirrors it
    row_prefix = [[0.0] * (m + 1) for _ in range(n)]
    for i in range(n):
        for j in range(m):
            row_prefix[i][j + 1] = row_prefix[i][j] + ious[i][j]
    col_prefix = [[0.0] * (n + 1) for _ in range(m)]
    for j in range(m):
        for i in range(n):
            col_prefix[j][i + 1] = col_prefix[j][i] + ious[i][j]

    NEG = float("-inf")
    # best[i][j] = (objective, group_count); back[i][j] = (side, k)
    best = [[(NEG, 0)] * (m + 1) for _ in range(n + 1)]
    back: List[List[Tuple[str, int]]] = [[("", 0)] * (m + 1) for _ in range(n + 1)]
    best[0][0] = (0.0, 0)

    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            cand_obj, cand_groups, cand_back = NEG, 0, ("", 0)
            # scan order doubles as the tie-break: gt-side runs first, short runs first
            if i >= 1:
                # last group: predicted chapter i-1 against gt run [j-k, j)
                for k in range(1, j + 1):
                    prev_obj, prev_groups = best[i - 1][j - k]
                    if prev_obj == NEG:
                        continue
                    obj = prev_obj + (row_prefix[i - 1][j] - row_prefix[i - 1][j - k]) / k
                    if obj > cand_obj or (obj == cand_obj and prev_groups + 1 < cand_groups):
                        cand_obj, cand_groups, cand_back = obj, prev_groups + 1, ("gt_run", k)
            if j >= 1:
                # last group: pred run [i-k, i) against ground-truth chapter j-1
                for k in range(2, i + 1):  # k=1 already covered by the gt_run branch
                    prev_obj, prev_groups = best[i - k][j - 1]
                    if prev_obj == NEG:
                        continue
                    obj = prev_obj + (col_prefix[j - 1][i] - col_prefix[j - 1][i - k]) / k
                    if obj > cand_obj or (obj == cand_obj and prev_groups + 1 < cand_groups):
                        cand_obj, cand_groups, cand_back = obj, prev_groups + 1, ("pred_run", k)

            best[i][j] = (cand_obj, cand_groups)
            back[i][j] = cand_back

    final_obj, _ = best[n][m]
    if final_obj == NEG:
        raise GroupShapeError("no valid group partition exists")  # unreachable for n,m >= 1

    groups: List[GroupPair] = []
    i, j = n, m
    while i > 0 or j > 0:
        side, k = back[i][j]
        if side == "gt_run":
            pred_idx = (i - 1,)
            gt_idx = tuple(range(j - k, j))
            i, j = i - 1, j - k
        else:
            pred_idx = tuple(range(i - k, i))
            gt_idx = (j - 1,)
            i, j = i - k, j - 1
        groups.append(
            GroupPair(
                pred_indices=pred_idx,
                gt_indices=gt_idx,
                phi=phi([P[a] for a in pred_idx], [G[b] for b in gt_idx]),
            )
        )
    groups.reverse()
    return GroupMatching(groups=tuple(groups), objective=sum(g.phi for g in groups))


def _compositions(total: int, parts: int):
    """All orderings of `parts` positive integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def match_groups_bruteforce(pred: ChapterTimeline, gt: ChapterTimeline) -> GroupMatching:
    """Exhaustively enumerate every valid partition; the oracle for match_groups."""
    _check_timelines(pred, gt)
    P = list(pred.chapters)
    G = list(gt.chapters)
    n, m = len(P), len(G)
    if n > BRUTE_FORCE_LIMIT or m > BRUTE_FORCE_LIMIT:
        raise InstanceTooLargeError(
            f"brute force is limited to {BRUTE_FORCE_LIMIT} chapters per side, got {n}x{m}"
        )

    best: GroupMatching | None = None
    for k in range(1, min(n, m) + 1):
        for pred_parts in _compositions(n, k):
            for gt_parts in _compositions(m, k):
                if any(min(a, b) != 1 for a, b in zip(pred_parts, gt_parts)):
                    continue
                groups = []
                pi = gj = 0
                for a, b in zip(pred_parts, gt_parts):
                    pred_idx = tuple(range(pi, pi + a))
                    gt_idx = tuple(range(gj, gj + b))
                    groups.append(
                        GroupPair(
                            pred_indices=pred_idx,
                            gt_indices=gt_idx,
                            phi=phi([P[x] for x in pred_idx], [G[y] for y in gt_idx]),
                        )
                    )
                    pi += a
                    gj += b
                objective = sum(g.phi for g in groups)
                if (
                    best is None
                    or objective > best.objective
                    or (objective == best.objective and len(groups) < len(best.groups))
                ):
                    best = GroupMatching(groups=tuple(groups), objective=objective)
    assert best is not None
    return best


def match_one_to_one(
    pred: ChapterTimeline,
    gt: ChapterTimeline,
    pair_score: Callable[[Chapter, Chapter], float],
) -> OneToOneMatching:
    """Order-preserving one-to-one assignment maximizing the summed pair score.

    Longest-common-subsequence-style dynamic program; pairs scoring zero are
    dropped from the result.
    """
    _check_timelines(pred, gt)
    P = list(pred.chapters)
    G = list(gt.chapters)
    n, m = len(P), len(G)
    scores = [[pair_score(p, g) for g in G] for p in P]

    dp = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dp[i][j] = max(dp[i - 1][j], dp[i][j - 1], dp[i - 1][j - 1] + scores[i - 1][j - 1])

    pairs: List[Tuple[int, int]] = []
    i, j = n, m
    while i > 0 and j > 0:
        if dp[i][j] == dp[i - 1][j]:
            i -= 1
        elif dp[i][j] == dp[i][j - 1]:
            j -= 1
        else:
            if scores[i - 1][j - 1] > 0:
                pairs.append((i - 1, j - 1))
            i, j = i - 1, j - 1
    pairs.reverse()
    return OneToOneMatching(pairs=tuple(pairs), total=dp[n][m])
