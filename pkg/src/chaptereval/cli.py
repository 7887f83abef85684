"""Batch command-line front end.

Subcommands: evaluate (bucketed metric report), reward (per-video temporal
reward as JSON lines), perturb (granularity harness inputs), transcript
(interleave + render), convert (format conversion through canonical JSON).

Exit codes: 0 clean, 2 per-video soft errors (run completed), 1 fatal.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import shlex
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import __version__
from .core import BucketLabel, ChapterTimeline, DurationBucket
from .errors import (
    ChapterEvalError,
    ConfigError,
    MissingResponseError,
    ScorerProtocolError,
    ScorerTimeoutError,
)
from .formats import (
    parse_canonical,
    parse_canonical_transcript,
    parse_chapter_list,
    parse_srt_transcript,
    parse_vtt_chapters,
    parse_vtt_transcript,
    serialize_canonical,
    serialize_chapter_list,
    serialize_vtt_chapters,
)
from .metrics import (
    GraceNormalization,
    MetricConfig,
    VideoScores,
    aggregate,
    cider_pairs,
    render_markdown,
    score_video,
)
from .pipeline import PerturbMode, interleave, perturb_granularity, render_transcript
from .textsim import ExternalScorer, LexicalScorer

TEXT_FIELDS = ("short_title", "title", "abstract", "introduction")


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _load_timelines(path: Path) -> Dict[str, Tuple[ChapterTimeline, Path]]:
    """Load canonical chapter JSON from a file or directory, keyed by video id."""
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    if not files:
        raise ConfigError(f"no .json files under {path}")
    out: Dict[str, Tuple[ChapterTimeline, Path]] = {}
    for file in files:
        timeline = parse_canonical(_read(file)).timeline
        key = timeline.video_id or file.stem
        if key in out:
            raise ConfigError(f"duplicate video id {key!r} ({file} and {out[key][1]})")
        out[key] = (timeline, file)
    return out


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _parse_buckets(spec: str) -> Tuple[DurationBucket, ...]:
    try:
        raw = json.loads(spec)
        return tuple(
            DurationBucket(BucketLabel(item["label"]), float(item["min_s"]), float(item["max_s"]))
            for item in raw
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad --buckets value: {exc}") from exc


def _build_config(args) -> MetricConfig:
    values: dict = {}
    if args.config:
        try:
            values = json.loads(_read(Path(args.config)))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")

    sim_kind = args.sim or values.get("similarity", "lexical")
    scorer_cmd = args.scorer_cmd or values.get("scorer_cmd")
    if sim_kind == "lexical":
        scorer = LexicalScorer()
    elif sim_kind == "external":
        if not scorer_cmd:
            raise ConfigError("--sim external requires --scorer-cmd")
        argv = scorer_cmd if isinstance(scorer_cmd, list) else shlex.split(str(scorer_cmd))
        scorer = ExternalScorer(argv)
    else:
        raise ConfigError(f"unknown similarity kind {sim_kind!r}")

    kwargs: dict = {"similarity": scorer}
    field = args.field or values.get("text_field")
    if field:
        kwargs["text_field"] = field
    norm = values.get("grace_normalization")
    if norm:
        kwargs["grace_normalization"] = GraceNormalization(norm)
    thresholds = values.get("f1_thresholds")
    if thresholds:
        kwargs["f1_thresholds"] = tuple(float(t) for t in thresholds)
    buckets_spec = args.buckets or values.get("buckets")
    if buckets_spec:
        if isinstance(buckets_spec, str):
            kwargs["buckets"] = _parse_buckets(buckets_spec)
        else:
            kwargs["buckets"] = _parse_buckets(json.dumps(buckets_spec))
    return MetricConfig(**kwargs)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def cmd_evaluate(args) -> int:
    started = time.time()
    cfg = _build_config(args)
    gt_by_id = _load_timelines(Path(args.gt))
    pred_by_id = _load_timelines(Path(args.pred))

    errors: List[dict] = []
    jobs = args.jobs or os.cpu_count() or 1
    if cfg.similarity.kind.value == "external":
        jobs = 1  # funnel all batches through the single sidecar client

    def missed_pairs(gt) -> List[Tuple[str, str]]:
        # errored video: its references enter the cider pool with empty
        # candidates; no pool entries when the refs themselves are unusable
        try:
            return [("", ref) for _, ref in cider_pairs(gt, gt, cfg)]
        except ChapterEvalError:
            return []

    _SCORER_FATAL = (ScorerProtocolError, ScorerTimeoutError, MissingResponseError)

    def evaluate_one(video_id: str) -> Tuple[VideoScores, List[Tuple[str, str]]]:
        gt, _ = gt_by_id[video_id]
        if video_id not in pred_by_id:
            return VideoScores.zero(video_id, gt.effective_duration, "missing prediction"), missed_pairs(gt)
        pred, _ = pred_by_id[video_id]
        try:
            return score_video(pred, gt, cfg), cider_pairs(pred, gt, cfg)
        except _SCORER_FATAL:
            raise  # a broken similarity backend invalidates the whole run
        except ChapterEvalError as exc:
            return VideoScores.zero(video_id, gt.effective_duration, str(exc)), missed_pairs(gt)

    video_ids = sorted(gt_by_id)
    fatal: Optional[ChapterEvalError] = None
    results: List[Tuple[VideoScores, List[Tuple[str, str]]]] = []
    pool = ThreadPoolExecutor(max_workers=jobs)
    try:
        for item in pool.map(evaluate_one, video_ids):
            results.append(item)
    except _SCORER_FATAL as exc:
        fatal = exc
    finally:
        pool.shutdown(wait=True, cancel_futures=fatal is not None)

    scores = [score for score, _ in results]
    pairs_by_video = {score.video_id: pairs for (score, pairs) in results}
    for score in scores:
        if score.error:
            errors.append({"video_id": score.video_id, "error": score.error})
    if fatal is not None:
        errors.append({"video_id": None, "error": f"similarity backend failed: {fatal}"})

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if scores:
        report = aggregate(scores, cfg, cider_pairs_by_video=pairs_by_video)
        report_dict = report.to_dict()
        report_md = render_markdown(report)
    else:
        report_dict = {"config": cfg.echo(), "videos": [], "buckets": {}}
        report_md = ""
    if fatal is not None:
        report_dict["incomplete"] = True
        report_md = "**INCOMPLETE RUN** (similarity backend failed)\n\n" + report_md
    report_json = json.dumps(report_dict, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    (out_dir / "report.json").write_text(report_json, encoding="utf-8")
    (out_dir / "report.md").write_text(report_md, encoding="utf-8")

    manifest = {
        "tool_version": __version__,
        "config_hash": _sha256(json.dumps(cfg.echo(), sort_keys=True).encode("utf-8")),
        "input_digests": {
            str(path): _sha256(path.read_bytes())
            for _, path in sorted(
                list(gt_by_id.values()) + list(pred_by_id.values()), key=lambda t: str(t[1])
            )
        },
        "wall_clock_s": round(time.time() - started, 3),
        "errors": errors,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    cfg.similarity.close()
    if fatal is not None:
        print(f"error: similarity backend failed mid-run: {fatal}", file=sys.stderr)
        return 1
    return 2 if errors else 0


# ---------------------------------------------------------------------------
# reward
# ---------------------------------------------------------------------------


def cmd_reward(args) -> int:
    from .metrics import grpo_reward

    gt_by_id = _load_timelines(Path(args.gt))
    pred_by_id = _load_timelines(Path(args.pred))
    missing = sorted(set(gt_by_id) - set(pred_by_id))
    if missing:
        raise ConfigError(f"no prediction for video id(s): {', '.join(missing)}")
    for video_id in sorted(gt_by_id):
        raw, norm = grpo_reward(pred_by_id[video_id][0], gt_by_id[video_id][0])
        print(json.dumps({"video_id": video_id, "raw": raw, "normalized": norm}))
    return 0


# ---------------------------------------------------------------------------
# perturb
# ---------------------------------------------------------------------------


def cmd_perturb(args) -> int:
    mode = PerturbMode(args.mode)
    in_path = Path(args.gt)
    out_path = Path(args.out)
    if in_path.is_dir():
        out_path.mkdir(parents=True, exist_ok=True)
        for file in sorted(in_path.glob("*.json")):
            timeline = parse_canonical(_read(file)).timeline
            perturbed = perturb_granularity(timeline, mode, seed=args.seed)
            (out_path / file.name).write_text(serialize_canonical(perturbed), encoding="utf-8")
    else:
        timeline = parse_canonical(_read(in_path)).timeline
        perturbed = perturb_granularity(timeline, mode, seed=args.seed)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(serialize_canonical(perturbed), encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# transcript
# ---------------------------------------------------------------------------


def _load_transcript(path: Path):
    text = _read(path)
    suffix = path.suffix.lower()
    if suffix == ".vtt":
        return parse_vtt_transcript(text, video_id=path.stem)
    if suffix == ".srt":
        return parse_srt_transcript(text, video_id=path.stem)
    return parse_canonical_transcript(text)


def cmd_transcript(args) -> int:
    asr = _load_transcript(Path(args.asr))
    if args.visual:
        visual = _load_transcript(Path(args.visual))
    else:
        from .formats import TranscriptDocument

        visual = TranscriptDocument(segments=(), video_id=asr.video_id)
    rendered = render_transcript(interleave(asr, visual))
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    return 0


# ---------------------------------------------------------------------------
# convert
# ---------------------------------------------------------------------------

_READERS = {
    "canonical": lambda text, duration, video_id: parse_canonical(text).timeline,
    "list": lambda text, duration, video_id: parse_chapter_list(
        text, duration=duration, video_id=video_id
    ).timeline,
    "vtt-chapters": lambda text, duration, video_id: parse_vtt_chapters(
        text, video_id=video_id
    ).timeline,
}

_WRITERS = {
    "canonical": serialize_canonical,
    "list": serialize_chapter_list,
    "vtt-chapters": serialize_vtt_chapters,
}


def cmd_convert(args) -> int:
    if args.from_format not in _READERS:
        raise ConfigError(f"unknown --from format {args.from_format!r}")
    if args.to_format not in _WRITERS:
        raise ConfigError(f"unknown --to format {args.to_format!r}")
    in_path = Path(args.input)
    timeline = _READERS[args.from_format](_read(in_path), args.duration, in_path.stem)
    rendered = _WRITERS[args.to_format](timeline)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaptereval",
        description="Granularity-robust evaluation for long-form video chaptering.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="score predictions against ground truth")
    p_eval.add_argument("--pred", required=True, help="prediction file or directory")
    p_eval.add_argument("--gt", required=True, help="ground-truth file or directory")
    p_eval.add_argument("--config", help="JSON config file mirroring the metric config")
    p_eval.add_argument("--out", required=True, help="output directory for the reports")
    p_eval.add_argument("--sim", choices=["lexical", "external"], help="similarity backend")
    p_eval.add_argument("--scorer-cmd", help="external scorer command line (shell-style)")
    p_eval.add_argument("--buckets", help="JSON bucket scheme override")
    p_eval.add_argument("--field", choices=TEXT_FIELDS, help="chapter text field to score")
    p_eval.add_argument("--jobs", type=int, help="per-video parallelism (default: cores)")
    p_eval.set_defaults(func=cmd_evaluate)

    p_reward = sub.add_parser("reward", help="print per-video temporal rewards as JSON lines")
    p_reward.add_argument("--pred", required=True)
    p_reward.add_argument("--gt", required=True)
    p_reward.set_defaults(func=cmd_reward)

    p_perturb = sub.add_parser("perturb", help="emit granularity-perturbed timelines")
    p_perturb.add_argument("--gt", required=True, help="canonical JSON file or directory")
    p_perturb.add_argument("--mode", choices=["split", "merge"], required=True)
    p_perturb.add_argument("--seed", type=int, default=0)
    p_perturb.add_argument("--out", required=True)
    p_perturb.set_defaults(func=cmd_perturb)

    p_ts = sub.add_parser("transcript", help="interleave ASR + visual captions and render")
    p_ts.add_argument("--asr", required=True, help="ASR transcript (.vtt/.srt/.json)")
    p_ts.add_argument("--visual", help="visual captions (.json canonical transcript)")
    p_ts.add_argument("--out", help="output file (default: stdout)")
    p_ts.set_defaults(func=cmd_transcript)

    p_conv = sub.add_parser("convert", help="convert chapter formats through canonical JSON")
    p_conv.add_argument("input")
    p_conv.add_argument("--from", dest="from_format", required=True)
    p_conv.add_argument("--to", dest="to_format", required=True)
    p_conv.add_argument("--duration", type=float, help="video duration for list inputs")
    p_conv.add_argument("--out", help="output file (default: stdout)")
    p_conv.set_defaults(func=cmd_convert)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChapterEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
