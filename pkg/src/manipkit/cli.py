"""Command line entry point wrapping the batch stages, metrics, QC, and server.

Exit codes: 0 on success, 2 when some episodes failed or QC did not pass,
3 on configuration problems (bad config file, bad plan, missing inputs).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .calibration import CalibrationConfig, CalibrationSample, calibrate_offset
from .config import load_config
from .episode import load_episode
from .errors import (
    ConfigError,
    DependencyError,
    IoError,
    ManipkitError,
    TooFewEpisodesError,
)
from .pipeline import (
    RunPlan,
    qc_sample,
    read_predictions,
    run,
    score_family,
)

STAGE_BY_COMMAND = {
    "ingest": "Ingest",
    "calibrate": "Calibrate",
    "correct": "Correct",
    "derive": "Derive",
    "genvqa": "GenVqa",
    "evaluate": "Evaluate",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manipkit", description="Robot demonstration curation toolchain."
    )
    parser.add_argument("--config", default=None, help="TOML config file")
    parser.add_argument("--seed", type=int, default=None, help="run seed")
    parser.add_argument("--jobs", type=int, default=None, help="worker pool size")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_roots(p):
        p.add_argument("--input", required=True, help="corpus root to read")
        p.add_argument("--output", required=True, help="working root to write")

    add_roots(sub.add_parser("ingest", help="validate and normalize manifests"))

    p = sub.add_parser("calibrate", help="fit the end-effector offset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None, help="working root (stage mode)")
    p.add_argument("--samples", default=None, help="annotated keypoint samples JSON")
    p.add_argument("--out", default=None, help="result path for --samples mode")

    p = sub.add_parser("correct", help="spatial and temporal correction")
    add_roots(p)
    p.add_argument("--iou-threshold", type=float, default=None)
    p.add_argument("--aspect-limit", type=float, default=None)
    p.add_argument("--speed-threshold", type=float, default=None)
    p.add_argument("--video-onset-file", default=None, help="JSON episode_id to frame")

    add_roots(sub.add_parser("derive", help="compute derived annotations"))

    p = sub.add_parser("genvqa", help="generate question/answer items")
    add_roots(p)
    p.add_argument("--families", default=None, help="comma separated family names")
    p.add_argument("--eval-ids", default=None, help="file of eval episode ids")

    p = sub.add_parser("evaluate", help="score predictions")
    p.add_argument("--task", default=None, help="family name (file mode)")
    p.add_argument("--pred", default=None, help="predictions JSONL")
    p.add_argument("--truth", default=None, help="ground truth JSONL")
    p.add_argument("--report", default=None, help="report JSON output path")
    p.add_argument("--input", default=None)
    p.add_argument("--output", default=None)

    p = sub.add_parser("qc", help="sampled corpus quality check")
    p.add_argument("--input", required=True)
    p.add_argument("--subset-count", type=int, default=None)
    p.add_argument("--samples-per-subset", type=int, default=None)
    p.add_argument("--pass-ratio", type=float, default=None)
    p.add_argument("--report", default=None)

    p = sub.add_parser("serve", help="run the curation HTTP service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-root", default=None, help="corpus root to serve")

    p = sub.add_parser("synth", help="write a small synthetic corpus")
    p.add_argument("--output", required=True)
    p.add_argument("--episodes", type=int, default=6)

    return parser


def _read_id_list(path: str) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("["):
        return [str(v) for v in json.loads(text)]
    return [line.strip() for line in text.splitlines() if line.strip()]


def _run_stage(args, config, stage: str, overrides=None) -> int:
    if overrides:
        for (section, key), value in overrides.items():
            if value is not None:
                config[section][key] = value
    plan = RunPlan(
        stages=(stage,),
        input_root=args.input,
        output_root=args.output,
        config=config,
        seed=args.seed if args.seed is not None else config["pipeline"]["seed"],
        jobs=args.jobs or 0,
    )
    report = run(plan)
    failed = 0
    for record in report["stages"]:
        print(f"{record['name']}: ok={record['ok']} failed={record['failed']}")
        for episode_id, message in record["errors"].items():
            print(f"  {episode_id}: {message}", file=sys.stderr)
        failed += record["failed"]
    return 2 if failed else 0


def _cmd_calibrate_samples(args, config) -> int:
    records = json.loads(Path(args.samples).read_text(encoding="utf-8"))
    root = Path(args.input)
    episodes = {}
    samples = []
    for record in records:
        episode_id = record["episode_id"]
        if episode_id not in episodes:
            episodes[episode_id] = load_episode(root / "episodes" / f"{episode_id}.json")
        ep = episodes[episode_id]
        samples.append(
            CalibrationSample(
                episode_id=episode_id,
                frame=int(record["frame"]),
                annotated={
                    name: (float(u), float(v))
                    for name, (u, v) in record["keypoints"].items()
                },
                frame_record=ep.frames[int(record["frame"])],
            )
        )
    robots = {ep.robot_id for ep in episodes.values()}
    if len(robots) != 1:
        raise ConfigError(f"samples span multiple robots {sorted(robots)}")
    first = next(iter(episodes.values()))
    from .robots import parse_robot_description

    xml = (root / "robots" / f"{first.robot_id}.xml").read_text(encoding="utf-8")
    cfg = config["calibration"]
    result = calibrate_offset(
        parse_robot_description(xml),
        first.camera,
        samples,
        CalibrationConfig(
            jacobian_step=cfg["jacobian_step"],
            step_tol=cfg["step_tol"],
            max_iter=int(cfg["max_iter"]),
            init_damping=cfg["init_damping"],
        ),
    )
    doc = asdict(result)
    doc["offset"] = list(doc["offset"])
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def _cmd_evaluate_files(args) -> int:
    for flag in ("pred", "truth", "report"):
        if getattr(args, flag) is None:
            raise ConfigError(f"evaluate --task requires --{flag}")
    predictions = read_predictions(args.pred)
    truths = {}
    with open(args.truth, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                doc = json.loads(line)
                truths[doc["item_id"]] = _tuplify(doc["answer"])
    pairs = [
        (truths[item_id], predictions[item_id])
        for item_id in sorted(truths)
        if item_id in predictions
    ]
    if not pairs:
        raise ConfigError("no overlapping item ids between --pred and --truth")
    report = {"task": args.task, **score_family(args.task, pairs)}
    Path(args.report).write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"{args.task}: scored {report['count']} items -> {args.report}")
    return 0


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


def _cmd_qc(args, config) -> int:
    cfg = dict(config["qc"])
    if args.subset_count is not None:
        cfg["subset_count"] = args.subset_count
    if args.samples_per_subset is not None:
        cfg["samples_per_subset"] = args.samples_per_subset
    if args.pass_ratio is not None:
        cfg["pass_ratio"] = args.pass_ratio
    root = Path(args.input) / "episodes"
    if not root.is_dir():
        raise IoError(f"no episodes directory at {root}")
    episodes = []
    for path in sorted(root.glob("*.json")):
        try:
            episodes.append(load_episode(path))
        except ManipkitError:
            episodes.append(_InvalidEpisode(path.stem))
    seed = args.seed if args.seed is not None else config["pipeline"]["seed"]
    report = qc_sample(
        episodes,
        subset_count=int(cfg["subset_count"]),
        samples_per_subset=int(cfg["samples_per_subset"]),
        pass_ratio=cfg["pass_ratio"],
        seed=seed,
    )
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0 if report["passed"] else 2


class _InvalidEpisode:
    """Placeholder for a manifest that would not even load."""

    def __init__(self, episode_id: str):
        self.episode_id = episode_id


def _cmd_serve(args, config) -> int:
    import uvicorn

    from .service.app import create_app

    cfg = config["service"]
    host = args.host or cfg["host"]
    port = args.port if args.port is not None else int(cfg["port"])
    app = create_app(data_root=args.data_root)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def _cmd_synth(args) -> int:
    from .synth import make_corpus

    seed = args.seed if args.seed is not None else 0
    paths = make_corpus(Path(args.output), n_episodes=args.episodes, seed=seed)
    print(f"wrote {len(paths)} episodes under {args.output}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "serve":
            return _cmd_serve(args, config)
        if args.command == "qc":
            return _cmd_qc(args, config)
        if args.command == "evaluate" and args.task is not None:
            return _cmd_evaluate_files(args)
        if args.command == "calibrate" and args.samples is not None:
            return _cmd_calibrate_samples(args, config)
        if args.command == "evaluate":
            if not (args.input and args.output):
                raise ConfigError("evaluate needs --task or --input/--output")
            if args.pred:
                config["evaluate"]["predictions"] = args.pred
            return _run_stage(args, config, "Evaluate")
        if args.command == "calibrate":
            if not args.output:
                raise ConfigError("calibrate needs --samples or --output")
            return _run_stage(args, config, "Calibrate")
        if args.command == "genvqa":
            overrides = {}
            if args.families:
                config["vqa"]["families"] = [
                    f.strip() for f in args.families.split(",") if f.strip()
                ]
            if args.eval_ids:
                config["vqa"]["eval_episode_ids"] = _read_id_list(args.eval_ids)
            return _run_stage(args, config, "GenVqa", overrides)
        if args.command == "correct":
            overrides = {
                ("correction", "iou_threshold"): args.iou_threshold,
                ("correction", "aspect_limit"): args.aspect_limit,
                ("correction", "speed_threshold"): args.speed_threshold,
                ("correction", "video_onset_file"): args.video_onset_file,
            }
            return _run_stage(args, config, "Correct", overrides)
        return _run_stage(args, config, STAGE_BY_COMMAND[args.command])
    except (ConfigError, DependencyError, IoError, TooFewEpisodesError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
