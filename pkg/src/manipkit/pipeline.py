"""Batch driver: staged corpus processing with per-episode failure isolation.

A run plan names an ordered subset of the canonical stages and two roots.
Stages read episode manifests from the output root once it is populated
(falling back to the input root), so single-stage plans work standalone and
full plans chain through the same working directory.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .calibration import CalibrationConfig, CalibrationSample, calibrate_offset
from .config import DEFAULTS, config_sha256
from .correction import spatial_correct, temporal_correct, trajectory_onset
from .derive import derive_all, derive_gripper_boxes
from .episode import DerivedAnnotations, load_episode, save_episode, validate_episode
from .errors import ConfigError, DependencyError, IoError, TooFewEpisodesError
from .metrics import accuracy, acc_at_iou, bleu_avg, dtw, iou, ols_table
from .robots import parse_robot_description, project_keypoints
from .vqa.generate import (
    FAMILY_AXES,
    UNDERSTANDING,
    CorpusContext,
    assign_split,
    check_split_leakage,
    generate_items,
    read_items_jsonl,
    write_items_jsonl,
)

STAGE_ORDER = ("Ingest", "Calibrate", "Correct", "Derive", "GenVqa", "Evaluate")

BOX_FAMILIES = {
    "object_grounding_gen",
    "grasp_affordance_box",
    "gripper_detection",
    "place_affordance",
}
TRACE_FAMILIES = {"trace_easy", "trace_hard"}


@dataclass(frozen=True)
class RunPlan:
    stages: tuple[str, ...]
    input_root: str
    output_root: str
    config: dict = field(default_factory=lambda: DEFAULTS)
    seed: int = 0
    jobs: int = 0


def validate_plan(plan: RunPlan) -> None:
    """Check stage names and dependency order.

    Raises:
        ConfigError: unknown or empty stage list.
        DependencyError: stages out of canonical order or duplicated.
    """
    if not plan.stages:
        raise ConfigError("plan has no stages")
    unknown = [s for s in plan.stages if s not in STAGE_ORDER]
    if unknown:
        raise ConfigError(f"unknown stages {unknown}")
    indexes = [STAGE_ORDER.index(s) for s in plan.stages]
    if any(b <= a for a, b in zip(indexes, indexes[1:])):
        raise DependencyError(
            f"stages must follow the order {STAGE_ORDER}, got {plan.stages}"
        )


class _RunContext:
    def __init__(self, plan: RunPlan):
        self.plan = plan
        self.config = plan.config
        self.input_root = Path(plan.input_root)
        self.output_root = Path(plan.output_root)
        self.jobs = plan.jobs or self.config["pipeline"]["jobs"] or os.cpu_count() or 1
        self._models: dict[str, object] = {}

    def episodes_dir(self, for_write: bool = False) -> Path:
        out = self.output_root / "episodes"
        if for_write or out.is_dir():
            return out
        return self.input_root / "episodes"

    def manifest_paths(self) -> list[Path]:
        src = self.episodes_dir()
        if not src.is_dir():
            raise IoError(f"no episodes directory at {src}")
        return sorted(p for p in src.glob("*.json"))

    def model(self, robot_id: str):
        if robot_id not in self._models:
            path = self.input_root / "robots" / f"{robot_id}.xml"
            try:
                xml = path.read_text(encoding="utf-8")
            except OSError as e:
                raise IoError(f"cannot read robot description {path}: {e}") from e
            self._models[robot_id] = parse_robot_description(xml)
        return self._models[robot_id]

    def calibrated_offset(self, robot_id: str):
        path = self.output_root / "calibration.json"
        if not path.is_file():
            return None
        entry = json.loads(path.read_text(encoding="utf-8")).get(robot_id)
        return None if entry is None else tuple(entry["offset"])


def _map_paths(fn, paths, jobs: int) -> dict:
    """fn over manifest paths in a bounded pool; {episode_id: (ok, payload)}."""
    results = {}
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = {pool.submit(fn, p): p.stem for p in paths}
        for future in as_completed(futures):
            episode_id = futures[future]
            try:
                results[episode_id] = (True, future.result())
            except Exception as e:  # noqa: BLE001 - isolation is the contract
                results[episode_id] = (False, f"{type(e).__name__}: {e}")
    return results


def _stage_record(name: str, results: dict, detail=None) -> dict:
    errors = {eid: payload for eid, (ok, payload) in results.items() if not ok}
    record = {
        "name": name,
        "ok": sum(1 for ok, _ in results.values() if ok),
        "failed": len(errors),
        "errors": dict(sorted(errors.items())),
    }
    if detail is not None:
        record["detail"] = detail
    return record


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    path.write_text(text, encoding="utf-8")


def _stage_ingest(ctx: _RunContext) -> dict:
    out_dir = ctx.output_root / "episodes"
    out_dir.mkdir(parents=True, exist_ok=True)
    src = ctx.input_root / "episodes"
    if not src.is_dir():
        raise IoError(f"no episodes directory at {src}")

    def work(path: Path):
        ep = load_episode(path)
        save_episode(ep, out_dir / path.name)

    return _stage_record("Ingest", _map_paths(work, sorted(src.glob("*.json")), ctx.jobs))


def _stage_calibrate(ctx: _RunContext) -> dict:
    cfg = ctx.config["calibration"]
    per_episode = max(int(cfg["frames_per_episode"]), 1)

    def work(path: Path):
        ep = load_episode(path)
        model = ctx.model(ep.robot_id)
        picks = np.unique(
            np.round(np.linspace(0, ep.num_frames - 1, per_episode)).astype(int)
        )
        samples = []
        for k in picks:
            record = ep.frames[int(k)]
            projected = project_keypoints(model, ep.camera, record).pixels
            samples.append(
                CalibrationSample(
                    episode_id=ep.episode_id,
                    frame=int(k),
                    annotated=dict(projected),
                    frame_record=record,
                )
            )
        return ep.robot_id, ep.camera, samples

    results = _map_paths(work, ctx.manifest_paths(), ctx.jobs)
    by_robot: dict[str, list] = {}
    for episode_id in sorted(results):
        ok, payload = results[episode_id]
        if not ok:
            continue
        robot_id, camera, samples = payload
        by_robot.setdefault(robot_id, (camera, []))[1].extend(samples)
    calib_cfg = CalibrationConfig(
        jacobian_step=cfg["jacobian_step"],
        step_tol=cfg["step_tol"],
        max_iter=int(cfg["max_iter"]),
        init_damping=cfg["init_damping"],
    )
    doc = {}
    for robot_id in sorted(by_robot):
        camera, samples = by_robot[robot_id]
        fit = calibrate_offset(ctx.model(robot_id), camera, samples, calib_cfg)
        doc[robot_id] = {
            "offset": [round(v, 12) for v in fit.offset],
            "initial_error": round(fit.initial_error, 9),
            "final_error": round(fit.final_error, 9),
            "iterations": fit.iterations,
            "converged": fit.converged,
        }
    _write_json(ctx.output_root / "calibration.json", doc)
    return _stage_record("Calibrate", results, detail={"robots": sorted(doc)})


def _stage_correct(ctx: _RunContext) -> dict:
    cfg = ctx.config["correction"]
    paths = ctx.manifest_paths()  # resolve the read side before creating the write side
    out_dir = ctx.output_root / "episodes"
    out_dir.mkdir(parents=True, exist_ok=True)
    onsets = {}
    if cfg["video_onset_file"]:
        try:
            onsets = json.loads(Path(cfg["video_onset_file"]).read_text(encoding="utf-8"))
        except OSError as e:
            raise IoError(f"cannot read video onset file: {e}") from e

    def work(path: Path):
        ep = load_episode(path)
        ann = ep.annotations
        if ann.derived is None or not ann.derived.gripper_boxes:
            boxes = derive_gripper_boxes(ep, ctx.model(ep.robot_id))
            derived = ann.derived or DerivedAnnotations()
            ep = replace(
                ep, annotations=replace(ann, derived=replace(derived, gripper_boxes=boxes))
            )
        ep, spatial = spatial_correct(
            ep, iou_threshold=cfg["iou_threshold"], aspect_limit=cfg["aspect_limit"]
        )
        onset = onsets.get(ep.episode_id)
        if onset is None:
            onset = trajectory_onset(ep, speed_threshold=cfg["speed_threshold"])
        ep, temporal = temporal_correct(
            ep, int(onset), speed_threshold=cfg["speed_threshold"]
        )
        save_episode(ep, out_dir / path.name)
        return {"spatial": spatial.reason, "shift": temporal.shift}

    results = _map_paths(work, paths, ctx.jobs)
    detail = {
        eid: payload for eid, (ok, payload) in sorted(results.items()) if ok
    }
    return _stage_record("Correct", results, detail=detail)


def _stage_derive(ctx: _RunContext) -> dict:
    cfg = ctx.config["derive"]
    paths = ctx.manifest_paths()
    out_dir = ctx.output_root / "episodes"
    out_dir.mkdir(parents=True, exist_ok=True)

    def work(path: Path):
        ep = load_episode(path)
        ep = derive_all(
            ep,
            ctx.model(ep.robot_id),
            ee_offset=ctx.calibrated_offset(ep.robot_id),
            margin=cfg["affordance_margin"],
        )
        save_episode(ep, out_dir / path.name)

    return _stage_record("Derive", _map_paths(work, paths, ctx.jobs))


def _stage_genvqa(ctx: _RunContext) -> dict:
    cfg = ctx.config["vqa"]
    families = set(cfg["families"]) or None
    eval_ids = set(cfg["eval_episode_ids"])
    seed = ctx.plan.seed

    episodes = {}
    load_results = _map_paths(load_episode, ctx.manifest_paths(), ctx.jobs)
    for episode_id in sorted(load_results):
        ok, payload = load_results[episode_id]
        if ok:
            episodes[episode_id] = payload
    context = CorpusContext.from_episodes(episodes.values())

    def work_items(episode_id):
        return generate_items(
            episodes[episode_id], families=families, rng_seed=seed, context=context
        )

    items = []
    gen_results = {}
    with ThreadPoolExecutor(max_workers=ctx.jobs) as pool:
        futures = {pool.submit(work_items, eid): eid for eid in sorted(episodes)}
        for future in as_completed(futures):
            eid = futures[future]
            try:
                gen_results[eid] = (True, future.result())
            except Exception as e:  # noqa: BLE001
                gen_results[eid] = (False, f"{type(e).__name__}: {e}")
    for eid in sorted(gen_results):
        ok, payload = gen_results[eid]
        if ok:
            items.extend(payload)
    items = assign_split(items, eval_ids)
    check_split_leakage(items)
    out_path = ctx.output_root / "vqa" / "items.jsonl"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_items_jsonl(items, out_path)

    counts: dict[str, int] = {}
    for item in items:
        counts[item.family] = counts.get(item.family, 0) + 1
    results = {**{eid: load_results[eid] for eid in load_results if not load_results[eid][0]}, **gen_results}
    return _stage_record(
        "GenVqa",
        results,
        detail={"items": len(items), "families": dict(sorted(counts.items()))},
    )


def _join_text(value) -> str:
    if isinstance(value, str):
        return value
    return ", ".join(str(v) for v in value)


def score_family(family: str, pairs) -> dict:
    """Score one family over (truth_answer, prediction) pairs.

    Understanding families report accuracy, box families mean IoU and
    ACC@IoU>0.1, the keypoint family mean pixel error, trace families mean
    DTW plus the OLS table over the raw point chunks, and free-text families
    the averaged BLEU against the reference answer.

    Raises:
        ConfigError: unknown family.
    """
    if family not in FAMILY_AXES:
        raise ConfigError(f"unknown family {family!r}")
    entry: dict = {"count": len(pairs)}
    if FAMILY_AXES[family][1] == UNDERSTANDING:
        entry["accuracy"] = accuracy(
            [str(p) for _, p in pairs], [str(t) for t, _ in pairs]
        )
    elif family in BOX_FAMILIES:
        preds = [tuple(p) for _, p in pairs]
        truths = [tuple(t) for t, _ in pairs]
        entry["mean_iou"] = float(np.mean([iou(p, t) for p, t in zip(preds, truths)]))
        entry["acc_at_iou"] = acc_at_iou(preds, truths)
    elif family == "grasp_affordance_keypoint":
        dists = [float(np.hypot(p[0] - t[0], p[1] - t[1])) for t, p in pairs]
        entry["mean_point_error"] = float(np.mean(dists))
    elif family in TRACE_FAMILIES:
        entry["mean_dtw"] = float(np.mean([dtw(list(p), list(t)) for t, p in pairs]))
        chunks = [
            (list(p), list(t))
            for t, p in pairs
            if len(p) == len(t) and len(t) > 0
        ]
        entry["ols_table"] = ols_table(chunks) if chunks else None
    else:
        entry["bleu_avg"] = float(
            np.mean([bleu_avg(_join_text(p), [_join_text(t)]) for t, p in pairs])
        )
    return entry


def score_items(items, predictions: dict) -> dict:
    """Per-family scores for a prediction map {item_id: prediction}."""
    by_family: dict[str, list] = {}
    for item in items:
        if item.item_id in predictions:
            by_family.setdefault(item.family, []).append(
                (item.answer, predictions[item.item_id])
            )
    return {
        family: score_family(family, by_family[family]) for family in sorted(by_family)
    }


def _stage_evaluate(ctx: _RunContext) -> dict:
    items_path = ctx.output_root / "vqa" / "items.jsonl"
    if not items_path.is_file():
        raise IoError(f"no VQA items at {items_path}; run GenVqa first")
    items = read_items_jsonl(items_path)
    pred_path = ctx.config["evaluate"]["predictions"]
    if pred_path:
        predictions = read_predictions(pred_path)
    else:
        predictions = {item.item_id: item.answer for item in items}
    report = score_items(items, predictions)
    _write_json(ctx.output_root / "evaluation.json", report)
    results = {item.episode_id: (True, None) for item in items}
    return _stage_record("Evaluate", results, detail={"families": sorted(report)})


def read_predictions(path) -> dict:
    """JSONL of {"item_id": ..., "prediction": ...} into an id->prediction map."""

    def tuplify(value):
        if isinstance(value, list):
            return tuple(tuplify(v) for v in value)
        return value

    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                doc = json.loads(line)
                out[doc["item_id"]] = tuplify(doc["prediction"])
    return out


_STAGES = {
    "Ingest": _stage_ingest,
    "Calibrate": _stage_calibrate,
    "Correct": _stage_correct,
    "Derive": _stage_derive,
    "GenVqa": _stage_genvqa,
    "Evaluate": _stage_evaluate,
}


def run(plan: RunPlan) -> dict:
    """Execute the plan stage by stage and write report.json to the output root.

    Per-episode failures are recorded and never abort the run; stage records
    carry ok/failed counts plus an error string per failed episode. The report
    is a pure function of inputs, config, and seed.

    Raises:
        ConfigError / DependencyError: invalid plan.
    """
    validate_plan(plan)
    ctx = _RunContext(plan)
    ctx.output_root.mkdir(parents=True, exist_ok=True)
    stage_records = [_STAGES[name](ctx) for name in plan.stages]
    report = {
        "config_sha256": config_sha256(plan.config),
        "seed": plan.seed,
        "input_root": str(plan.input_root),
        "stages": stage_records,
    }
    _write_json(ctx.output_root / "report.json", report)
    return report


def _chunk(seq, parts: int):
    base, extra = divmod(len(seq), parts)
    out, start = [], 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        out.append(seq[start : start + size])
        start += size
    return out


def default_validity(episode) -> bool:
    """True when the episode passes structural validation."""
    try:
        validate_episode(episode)
    except Exception:  # noqa: BLE001 - any defect means invalid
        return False
    return True


def qc_sample(
    episodes,
    subset_count: int = 100,
    samples_per_subset: int = 50,
    pass_ratio: float = 0.9,
    seed: int = 0,
    validity=None,
) -> dict:
    """Split the corpus into contiguous subsets and spot-check each one.

    From every subset, samples_per_subset episodes (or all of them, if fewer)
    are drawn with a seeded RNG and checked with the validity predicate; a
    subset passes when its valid fraction reaches pass_ratio.

    Raises:
        TooFewEpisodesError: corpus smaller than subset_count.
        ConfigError: non-positive subset_count.
    """
    eps = list(episodes)
    if subset_count <= 0:
        raise ConfigError(f"subset_count must be positive, got {subset_count}")
    if len(eps) < subset_count:
        raise TooFewEpisodesError(
            f"{len(eps)} episodes cannot fill {subset_count} subsets"
        )
    check = validity or default_validity
    rng = np.random.default_rng(seed)
    subsets = []
    for index, chunk in enumerate(_chunk(eps, subset_count)):
        k = min(samples_per_subset, len(chunk))
        picked = sorted(int(i) for i in rng.choice(len(chunk), size=k, replace=False))
        sampled = [chunk[i] for i in picked]
        valid = sum(1 for ep in sampled if check(ep))
        ratio = valid / k
        subsets.append(
            {
                "subset": index,
                "sampled": [ep.episode_id for ep in sampled],
                "valid": valid,
                "total": k,
                "ratio": ratio,
                "passed": ratio >= pass_ratio,
            }
        )
    return {
        "pass_ratio": pass_ratio,
        "subsets": subsets,
        "passed": all(s["passed"] for s in subsets),
    }
