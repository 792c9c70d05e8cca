"""Episode data model, invariant validation, and manifest persistence.

An episode on disk is a JSON manifest plus a sidecar binary file holding the
per-frame numeric data as little-endian float64 rows (see docs/formats.md).
Episode values are immutable after load; mutation means building a new Episode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvariantError, IoError, ParseError, SchemaError
from .geometry import Se3
from .masks import RleMask, decode_mask
from .skills import SKILL_IDS

SOURCE_SETTINGS = ("InTheWild", "TableTop")

# columns per sidecar row in addition to the joint positions:
# timestamp, gripper_opening, tx, ty, tz, qw, qx, qy, qz
_EXTRA_COLS = 9


@dataclass(frozen=True)
class CameraParams:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    extrinsics: Se3  # pose of the robot base in the camera frame


@dataclass(frozen=True)
class FrameRecord:
    index: int
    timestamp: float
    joint_positions: tuple[float, ...]
    gripper_opening: float
    tcp_pose: Se3  # end-effector pose in robot base frame


@dataclass(frozen=True)
class Clip:
    start_frame: int
    end_frame: int
    skill: str
    description: str
    object_id: str | None = None  # set via review (bind-object edit); None if unbound


@dataclass(frozen=True)
class ContactAnnotation:
    frame: int
    object_id: str


@dataclass(frozen=True)
class DerivedAnnotations:
    """Post-processed representations; every field optional until computed."""

    grasp_affordance_box: tuple[float, float, float, float] | None = None
    contact_points: dict[str, tuple[float, float]] | None = None
    grasp_pose: Se3 | None = None
    placement_proposal: tuple[float, float, float, float] | None = None
    gripper_boxes: dict[int, tuple[float, float, float, float]] | None = None
    subtask_texts: tuple[str, ...] | None = None


@dataclass(frozen=True)
class AnnotationSet:
    global_description: str = ""
    clips: tuple[Clip, ...] = ()
    contact_frames: tuple[ContactAnnotation, ...] = ()
    object_masks: dict[str, dict[int, RleMask]] = field(default_factory=dict)
    trace2d: tuple[tuple[float, float], ...] | None = None
    derived: DerivedAnnotations | None = None


@dataclass(frozen=True)
class Episode:
    episode_id: str
    source_setting: str
    robot_id: str
    camera: CameraParams
    frames: tuple[FrameRecord, ...]
    annotations: AnnotationSet
    video_uri: str = ""

    @property
    def num_frames(self) -> int:
        return len(self.frames)


# --- validation ---------------------------------------------------------------


def _check(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise InvariantError(f"{path}: {msg}")


def _check_box(box, path: str, width: int, height: int) -> None:
    x1, y1, x2, y2 = box
    _check(x1 <= x2 and y1 <= y2, path, f"inverted rectangle {box}")
    _check(
        0 <= x1 and x2 <= width - 1 and 0 <= y1 and y2 <= height - 1,
        path,
        f"rectangle {box} outside {width}x{height} image",
    )


def validate_episode(ep: Episode) -> Episode:
    """Check every structural invariant; raises InvariantError naming the field."""
    _check(ep.source_setting in SOURCE_SETTINGS, "source_setting", f"unknown {ep.source_setting!r}")
    cam = ep.camera
    _check(cam.fx > 0 and cam.fy > 0, "camera", f"focal lengths must be positive, got {cam.fx}, {cam.fy}")
    _check(0 <= cam.cx < cam.width, "camera.cx", f"{cam.cx} outside [0, {cam.width})")
    _check(0 <= cam.cy < cam.height, "camera.cy", f"{cam.cy} outside [0, {cam.height})")
    _check(abs(np.linalg.norm(cam.extrinsics.rotation) - 1.0) <= 1e-9, "camera.extrinsics", "quaternion not unit")

    n = len(ep.frames)
    _check(n > 0, "frames", "must be non-empty")
    arity = len(ep.frames[0].joint_positions)
    for i, fr in enumerate(ep.frames):
        _check(fr.index == i, f"frames[{i}].index", f"expected {i}, got {fr.index}")
        _check(
            len(fr.joint_positions) == arity,
            f"frames[{i}].joint_positions",
            f"arity {len(fr.joint_positions)} != {arity}",
        )
        qn = float(np.linalg.norm(fr.tcp_pose.rotation))
        _check(abs(qn - 1.0) <= 1e-9, f"frames[{i}].tcp_pose", f"quaternion norm {qn} != 1")
        if i > 0:
            _check(
                fr.timestamp > ep.frames[i - 1].timestamp,
                f"frames[{i}].timestamp",
                "timestamps must be strictly increasing",
            )

    ann = ep.annotations
    ordered = sorted(range(len(ann.clips)), key=lambda k: ann.clips[k].start_frame)
    prev_end = None
    for pos, k in enumerate(ordered):
        clip = ann.clips[k]
        path = f"annotations.clips[{k}]"
        _check(clip.start_frame < clip.end_frame, path, f"start {clip.start_frame} >= end {clip.end_frame}")
        _check(0 <= clip.start_frame and clip.end_frame < n, path, "frame reference out of range")
        _check(clip.skill in SKILL_IDS, f"{path}.skill", f"unknown skill {clip.skill!r}")
        if pos > 0:
            _check(
                clip.start_frame >= prev_end,
                path,
                f"overlaps previous clip ending at {prev_end}",
            )
        prev_end = clip.end_frame

    for k, contact in enumerate(ann.contact_frames):
        path = f"annotations.contact_frames[{k}]"
        _check(0 <= contact.frame < n, path, f"frame {contact.frame} out of range")
        _check(
            contact.object_id in ann.object_masks,
            path,
            f"object {contact.object_id!r} has no mask entry",
        )

    for oid, per_frame in ann.object_masks.items():
        for f, mask in per_frame.items():
            path = f"annotations.object_masks[{oid!r}][{f}]"
            _check(0 <= f < n, path, f"frame {f} out of range")
            if sum(mask.counts) != mask.width * mask.height:
                raise InvariantError(f"{path}: rle counts inconsistent with {mask.width}x{mask.height}")

    if ann.trace2d is not None:
        _check(len(ann.trace2d) == n, "trace2d", f"length {len(ann.trace2d)} != frame count {n}")

    if ann.derived is not None:
        d = ann.derived
        if d.grasp_affordance_box is not None:
            _check_box(d.grasp_affordance_box, "derived.grasp_affordance_box", cam.width, cam.height)
        if d.placement_proposal is not None:
            _check_box(d.placement_proposal, "derived.placement_proposal", cam.width, cam.height)
        if d.gripper_boxes is not None:
            for f, box in d.gripper_boxes.items():
                _check(0 <= f < n, f"derived.gripper_boxes[{f}]", "frame out of range")
                _check_box(box, f"derived.gripper_boxes[{f}]", cam.width, cam.height)
        if d.grasp_pose is not None:
            qn = float(np.linalg.norm(d.grasp_pose.rotation))
            _check(abs(qn - 1.0) <= 1e-9, "derived.grasp_pose", f"quaternion norm {qn} != 1")
    return ep


# --- jsonable conversion --------------------------------------------------------


def _se3_jsonable(pose: Se3) -> dict:
    return {"t": [float(v) for v in pose.translation], "q": [float(v) for v in pose.rotation]}


def _se3_from(obj: dict, path: str) -> Se3:
    t = _expect(obj, "t", list, path)
    q = _expect(obj, "q", list, path)
    if len(t) != 3 or len(q) != 4:
        raise SchemaError(f"{path}: expected t[3] and q[4 wxyz]")
    return Se3(np.array([float(v) for v in t]), np.array([float(v) for v in q]))


def _expect(obj: dict, key: str, kind, path: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{path}.{key}: missing")
    val = obj[key]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise SchemaError(f"{path}.{key}: expected number, got {type(val).__name__}")
        return float(val)
    if kind is int:
        if not isinstance(val, int) or isinstance(val, bool):
            raise SchemaError(f"{path}.{key}: expected integer, got {type(val).__name__}")
        return val
    if not isinstance(val, kind):
        raise SchemaError(f"{path}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def _box_jsonable(box) -> list:
    return [float(v) for v in box]


def episode_to_jsonable(ep: Episode) -> dict:
    """Manifest dict (everything except the sidecar frame rows)."""
    ann = ep.annotations
    clips = []
    for clip in ann.clips:
        entry = {
            "start_frame": clip.start_frame,
            "end_frame": clip.end_frame,
            "skill": clip.skill,
            "description": clip.description,
        }
        if clip.object_id is not None:
            entry["object_id"] = clip.object_id
        clips.append(entry)
    masks = {
        oid: [
            {"frame": f, "rle": {"width": m.width, "height": m.height, "counts": list(m.counts)}}
            for f, m in sorted(per_frame.items())
        ]
        for oid, per_frame in ann.object_masks.items()
    }
    doc = {
        "episode_id": ep.episode_id,
        "source_setting": ep.source_setting,
        "robot_id": ep.robot_id,
        "camera": {
            "fx": float(ep.camera.fx),
            "fy": float(ep.camera.fy),
            "cx": float(ep.camera.cx),
            "cy": float(ep.camera.cy),
            "width": ep.camera.width,
            "height": ep.camera.height,
            "extrinsics": _se3_jsonable(ep.camera.extrinsics),
        },
        "frames_file": f"{ep.episode_id}.frames.bin",
        "num_frames": len(ep.frames),
        "num_joints": len(ep.frames[0].joint_positions) if ep.frames else 0,
        "video_uri": ep.video_uri,
        "annotations": {
            "global_description": ann.global_description,
            "clips": clips,
            "contact_frames": [
                {"frame": c.frame, "object_id": c.object_id} for c in ann.contact_frames
            ],
            "masks": masks,
        },
    }
    if ann.trace2d is not None:
        doc["trace2d"] = [[float(u), float(v)] for u, v in ann.trace2d]
    if ann.derived is not None:
        d = ann.derived
        block: dict = {}
        if d.grasp_affordance_box is not None:
            block["grasp_affordance_box"] = _box_jsonable(d.grasp_affordance_box)
        if d.contact_points is not None:
            block["contact_points"] = {
                name: [float(u), float(v)] for name, (u, v) in d.contact_points.items()
            }
        if d.grasp_pose is not None:
            block["grasp_pose"] = _se3_jsonable(d.grasp_pose)
        if d.placement_proposal is not None:
            block["placement_proposal"] = _box_jsonable(d.placement_proposal)
        if d.gripper_boxes is not None:
            block["gripper_boxes"] = [
                [f, _box_jsonable(box)] for f, box in sorted(d.gripper_boxes.items())
            ]
        if d.subtask_texts is not None:
            block["subtask_texts"] = list(d.subtask_texts)
        doc["derived"] = block
    return doc


def _frames_array(ep: Episode) -> np.ndarray:
    rows = []
    for fr in ep.frames:
        rows.append(
            [fr.timestamp, *fr.joint_positions, fr.gripper_opening]
            + list(fr.tcp_pose.translation)
            + list(fr.tcp_pose.rotation)
        )
    return np.asarray(rows, dtype="<f8")


def _frames_from_array(arr: np.ndarray, num_joints: int) -> tuple[FrameRecord, ...]:
    frames = []
    for i, row in enumerate(arr):
        joints = tuple(float(v) for v in row[1 : 1 + num_joints])
        rest = row[1 + num_joints :]
        frames.append(
            FrameRecord(
                index=i,
                timestamp=float(row[0]),
                joint_positions=joints,
                gripper_opening=float(rest[0]),
                tcp_pose=Se3(rest[1:4].copy(), rest[4:8].copy()),
            )
        )
    return tuple(frames)


def _annotations_from(doc: dict, path: str) -> AnnotationSet:
    ann = _expect(doc, "annotations", dict, path)
    clips = []
    for i, entry in enumerate(_expect(ann, "clips", list, f"{path}.annotations")):
        cpath = f"{path}.annotations.clips[{i}]"
        clips.append(
            Clip(
                start_frame=_expect(entry, "start_frame", int, cpath),
                end_frame=_expect(entry, "end_frame", int, cpath),
                skill=_expect(entry, "skill", str, cpath),
                description=_expect(entry, "description", str, cpath),
                object_id=entry.get("object_id"),
            )
        )
    contacts = []
    for i, entry in enumerate(_expect(ann, "contact_frames", list, f"{path}.annotations")):
        cpath = f"{path}.annotations.contact_frames[{i}]"
        contacts.append(
            ContactAnnotation(
                frame=_expect(entry, "frame", int, cpath),
                object_id=_expect(entry, "object_id", str, cpath),
            )
        )
    masks: dict[str, dict[int, RleMask]] = {}
    for oid, entries in _expect(ann, "masks", dict, f"{path}.annotations").items():
        per_frame: dict[int, RleMask] = {}
        for i, entry in enumerate(entries):
            mpath = f"{path}.annotations.masks[{oid!r}][{i}]"
            rle = _expect(entry, "rle", dict, mpath)
            per_frame[_expect(entry, "frame", int, mpath)] = RleMask(
                width=_expect(rle, "width", int, mpath),
                height=_expect(rle, "height", int, mpath),
                counts=tuple(_expect(rle, "counts", list, mpath)),
            )
        masks[oid] = per_frame

    trace2d = None
    if "trace2d" in doc:
        trace2d = tuple((float(p[0]), float(p[1])) for p in doc["trace2d"])
    derived = None
    if "derived" in doc:
        block = doc["derived"]
        dpath = f"{path}.derived"
        derived = DerivedAnnotations(
            grasp_affordance_box=(
                tuple(float(v) for v in block["grasp_affordance_box"])
                if "grasp_affordance_box" in block
                else None
            ),
            contact_points=(
                {name: (float(p[0]), float(p[1])) for name, p in block["contact_points"].items()}
                if "contact_points" in block
                else None
            ),
            grasp_pose=_se3_from(block["grasp_pose"], f"{dpath}.grasp_pose") if "grasp_pose" in block else None,
            placement_proposal=(
                tuple(float(v) for v in block["placement_proposal"])
                if "placement_proposal" in block
                else None
            ),
            gripper_boxes=(
                {int(f): tuple(float(v) for v in box) for f, box in block["gripper_boxes"]}
                if "gripper_boxes" in block
                else None
            ),
            subtask_texts=tuple(block["subtask_texts"]) if "subtask_texts" in block else None,
        )
    return AnnotationSet(
        global_description=_expect(ann, "global_description", str, f"{path}.annotations"),
        clips=tuple(clips),
        contact_frames=tuple(contacts),
        object_masks=masks,
        trace2d=trace2d,
        derived=derived,
    )


def episode_from_jsonable(doc: dict, frames: tuple[FrameRecord, ...], path: str = "manifest") -> Episode:
    cam = _expect(doc, "camera", dict, path)
    camera = CameraParams(
        fx=_expect(cam, "fx", float, f"{path}.camera"),
        fy=_expect(cam, "fy", float, f"{path}.camera"),
        cx=_expect(cam, "cx", float, f"{path}.camera"),
        cy=_expect(cam, "cy", float, f"{path}.camera"),
        width=_expect(cam, "width", int, f"{path}.camera"),
        height=_expect(cam, "height", int, f"{path}.camera"),
        extrinsics=_se3_from(_expect(cam, "extrinsics", dict, f"{path}.camera"), f"{path}.camera.extrinsics"),
    )
    return Episode(
        episode_id=_expect(doc, "episode_id", str, path),
        source_setting=_expect(doc, "source_setting", str, path),
        robot_id=_expect(doc, "robot_id", str, path),
        camera=camera,
        frames=frames,
        annotations=_annotations_from(doc, path),
        video_uri=doc.get("video_uri", ""),
    )


# --- persistence -------------------------------------------------------------------


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_episode(manifest_path) -> Episode:
    """Load and validate an episode from its manifest path.

    Raises:
        IoError: manifest or sidecar unreadable.
        ParseError: manifest is not valid JSON.
        SchemaError: a required field is missing or mistyped.
        InvariantError: structural invariant violated.
    """
    manifest_path = Path(manifest_path)
    try:
        text = manifest_path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read {manifest_path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{manifest_path}: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError(f"{manifest_path}: manifest must be a JSON object")

    num_frames = _expect(doc, "num_frames", int, "manifest")
    num_joints = _expect(doc, "num_joints", int, "manifest")
    frames_file = _expect(doc, "frames_file", str, "manifest")
    try:
        raw = (manifest_path.parent / frames_file).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read frames file {frames_file}: {e}") from e
    row_len = num_joints + _EXTRA_COLS
    expected = num_frames * row_len * 8
    if len(raw) != expected:
        raise SchemaError(
            f"manifest.frames_file: {len(raw)} bytes, expected {expected} "
            f"({num_frames} frames x {row_len} float64 columns)"
        )
    arr = np.frombuffer(raw, dtype="<f8").reshape(num_frames, row_len)
    ep = episode_from_jsonable(doc, _frames_from_array(arr, num_joints))
    return validate_episode(ep)


def save_episode(ep: Episode, manifest_path) -> None:
    """Write manifest JSON and the sidecar frames file next to it.

    The output is canonical (sorted keys, shortest float repr), so saving the
    same episode twice yields byte-identical files.
    """
    manifest_path = Path(manifest_path)
    doc = episode_to_jsonable(ep)
    try:
        manifest_path.parent.mkdir(parents=True, exist_ok=True)
        manifest_path.write_text(canonical_json(doc), encoding="utf-8")
        (manifest_path.parent / doc["frames_file"]).write_bytes(_frames_array(ep).tobytes())
    except OSError as e:
        raise IoError(f"cannot write {manifest_path}: {e}") from e
