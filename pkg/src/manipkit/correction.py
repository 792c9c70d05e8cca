"""Spatial and temporal repair of trajectory/video misalignment.

Spatial: at the contact frame the TCP projection should approximately coincide
with the object centroid; the centroid-minus-TCP offset is applied uniformly
to the trace and projected keypoint artifacts, unless the IoU gate or the
aspect-ratio exclusion vetoes it. Temporal: the trajectory stream is shifted
so its motion onset matches the externally supplied video onset, padding and
truncating with boundary records so the frame count is preserved.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .episode import AnnotationSet, DerivedAnnotations, Episode, FrameRecord
from .errors import MissingAnnotationError, OutOfRangeError
from .masks import mask_bbox_centroid
from .metrics import iou

IOU_ABOVE_THRESHOLD = "IouAboveThreshold"
EXTREME_ASPECT_RATIO = "ExtremeAspectRatio"
APPLIED = "Applied"


class StaticTrajectoryWarning(UserWarning):
    """Trajectory never exceeds the speed threshold; onset defaults to frame 0."""


@dataclass(frozen=True)
class SpatialCorrection:
    applied: bool
    offset2d: tuple[float, float]
    reason: str  # IouAboveThreshold | ExtremeAspectRatio | Applied


@dataclass(frozen=True)
class TemporalCorrection:
    video_onset: int
    traj_onset: int
    shift: int
    padded: int
    truncated: int


def _shift_box(box, du: float, dv: float, width: int, height: int):
    x1, y1, x2, y2 = box
    return (
        min(max(x1 + du, 0.0), width - 1.0),
        min(max(y1 + dv, 0.0), height - 1.0),
        min(max(x2 + du, 0.0), width - 1.0),
        min(max(y2 + dv, 0.0), height - 1.0),
    )


def spatial_correct(
    episode: Episode, iou_threshold: float = 0.1, aspect_limit: float = 4.0
) -> tuple[Episode, SpatialCorrection]:
    """Shift robot-projection artifacts so the TCP meets the object centroid.

    Needs a contact annotation, the object mask at the contact frame, the
    derived gripper box there, and trace2d. When the gripper and object boxes
    already overlap (IoU > iou_threshold) or the object box is extremely
    elongated (long/short > aspect_limit), the episode is returned unchanged.

    Raises:
        MissingAnnotationError: naming whichever required piece is absent.
    """
    ann = episode.annotations
    if not ann.contact_frames:
        raise MissingAnnotationError("contact_frames")
    contact = min(ann.contact_frames, key=lambda c: c.frame)
    per_frame = ann.object_masks.get(contact.object_id, {})
    if contact.frame not in per_frame:
        raise MissingAnnotationError(f"object mask for {contact.object_id!r} at frame {contact.frame}")
    if ann.trace2d is None:
        raise MissingAnnotationError("trace2d")
    gripper_boxes = ann.derived.gripper_boxes if ann.derived else None
    if not gripper_boxes or contact.frame not in gripper_boxes:
        raise MissingAnnotationError(f"gripper box at frame {contact.frame}")

    obj_box, obj_centroid = mask_bbox_centroid(per_frame[contact.frame])
    if iou(gripper_boxes[contact.frame], obj_box) > iou_threshold:
        return episode, SpatialCorrection(False, (0.0, 0.0), IOU_ABOVE_THRESHOLD)
    sides = sorted((obj_box[2] - obj_box[0], obj_box[3] - obj_box[1]))
    if sides[0] <= 0 or sides[1] / sides[0] > aspect_limit:
        return episode, SpatialCorrection(False, (0.0, 0.0), EXTREME_ASPECT_RATIO)

    tcp_u, tcp_v = ann.trace2d[contact.frame]
    du, dv = obj_centroid[0] - tcp_u, obj_centroid[1] - tcp_v
    w, h = episode.camera.width, episode.camera.height
    trace2d = tuple((u + du, v + dv) for u, v in ann.trace2d)
    derived = ann.derived
    if derived is not None:
        derived = replace(
            derived,
            gripper_boxes=(
                {f: _shift_box(b, du, dv, w, h) for f, b in derived.gripper_boxes.items()}
                if derived.gripper_boxes is not None
                else None
            ),
            contact_points=(
                {n: (u + du, v + dv) for n, (u, v) in derived.contact_points.items()}
                if derived.contact_points is not None
                else None
            ),
            grasp_affordance_box=(
                _shift_box(derived.grasp_affordance_box, du, dv, w, h)
                if derived.grasp_affordance_box is not None
                else None
            ),
        )
    corrected = replace(episode, annotations=replace(ann, trace2d=trace2d, derived=derived))
    return corrected, SpatialCorrection(True, (du, dv), APPLIED)


def trajectory_onset(episode: Episode, speed_threshold: float = 0.002) -> int:
    """First frame k whose TCP moves more than speed_threshold meters to k+1.

    A fully static trajectory yields 0 plus a StaticTrajectoryWarning.
    """
    positions = np.array([fr.tcp_pose.translation for fr in episode.frames])
    steps = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    hits = np.flatnonzero(steps > speed_threshold)
    if hits.size == 0:
        warnings.warn(
            f"{episode.episode_id}: trajectory never exceeds {speed_threshold} m/frame",
            StaticTrajectoryWarning,
            stacklevel=2,
        )
        return 0
    return int(hits[0])


def temporal_correct(
    episode: Episode, video_onset: int, speed_threshold: float = 0.002
) -> tuple[Episode, TemporalCorrection]:
    """Re-time the robot-state stream so its motion onset matches the video's.

    The state payload of frame k comes from original frame k - shift, clamped
    to the episode; boundary records are repeated (zero-velocity padding) and
    the overhang is truncated, so exactly one record per video frame remains.
    Frame indices and timestamps keep the video clock. trace2d, when present,
    is shifted the same way.

    Raises:
        OutOfRangeError: video_onset outside the frame range.
    """
    n = len(episode.frames)
    if not 0 <= video_onset < n:
        raise OutOfRangeError(f"video_onset {video_onset} outside [0, {n})")
    traj_onset = trajectory_onset(episode, speed_threshold)
    shift = video_onset - traj_onset
    correction = TemporalCorrection(
        video_onset=video_onset,
        traj_onset=traj_onset,
        shift=shift,
        padded=abs(shift),
        truncated=abs(shift),
    )
    if shift == 0:
        return episode, replace(correction, padded=0, truncated=0)

    def source(k: int) -> int:
        return min(max(k - shift, 0), n - 1)

    frames = tuple(
        FrameRecord(
            index=k,
            timestamp=episode.frames[k].timestamp,
            joint_positions=episode.frames[source(k)].joint_positions,
            gripper_opening=episode.frames[source(k)].gripper_opening,
            tcp_pose=episode.frames[source(k)].tcp_pose,
        )
        for k in range(n)
    )
    ann = episode.annotations
    if ann.trace2d is not None:
        ann = replace(ann, trace2d=tuple(ann.trace2d[source(k)] for k in range(n)))
    return replace(episode, frames=frames, annotations=ann), correction
