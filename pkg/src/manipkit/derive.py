"""Derivation of post-processed annotations: grasp data, placement, gripper
boxes, and semantic-primitive language alignment."""

from __future__ import annotations

from dataclasses import replace

from .episode import Clip, DerivedAnnotations, Episode
from .errors import (
    EmptyMaskError,
    MissingContactError,
    MissingMaskError,
    NoOverlapError,
    TooFewVisibleError,
)
from .masks import mask_bbox_centroid
from .robots import RobotModel, gripper_bbox, project_keypoints

DEFAULT_AFFORDANCE_MARGIN = 0.1


def _earliest_contact(episode: Episode):
    contacts = episode.annotations.contact_frames
    if not contacts:
        raise MissingContactError(f"{episode.episode_id}: no contact annotation")
    return min(contacts, key=lambda c: c.frame)


def derive_grasp(
    episode: Episode,
    model: RobotModel,
    ee_offset=None,
    margin: float = DEFAULT_AFFORDANCE_MARGIN,
):
    """Grasp affordance box, contact points, and grasp pose at the contact frame.

    The affordance box is the tight box over the projected gripper keypoints,
    expanded on each side by `margin` times the box dimension and clamped to
    the image. The grasp pose is the contact frame's TCP pose, unmodified.

    Returns:
        (affordance_box, contact_points, grasp_pose)

    Raises:
        MissingContactError: no contact annotation.
        TooFewVisibleError: fewer than two keypoints visible at contact.
    """
    contact = _earliest_contact(episode)
    frame = episode.frames[contact.frame]
    proj = project_keypoints(model, episode.camera, frame, ee_offset=ee_offset)
    if len(proj.pixels) < 2:
        raise TooFewVisibleError(
            f"{episode.episode_id}: {len(proj.pixels)} keypoints visible at contact frame"
        )
    us = [p[0] for p in proj.pixels.values()]
    vs = [p[1] for p in proj.pixels.values()]
    x1, y1, x2, y2 = min(us), min(vs), max(us), max(vs)
    mx, my = margin * (x2 - x1), margin * (y2 - y1)
    cam = episode.camera
    box = (
        max(x1 - mx, 0.0),
        max(y1 - my, 0.0),
        min(x2 + mx, cam.width - 1.0),
        min(y2 + my, cam.height - 1.0),
    )
    return box, dict(sorted(proj.pixels.items())), frame.tcp_pose


def derive_placement(episode: Episode, clip: Clip):
    """Placement proposal: the bound object's mask bbox at the clip's end frame.

    Raises:
        MissingMaskError: clip unbound, mask missing, or mask empty.
    """
    if clip.object_id is None:
        raise MissingMaskError(f"clip [{clip.start_frame},{clip.end_frame}] has no bound object")
    per_frame = episode.annotations.object_masks.get(clip.object_id, {})
    if clip.end_frame not in per_frame:
        raise MissingMaskError(
            f"no mask for {clip.object_id!r} at clip end frame {clip.end_frame}"
        )
    try:
        bbox, _ = mask_bbox_centroid(per_frame[clip.end_frame])
    except EmptyMaskError as e:
        raise MissingMaskError(
            f"empty mask for {clip.object_id!r} at frame {clip.end_frame}"
        ) from e
    return tuple(float(v) for v in bbox)


def derive_gripper_boxes(episode: Episode, model: RobotModel, ee_offset=None):
    """Per-frame gripper boxes; frames with fewer than two visible keypoints
    get no entry."""
    boxes = {}
    for frame in episode.frames:
        proj = project_keypoints(model, episode.camera, frame, ee_offset=ee_offset)
        if len(proj.pixels) >= 2:
            boxes[frame.index] = gripper_bbox(proj.pixels, episode.camera)
    return boxes


def derive_trace(episode: Episode, model: RobotModel, ee_offset=None):
    """Per-frame TCP projection (the trace); None for frames behind the camera."""
    from .errors import BehindCameraError
    from .robots import forward_kinematics, project_point

    trace = []
    for frame in episode.frames:
        poses = forward_kinematics(
            model, frame.joint_positions, gripper_opening=frame.gripper_opening, ee_offset=ee_offset
        )
        ee = model.ee_link or model.base_link
        try:
            trace.append(project_point(episode.camera, poses[ee].translation))
        except BehindCameraError:
            trace.append(None)
    return trace


def derive_all(
    episode: Episode,
    model: RobotModel,
    ee_offset=None,
    margin: float = DEFAULT_AFFORDANCE_MARGIN,
) -> Episode:
    """Fill the episode's derived block (and trace2d if absent) in one pass."""
    ann = episode.annotations
    if ann.trace2d is None:
        trace = derive_trace(episode, model, ee_offset)
        if all(p is not None for p in trace):
            ann = replace(ann, trace2d=tuple(trace))
    box, points, pose = derive_grasp(episode, model, ee_offset, margin)
    placements = [
        derive_placement(episode, clip) for clip in ann.clips if clip.object_id is not None
    ]
    derived = DerivedAnnotations(
        grasp_affordance_box=box,
        contact_points=points,
        grasp_pose=pose,
        placement_proposal=placements[-1] if placements else None,
        gripper_boxes=derive_gripper_boxes(episode, model, ee_offset),
        subtask_texts=tuple(c.description for c in ann.clips),
    )
    return replace(episode, annotations=replace(ann, derived=derived))


def align_clip_language(
    episode: Episode, semantic_clip: tuple[int, int], overlap_threshold: float = 0.5
) -> str:
    """Language for a semantic interval from the overlapping primitive clips.

    A primitive clip qualifies when intersection length / clip length exceeds
    the threshold; qualifying descriptions are joined with ", then " in start
    order. Single-clip episodes return the global description directly.

    Raises:
        NoOverlapError: no primitive clip qualifies.
    """
    clips = sorted(episode.annotations.clips, key=lambda c: c.start_frame)
    if len(clips) == 1:
        return episode.annotations.global_description
    start, end = semantic_clip
    chosen = []
    for clip in clips:
        length = clip.end_frame - clip.start_frame
        overlap = max(0, min(end, clip.end_frame) - max(start, clip.start_frame))
        if length > 0 and overlap / length > overlap_threshold:
            chosen.append(clip.description)
    if not chosen:
        raise NoOverlapError(
            f"no primitive clip overlaps [{start},{end}] above {overlap_threshold}"
        )
    parts = [chosen[0]] + [d[:1].lower() + d[1:] for d in chosen[1:]]
    return ", then ".join(parts)
