"""Deterministic VQA item generation from annotated episodes.

Each of the 29 task families turns one kind of annotation unit (a contact, a
clip, a derived box) into question items. Everything is a pure function of
(episode, families, seed, context): per family the RNG is derived from a
sha256 of seed, episode id and family name, so items are reproducible and
independent of which other families run.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from ..episode import Episode
from ..errors import InvariantError, MissingAnnotationError
from ..masks import mask_bbox_centroid
from ..metrics import iou
from ..skills import SKILLS
from ..traces import motion_direction, subsample_trace
from .overlay import (
    COLOR_NAMES,
    ORANGE,
    PURPLE,
    Arrow,
    Box,
    ForkMarker,
    OverlaySpec,
    Polyline,
    clamp_point,
    spec_from_jsonable,
    spec_to_jsonable,
)
from .templates import BANKS, fill_placeholders

SPATIAL = "Spatial"
TEMPORAL = "Temporal"
UNDERSTANDING = "Understanding"
GENERATION = "Generation"

TRAIN = "Train"
EVAL = "Eval"

LETTERS = ("A", "B", "C", "D")

# Family -> (spatial/temporal, understanding/generation). Choice and decide
# style questions count as understanding.
FAMILY_AXES: dict[str, tuple[str, str]] = {
    "grasp_pose_choice": (SPATIAL, UNDERSTANDING),
    "grounding_choice": (SPATIAL, UNDERSTANDING),
    "contact_decide": (SPATIAL, UNDERSTANDING),
    "scene_understanding": (SPATIAL, UNDERSTANDING),
    "object_grounding_gen": (SPATIAL, GENERATION),
    "grasp_affordance_box": (SPATIAL, GENERATION),
    "grasp_affordance_keypoint": (SPATIAL, GENERATION),
    "gripper_detection": (SPATIAL, GENERATION),
    "place_affordance": (SPATIAL, GENERATION),
    "trace_choice": (TEMPORAL, UNDERSTANDING),
    "trace_direction_choice": (TEMPORAL, UNDERSTANDING),
    "trace_language_choice": (TEMPORAL, UNDERSTANDING),
    "past_multitask_selection": (TEMPORAL, UNDERSTANDING),
    "future_multitask_selection": (TEMPORAL, UNDERSTANDING),
    "past_primitive_selection": (TEMPORAL, UNDERSTANDING),
    "future_primitive_selection": (TEMPORAL, UNDERSTANDING),
    "temporal_understanding": (TEMPORAL, UNDERSTANDING),
    "success_positive": (TEMPORAL, UNDERSTANDING),
    "success_negative": (TEMPORAL, UNDERSTANDING),
    "discriminative_affordance_positive": (TEMPORAL, UNDERSTANDING),
    "discriminative_affordance_negative": (TEMPORAL, UNDERSTANDING),
    "trace_easy": (TEMPORAL, GENERATION),
    "trace_hard": (TEMPORAL, GENERATION),
    "planning_task": (TEMPORAL, GENERATION),
    "planning_with_context": (TEMPORAL, GENERATION),
    "planning_remaining_steps": (TEMPORAL, GENERATION),
    "generative_affordance": (TEMPORAL, GENERATION),
    "future_prediction": (TEMPORAL, GENERATION),
    "past_description": (TEMPORAL, GENERATION),
}

ALL_FAMILIES = tuple(FAMILY_AXES)


@dataclass(frozen=True)
class ImageRef:
    """One prompt image: a frame of some episode plus an optional overlay."""

    episode_id: str
    frame: int
    overlay: OverlaySpec | None = None


@dataclass(frozen=True)
class VqaItem:
    item_id: str
    family: str
    axis: tuple[str, str]
    prompt: str
    images: tuple[ImageRef, ...]
    choices: tuple[str, ...] | None
    answer: object
    episode_id: str
    frames: tuple[int, ...]
    split: str = TRAIN


@dataclass(frozen=True)
class CorpusContext:
    """Cross-episode material for families that need it.

    scenes: (episode_id, global description, representative frame) per episode.
    clip_texts: (episode_id, clip description) for every clip in the corpus.
    """

    scenes: tuple[tuple[str, str, int], ...] = ()
    clip_texts: tuple[tuple[str, str], ...] = ()

    @classmethod
    def from_episodes(cls, episodes) -> "CorpusContext":
        scenes = []
        clip_texts = []
        for ep in episodes:
            scenes.append(
                (ep.episode_id, ep.annotations.global_description, ep.num_frames // 2)
            )
            for clip in ep.annotations.clips:
                clip_texts.append((ep.episode_id, clip.description))
        return cls(scenes=tuple(sorted(scenes)), clip_texts=tuple(sorted(clip_texts)))

    def other_scenes(self, episode_id: str):
        return [s for s in self.scenes if s[0] != episode_id]

    def other_clip_texts(self, episode_id: str):
        return [text for eid, text in self.clip_texts if eid != episode_id]


def _family_rng(seed: int, episode_id: str, family: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{episode_id}:{family}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def _pick(rng, bank):
    return bank[int(rng.integers(len(bank)))]


def _clips(episode: Episode):
    return sorted(episode.annotations.clips, key=lambda c: c.start_frame)


def _containing_clip(clips, frame: int):
    for clip in clips:
        if clip.start_frame <= frame <= clip.end_frame:
            return clip
    return None


def _shuffled(rng, correct, distractors):
    """Arrange [correct, *distractors] in RNG order; returns (options, answer index)."""
    options = [correct, *distractors]
    order = rng.permutation(len(options))
    arranged = [options[int(j)] for j in order]
    return arranged, int(np.flatnonzero(order == 0)[0])


def _int_box(box) -> tuple[int, int, int, int]:
    return tuple(int(round(v)) for v in box)


def _clamp_box(box, width, height):
    x1, y1, x2, y2 = box
    x1 = min(max(x1, 0), width - 1)
    x2 = min(max(x2, 0), width - 1)
    y1 = min(max(y1, 0), height - 1)
    y2 = min(max(y2, 0), height - 1)
    return (min(x1, x2), min(y1, y2), max(x1, x2), max(y1, y2))


def _jitter_box(rng, box, width, height, max_iou=0.3, tries=64):
    """A distractor box: truth shifted/scaled by 15-40% until IoU <= max_iou.

    Falls back to mirroring across the image center, then to corner boxes, so
    a distractor always exists for any in-bounds truth box.
    """
    x1, y1, x2, y2 = box
    w, h = max(x2 - x1, 4), max(y2 - y1, 4)
    for _ in range(tries):
        fx = float(rng.uniform(0.15, 0.40)) * (1 if rng.random() < 0.5 else -1)
        fy = float(rng.uniform(0.15, 0.40)) * (1 if rng.random() < 0.5 else -1)
        sx = 1.0 + float(rng.uniform(0.15, 0.40)) * (1 if rng.random() < 0.5 else -1)
        sy = 1.0 + float(rng.uniform(0.15, 0.40)) * (1 if rng.random() < 0.5 else -1)
        cx, cy = (x1 + x2) / 2 + fx * w, (y1 + y2) / 2 + fy * h
        nw, nh = max(w * sx, 2), max(h * sy, 2)
        cand = _clamp_box(
            _int_box((cx - nw / 2, cy - nh / 2, cx + nw / 2, cy + nh / 2)), width, height
        )
        if cand[2] > cand[0] and cand[3] > cand[1] and iou(cand, box) <= max_iou:
            return cand
    fallbacks = [
        (width - 1 - x2, height - 1 - y2, width - 1 - x1, height - 1 - y1),
        (0, 0, w, h),
        (width - 1 - w, 0, width - 1, h),
        (0, height - 1 - h, w, height - 1),
        (width - 1 - w, height - 1 - h, width - 1, height - 1),
    ]
    for cand in fallbacks:
        cand = _clamp_box(_int_box(cand), width, height)
        if cand[2] > cand[0] and cand[3] > cand[1] and iou(cand, box) <= max_iou:
            return cand
    raise InvariantError(f"cannot place a distractor box away from {box}")


def _object_box(episode: Episode, object_id: str, frame: int):
    mask = episode.annotations.object_masks.get(object_id, {}).get(frame)
    if mask is None:
        return None
    return mask_bbox_centroid(mask)[0]


def _require(condition, family: str, piece: str):
    if not condition:
        raise MissingAnnotationError(f"{family}: episode lacks {piece}")


def _image(episode, frame, overlay=None):
    return ImageRef(episode_id=episode.episode_id, frame=frame, overlay=overlay)


def _clip_trace(episode, clip):
    return episode.annotations.trace2d[clip.start_frame : clip.end_frame + 1]


def _distinct(points):
    return len({(round(u, 6), round(v, 6)) for u, v in points})


# ----------------------------------------------------------------- builders


def _build_contact_decide(ep, rng, ctx):
    clips = _clips(ep)
    task = ep.annotations.global_description
    drafts = []
    for contact in sorted(ep.annotations.contact_frames, key=lambda c: c.frame):
        clip = _containing_clip(clips, contact.frame)
        if clip is None:
            continue
        prompt = fill_placeholders(
            _pick(rng, BANKS["contact_decide"]),
            {"<TASK>": task, "<SUBTASK>": clip.description},
        )
        units = [(contact.frame, "Yes")]
        if clip.start_frame < contact.frame:
            units.append((clip.start_frame, "No"))
        for frame, answer in units:
            drafts.append(
                dict(
                    prompt=prompt,
                    images=(_image(ep, frame),),
                    choices=("Yes", "No"),
                    answer=answer,
                    frames=(frame,),
                )
            )
    return drafts


def _build_grounding_choice(ep, rng, ctx):
    clips = _clips(ep)
    task = ep.annotations.global_description
    cam = ep.camera
    drafts = []
    for contact in sorted(ep.annotations.contact_frames, key=lambda c: c.frame):
        truth = _object_box(ep, contact.object_id, contact.frame)
        if truth is None:
            continue
        distractors = [_jitter_box(rng, truth, cam.width, cam.height) for _ in range(3)]
        boxes, answer_idx = _shuffled(rng, truth, distractors)
        images = tuple(
            _image(
                ep,
                contact.frame,
                OverlaySpec(
                    width=cam.width,
                    height=cam.height,
                    primitives=(Box(PURPLE, tuple(float(v) for v in b)),),
                ),
            )
            for b in boxes
        )
        prompt = fill_placeholders(
            _pick(rng, BANKS["grounding_choice"]),
            {"<TASK>": task, "<CHOICE>": ", ".join(LETTERS)},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=images,
                choices=LETTERS,
                answer=LETTERS[answer_idx],
                frames=(contact.frame,),
            )
        )
    return drafts


def _build_grasp_pose_choice(ep, rng, ctx):
    ann = ep.annotations
    _require(ann.trace2d is not None, "grasp_pose_choice", "trace2d")
    _require(
        ann.derived is not None and ann.derived.grasp_affordance_box is not None,
        "grasp_pose_choice",
        "a derived grasp box",
    )
    if not ann.contact_frames:
        return []
    contact = min(ann.contact_frames, key=lambda c: c.frame)
    cam = ep.camera
    u, v = ann.trace2d[contact.frame]
    du, dv = motion_direction(ann.trace2d, contact.frame)
    angle = float(np.arctan2(dv, du))
    correct = ForkMarker(ORANGE, (float(u), float(v), angle))
    distractors = []
    for quarter_turns in (1, 2, 3):
        ju = float(np.clip(u + rng.uniform(0.15, 0.40) * cam.width * (1 if rng.random() < 0.5 else -1), 0, cam.width - 1))
        jv = float(np.clip(v + rng.uniform(0.15, 0.40) * cam.height * (1 if rng.random() < 0.5 else -1), 0, cam.height - 1))
        distractors.append(ForkMarker(ORANGE, (ju, jv, angle + quarter_turns * np.pi / 2)))
    marks, answer_idx = _shuffled(rng, correct, distractors)
    images = tuple(
        _image(
            ep,
            contact.frame,
            OverlaySpec(width=cam.width, height=cam.height, primitives=(mark,)),
        )
        for mark in marks
    )
    prompt = fill_placeholders(
        _pick(rng, BANKS["grasp_pose_choice"]),
        {"<TASK>": ann.global_description, "<CHOICE>": ", ".join(LETTERS)},
    )
    return [
        dict(
            prompt=prompt,
            images=images,
            choices=LETTERS,
            answer=LETTERS[answer_idx],
            frames=(contact.frame,),
        )
    ]


def _build_scene_understanding(ep, rng, ctx):
    if ctx is None:
        return []
    others = ctx.other_scenes(ep.episode_id)
    if len(others) < 3:
        return []
    picked = [others[int(i)] for i in rng.permutation(len(others))[:3]]
    own = (ep.episode_id, ep.annotations.global_description, ep.num_frames // 2)
    scenes, answer_idx = _shuffled(rng, own, picked)
    images = tuple(ImageRef(episode_id=s[0], frame=s[2]) for s in scenes)
    prompt = fill_placeholders(
        _pick(rng, BANKS["scene_understanding"]),
        {"{long-horizon}": ep.annotations.global_description},
    )
    return [
        dict(
            prompt=prompt,
            images=images,
            choices=LETTERS,
            answer=LETTERS[answer_idx],
            frames=(own[2],),
        )
    ]


def _build_object_grounding_gen(ep, rng, ctx):
    clips = _clips(ep)
    task = ep.annotations.global_description
    drafts = []
    for contact in sorted(ep.annotations.contact_frames, key=lambda c: c.frame):
        clip = _containing_clip(clips, contact.frame)
        truth = _object_box(ep, contact.object_id, contact.frame)
        if clip is None or truth is None:
            continue
        prompt = fill_placeholders(
            _pick(rng, BANKS["object_grounding_gen"]),
            {"<TASK>": task, "<SUBTASK>": clip.description},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, contact.frame),),
                choices=None,
                answer=_int_box(truth),
                frames=(contact.frame,),
            )
        )
    return drafts


def _build_grasp_affordance_box(ep, rng, ctx):
    ann = ep.annotations
    _require(
        ann.derived is not None and ann.derived.grasp_affordance_box is not None,
        "grasp_affordance_box",
        "a derived grasp box",
    )
    if ann.contact_frames:
        frame = min(c.frame for c in ann.contact_frames)
    elif ann.derived.contact_points:
        frame = min(ann.derived.contact_points)
    else:
        frame = 0
    prompt = fill_placeholders(
        _pick(rng, BANKS["grasp_affordance_box"]), {"<TASK>": ann.global_description}
    )
    return [
        dict(
            prompt=prompt,
            images=(_image(ep, frame),),
            choices=None,
            answer=_int_box(ann.derived.grasp_affordance_box),
            frames=(frame,),
        )
    ]


def _build_grasp_affordance_keypoint(ep, rng, ctx):
    ann = ep.annotations
    _require(
        ann.derived is not None and bool(ann.derived.contact_points),
        "grasp_affordance_keypoint",
        "derived contact points",
    )
    _require(bool(ann.contact_frames), "grasp_affordance_keypoint", "a contact frame")
    frame = min(c.frame for c in ann.contact_frames)
    pixels = list(ann.derived.contact_points.values())
    u = sum(p[0] for p in pixels) / len(pixels)
    v = sum(p[1] for p in pixels) / len(pixels)
    prompt = fill_placeholders(
        _pick(rng, BANKS["grasp_affordance_keypoint"]), {"<TASK>": ann.global_description}
    )
    return [
        dict(
            prompt=prompt,
            images=(_image(ep, frame),),
            choices=None,
            answer=(int(round(u)), int(round(v))),
            frames=(frame,),
        )
    ]


def _build_gripper_detection(ep, rng, ctx):
    ann = ep.annotations
    _require(
        ann.derived is not None and bool(ann.derived.gripper_boxes),
        "gripper_detection",
        "derived gripper boxes",
    )
    frames = sorted(ann.derived.gripper_boxes)
    picks = sorted({frames[0], frames[len(frames) // 2], frames[-1]})
    task = ann.global_description
    drafts = []
    for frame in picks:
        prompt = fill_placeholders(_pick(rng, BANKS["gripper_detection"]), {"<TASK>": task})
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, frame),),
                choices=None,
                answer=_int_box(ann.derived.gripper_boxes[frame]),
                frames=(frame,),
            )
        )
    return drafts


def _build_place_affordance(ep, rng, ctx):
    task = ep.annotations.global_description
    drafts = []
    for clip in _clips(ep):
        if clip.object_id is None:
            continue
        box = _object_box(ep, clip.object_id, clip.end_frame)
        if box is None:
            continue
        prompt = fill_placeholders(
            _pick(rng, BANKS["place_affordance"]),
            {"<TASK>": task, "<SUBTASK>": clip.description},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clip.start_frame),),
                choices=None,
                answer=_int_box(box),
                frames=(clip.start_frame, clip.end_frame),
            )
        )
    return drafts


def _shift_trace(rng, points, width, height):
    du = float(rng.uniform(0.15, 0.40)) * width * (1 if rng.random() < 0.5 else -1)
    dv = float(rng.uniform(0.15, 0.40)) * height * (1 if rng.random() < 0.5 else -1)
    return tuple(clamp_point((u + du, v + dv), width, height) for u, v in points)


def _build_trace_choice(ep, rng, ctx):
    ann = ep.annotations
    _require(ann.trace2d is not None, "trace_choice", "trace2d")
    cam = ep.camera
    task = ann.global_description
    drafts = []
    for clip in _clips(ep):
        raw = _clip_trace(ep, clip)
        if _distinct(raw) < 2:
            continue
        truth = tuple((float(u), float(v)) for u, v in subsample_trace(raw))
        reversed_trace = truth[::-1]
        if reversed_trace == truth:
            reversed_trace = _shift_trace(rng, reversed_trace, cam.width, cam.height)
        distractors = [
            reversed_trace,
            _shift_trace(rng, truth, cam.width, cam.height),
            _shift_trace(rng, reversed_trace, cam.width, cam.height),
        ]
        traces, answer_idx = _shuffled(rng, truth, distractors)
        images = tuple(
            _image(
                ep,
                clip.start_frame,
                OverlaySpec(width=cam.width, height=cam.height, primitives=(Polyline(t),)),
            )
            for t in traces
        )
        prompt = fill_placeholders(
            _pick(rng, BANKS["trace_choice"]),
            {"<TASK>": task, "<SUBTASK>": clip.description, "<CHOICE>": ", ".join(LETTERS)},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=images,
                choices=LETTERS,
                answer=LETTERS[answer_idx],
                frames=(clip.start_frame,),
            )
        )
    return drafts


def _build_trace_direction_choice(ep, rng, ctx):
    ann = ep.annotations
    _require(ann.trace2d is not None, "trace_direction_choice", "trace2d")
    cam = ep.camera
    task = ann.global_description
    arrow_len = 0.12 * min(cam.width, cam.height)
    drafts = []
    for clip in _clips(ep):
        raw = _clip_trace(ep, clip)
        if _distinct(raw) < 2:
            continue
        mid = (clip.start_frame + clip.end_frame) // 2
        u, v = ann.trace2d[mid]
        du, dv = motion_direction(raw, mid - clip.start_frame)
        names = list(COLOR_NAMES)
        colors = [names[int(i)] for i in rng.permutation(len(names))]
        rotations, answer_idx = _shuffled(rng, 0, [1, 2, 3])
        primitives = []
        for color_name, quarter_turns in zip(colors, rotations):
            angle = quarter_turns * np.pi / 2
            ru = du * np.cos(angle) - dv * np.sin(angle)
            rv = du * np.sin(angle) + dv * np.cos(angle)
            tail = clamp_point((u, v), cam.width, cam.height)
            head = clamp_point(
                (u + ru * arrow_len, v + rv * arrow_len), cam.width, cam.height
            )
            primitives.append(Arrow(COLOR_NAMES[color_name], tail, head))
        image = _image(
            ep,
            mid,
            OverlaySpec(width=cam.width, height=cam.height, primitives=tuple(primitives)),
        )
        prompt = fill_placeholders(
            _pick(rng, BANKS["trace_direction_choice"]),
            {"<TASK>": task, "<SUBTASK>": clip.description, "<CHOICE>": ", ".join(colors)},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(image,),
                choices=tuple(colors),
                answer=colors[answer_idx],
                frames=(mid,),
            )
        )
    return drafts


def _description_pool(ep, ctx, exclude):
    """Distractor task texts: other clips in this episode, then corpus clips."""
    pool = []
    for clip in _clips(ep):
        if clip.description not in exclude and clip.description not in pool:
            pool.append(clip.description)
    if ctx is not None:
        for text in ctx.other_clip_texts(ep.episode_id):
            if text not in exclude and text not in pool:
                pool.append(text)
    return pool


def _build_trace_language_choice(ep, rng, ctx):
    ann = ep.annotations
    _require(ann.trace2d is not None, "trace_language_choice", "trace2d")
    cam = ep.camera
    drafts = []
    for clip in _clips(ep):
        raw = _clip_trace(ep, clip)
        if _distinct(raw) < 2:
            continue
        pool = _description_pool(ep, ctx, exclude={clip.description})
        if not pool:
            continue
        picked = [pool[int(i)] for i in rng.permutation(len(pool))[:3]]
        options, answer_idx = _shuffled(rng, clip.description, picked)
        trace = tuple((float(u), float(v)) for u, v in subsample_trace(raw))
        image = _image(
            ep,
            clip.start_frame,
            OverlaySpec(width=cam.width, height=cam.height, primitives=(Polyline(trace),)),
        )
        prompt = fill_placeholders(
            _pick(rng, BANKS["trace_language_choice"]),
            {
                "<TASK>": ann.global_description,
                "<CHOICE>": "[" + ", ".join(options) + "]",
            },
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(image,),
                choices=tuple(options),
                answer=clip.description,
                frames=(clip.start_frame,),
            )
        )
    return drafts


def _multitask_drafts(ep, rng, ctx, family, answer_for, frame_for, distractors_from):
    clips = _clips(ep)
    task = ep.annotations.global_description
    drafts = []
    for k in range(len(clips)):
        answer = answer_for(clips, k)
        if answer is None:
            continue
        pool = [t for t in distractors_from(clips, k) if t != answer]
        if ctx is not None:
            for text in ctx.other_clip_texts(ep.episode_id):
                if text != answer and text not in pool:
                    pool.append(text)
        seen = list(dict.fromkeys(pool))
        if len(seen) < 3:
            continue
        picked = [seen[int(i)] for i in rng.permutation(len(seen))[:3]]
        options, answer_idx = _shuffled(rng, answer, picked)
        values = {"{long-horizon}": task}
        for slot, text in zip(("<task 1>", "<task 2>", "<task 3>", "<task 4>"), options):
            values[slot] = text
        prompt = fill_placeholders(_pick(rng, BANKS[family]), values)
        frame = frame_for(clips, k)
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, frame),),
                choices=LETTERS,
                answer=LETTERS[answer_idx],
                frames=(frame,),
            )
        )
    return drafts


def _build_past_multitask_selection(ep, rng, ctx):
    return _multitask_drafts(
        ep,
        rng,
        ctx,
        "past_multitask_selection",
        answer_for=lambda clips, k: clips[k - 1].description if k >= 1 else None,
        frame_for=lambda clips, k: clips[k].start_frame,
        # Anything already done would also be a valid answer, so distractors
        # may only come from clips that have not run yet.
        distractors_from=lambda clips, k: [c.description for c in clips[k:]],
    )


def _build_future_multitask_selection(ep, rng, ctx):
    return _multitask_drafts(
        ep,
        rng,
        ctx,
        "future_multitask_selection",
        answer_for=lambda clips, k: clips[k].description,
        frame_for=lambda clips, k: clips[k].start_frame,
        distractors_from=lambda clips, k: [
            c.description for j, c in enumerate(clips) if j != k
        ],
    )


def _primitive_drafts(ep, rng, family, answer_for, frame_for):
    clips = _clips(ep)
    task = ep.annotations.global_description
    displays = [display for display, _ in SKILLS.values()]
    drafts = []
    for k in range(len(clips)):
        skill_id = answer_for(clips, k)
        if skill_id is None:
            continue
        answer = SKILLS[skill_id][0]
        pool = [d for d in displays if d != answer]
        picked = [pool[int(i)] for i in rng.permutation(len(pool))[:3]]
        options, answer_idx = _shuffled(rng, answer, picked)
        values = {"{long-horizon}": task}
        for slot, text in zip(("<skill 1>", "<skill 2>", "<skill 3>", "<skill 4>"), options):
            values[slot] = text
        prompt = fill_placeholders(_pick(rng, BANKS[family]), values)
        frame = frame_for(clips, k)
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, frame),),
                choices=LETTERS,
                answer=LETTERS[answer_idx],
                frames=(frame,),
            )
        )
    return drafts


def _build_past_primitive_selection(ep, rng, ctx):
    return _primitive_drafts(
        ep,
        rng,
        "past_primitive_selection",
        answer_for=lambda clips, k: clips[k - 1].skill if k >= 1 else None,
        frame_for=lambda clips, k: clips[k].start_frame,
    )


def _build_future_primitive_selection(ep, rng, ctx):
    return _primitive_drafts(
        ep,
        rng,
        "future_primitive_selection",
        answer_for=lambda clips, k: clips[k].skill,
        frame_for=lambda clips, k: clips[k].start_frame,
    )


def _build_temporal_understanding(ep, rng, ctx):
    clips = _clips(ep)
    if len(clips) < 2:
        return []
    target = clips[int(rng.integers(len(clips)))]
    answer_frame = (target.start_frame + target.end_frame) // 2
    candidates = [
        (c.start_frame + c.end_frame) // 2 for c in clips if c is not target
    ] + [0, ep.num_frames - 1]
    outside = []
    for frame in candidates:
        if not target.start_frame <= frame <= target.end_frame and frame not in outside:
            outside.append(frame)
    if len(outside) < 3:
        return []
    frames, answer_idx = _shuffled(rng, answer_frame, outside[:3])
    prompt = fill_placeholders(
        _pick(rng, BANKS["temporal_understanding"]), {"{task n}": target.description}
    )
    return [
        dict(
            prompt=prompt,
            images=tuple(_image(ep, f) for f in frames),
            choices=LETTERS,
            answer=LETTERS[answer_idx],
            frames=tuple(frames),
        )
    ]


def _build_success_positive(ep, rng, ctx):
    drafts = []
    for clip in _clips(ep):
        prompt = fill_placeholders(
            _pick(rng, BANKS["success_positive"]), {"{task n}": clip.description}
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clip.end_frame),),
                choices=("Yes", "No"),
                answer="Yes",
                frames=(clip.end_frame,),
            )
        )
    return drafts


def _build_success_negative(ep, rng, ctx):
    clips = _clips(ep)
    drafts = []
    for k, clip in enumerate(clips):
        later = clips[k + 1 :]
        if not later:
            continue
        mismatched = later[int(rng.integers(len(later)))].description
        prompt = fill_placeholders(
            _pick(rng, BANKS["success_negative"]), {"{task n}": mismatched}
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clip.end_frame),),
                choices=("Yes", "No"),
                answer="No",
                frames=(clip.end_frame,),
            )
        )
    return drafts


def _build_discriminative_affordance_positive(ep, rng, ctx):
    drafts = []
    for clip in _clips(ep):
        prompt = fill_placeholders(
            _pick(rng, BANKS["discriminative_affordance_positive"]),
            {"{task n}": clip.description},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clip.start_frame),),
                choices=("Yes", "No"),
                answer="Yes",
                frames=(clip.start_frame,),
            )
        )
    return drafts


def _build_discriminative_affordance_negative(ep, rng, ctx):
    clips = _clips(ep)
    drafts = []
    for k, clip in enumerate(clips):
        pool = _description_pool(ep, ctx, exclude={clip.description})
        if not pool:
            continue
        wrong = pool[int(rng.integers(len(pool)))]
        prompt = fill_placeholders(
            _pick(rng, BANKS["discriminative_affordance_negative"]),
            {"{random task}": wrong},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clip.start_frame),),
                choices=("Yes", "No"),
                answer="No",
                frames=(clip.start_frame,),
            )
        )
    return drafts


def _trace_generation_drafts(ep, rng, family, with_context):
    ann = ep.annotations
    _require(ann.trace2d is not None, family, "trace2d")
    task = ann.global_description
    drafts = []
    for clip in _clips(ep):
        raw = _clip_trace(ep, clip)
        if len(raw) < 8 or _distinct(raw) < 2:
            continue
        canonical = subsample_trace(raw)
        values = {"<TASK>": task, "<SUBTASK>": clip.description}
        if with_context:
            n_ctx = max(1, len(canonical) // 4)
            given, answer = canonical[:n_ctx], canonical[n_ctx:]
            values["<TRACE>"] = ";".join(f"{u},{v}" for u, v in given)
        else:
            answer = canonical
        prompt = fill_placeholders(_pick(rng, BANKS[family]), values)
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clip.start_frame),),
                choices=None,
                answer=tuple(answer),
                frames=(clip.start_frame,),
            )
        )
    return drafts


def _build_trace_easy(ep, rng, ctx):
    return _trace_generation_drafts(ep, rng, "trace_easy", with_context=True)


def _build_trace_hard(ep, rng, ctx):
    return _trace_generation_drafts(ep, rng, "trace_hard", with_context=False)


def _build_planning_task(ep, rng, ctx):
    task = ep.annotations.global_description
    drafts = []
    for clip in _clips(ep):
        prompt = fill_placeholders(
            _pick(rng, BANKS["planning_task"]), {"{long-horizon}": task}
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clip.start_frame),),
                choices=None,
                answer=clip.description,
                frames=(clip.start_frame,),
            )
        )
    return drafts


def _build_planning_with_context(ep, rng, ctx):
    clips = _clips(ep)
    task = ep.annotations.global_description
    drafts = []
    for k in range(1, len(clips)):
        done = ", ".join(c.description for c in clips[:k])
        prompt = fill_placeholders(
            _pick(rng, BANKS["planning_with_context"]),
            {"{long-horizon}": task, "{past task 1 ~ n-1}": done},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clips[k].start_frame),),
                choices=None,
                answer=clips[k].description,
                frames=(clips[k].start_frame,),
            )
        )
    return drafts


def _build_planning_remaining_steps(ep, rng, ctx):
    clips = _clips(ep)
    task = ep.annotations.global_description
    drafts = []
    for k in range(1, len(clips)):
        done = ", ".join(c.description for c in clips[:k])
        prompt = fill_placeholders(
            _pick(rng, BANKS["planning_remaining_steps"]),
            {"{long-horizon}": task, "{past task 1 ~ n-1}": done},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clips[k].start_frame),),
                choices=None,
                answer=tuple(c.description for c in clips[k : k + 5]),
                frames=(clips[k].start_frame,),
            )
        )
    return drafts


def _build_generative_affordance(ep, rng, ctx):
    drafts = []
    for clip in _clips(ep):
        prompt = _pick(rng, BANKS["generative_affordance"])
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clip.start_frame),),
                choices=None,
                answer=clip.description,
                frames=(clip.start_frame,),
            )
        )
    return drafts


def _build_future_prediction(ep, rng, ctx):
    clips = _clips(ep)
    drafts = []
    for k in range(1, len(clips)):
        prompt = fill_placeholders(
            _pick(rng, BANKS["future_prediction"]),
            {"{task n-1}": clips[k - 1].description},
        )
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clips[k - 1].end_frame),),
                choices=None,
                answer=clips[k].description,
                frames=(clips[k - 1].end_frame,),
            )
        )
    return drafts


def _build_past_description(ep, rng, ctx):
    clips = _clips(ep)
    drafts = []
    for k in range(1, len(clips)):
        prompt = _pick(rng, BANKS["past_description"])
        drafts.append(
            dict(
                prompt=prompt,
                images=(_image(ep, clips[k].start_frame),),
                choices=None,
                answer=clips[k - 1].description,
                frames=(clips[k].start_frame,),
            )
        )
    return drafts


_BUILDERS = {
    "grasp_pose_choice": _build_grasp_pose_choice,
    "grounding_choice": _build_grounding_choice,
    "contact_decide": _build_contact_decide,
    "scene_understanding": _build_scene_understanding,
    "object_grounding_gen": _build_object_grounding_gen,
    "grasp_affordance_box": _build_grasp_affordance_box,
    "grasp_affordance_keypoint": _build_grasp_affordance_keypoint,
    "gripper_detection": _build_gripper_detection,
    "place_affordance": _build_place_affordance,
    "trace_choice": _build_trace_choice,
    "trace_direction_choice": _build_trace_direction_choice,
    "trace_language_choice": _build_trace_language_choice,
    "past_multitask_selection": _build_past_multitask_selection,
    "future_multitask_selection": _build_future_multitask_selection,
    "past_primitive_selection": _build_past_primitive_selection,
    "future_primitive_selection": _build_future_primitive_selection,
    "temporal_understanding": _build_temporal_understanding,
    "success_positive": _build_success_positive,
    "success_negative": _build_success_negative,
    "discriminative_affordance_positive": _build_discriminative_affordance_positive,
    "discriminative_affordance_negative": _build_discriminative_affordance_negative,
    "trace_easy": _build_trace_easy,
    "trace_hard": _build_trace_hard,
    "planning_task": _build_planning_task,
    "planning_with_context": _build_planning_with_context,
    "planning_remaining_steps": _build_planning_remaining_steps,
    "generative_affordance": _build_generative_affordance,
    "future_prediction": _build_future_prediction,
    "past_description": _build_past_description,
}


def _check_item(item: VqaItem):
    if item.choices is not None:
        if len(set(item.choices)) != len(item.choices):
            raise InvariantError(f"{item.item_id}: duplicate choices {item.choices}")
        if item.answer not in item.choices:
            raise InvariantError(f"{item.item_id}: answer {item.answer!r} not offered")


def generate_items(episode, families=None, rng_seed: int = 0, context=None):
    """All VQA items the episode supports for the requested families.

    Args:
        episode: a validated Episode with annotations (and usually derived
            artifacts, see the per-family requirements).
        families: iterable of family names; None means all 29.
        rng_seed: any integer; drives template choice, distractors and
            option order per (episode, family).
        context: optional CorpusContext for families that draw on other
            episodes (scene_understanding, selection distractor pools).

    Returns:
        List of VqaItem in canonical family order, split preset to Train.

    Raises:
        MissingAnnotationError: a requested family needs an annotation the
            episode does not carry at all (e.g. trace families without trace2d).
        ValueError: unknown family name.
    """
    if families is None:
        wanted = list(ALL_FAMILIES)
    else:
        requested = set(families)
        unknown = requested - set(ALL_FAMILIES)
        if unknown:
            raise ValueError(f"unknown families: {sorted(unknown)}")
        wanted = [f for f in ALL_FAMILIES if f in requested]
    items = []
    for family in wanted:
        rng = _family_rng(rng_seed, episode.episode_id, family)
        for ordinal, draft in enumerate(_BUILDERS[family](episode, rng, context)):
            item = VqaItem(
                item_id=f"{episode.episode_id}/{family}/{ordinal:04d}",
                family=family,
                axis=FAMILY_AXES[family],
                episode_id=episode.episode_id,
                **draft,
            )
            _check_item(item)
            items.append(item)
    return items


def assign_split(items, eval_episode_ids) -> list:
    """Tag each item Eval iff its episode is in the eval id set, else Train."""
    eval_ids = set(eval_episode_ids)
    return [
        replace(item, split=EVAL if item.episode_id in eval_ids else TRAIN)
        for item in items
    ]


def check_split_leakage(items):
    """Raise InvariantError if any episode id appears in both splits."""
    train = {i.episode_id for i in items if i.split == TRAIN}
    shared = train & {i.episode_id for i in items if i.split == EVAL}
    if shared:
        raise InvariantError(f"episodes in both splits: {sorted(shared)}")


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


def item_to_jsonable(item: VqaItem) -> dict:
    return {
        "item_id": item.item_id,
        "family": item.family,
        "axis": list(item.axis),
        "prompt": item.prompt,
        "images": [
            {
                "episode_id": ref.episode_id,
                "frame": ref.frame,
                "overlay": None if ref.overlay is None else spec_to_jsonable(ref.overlay),
            }
            for ref in item.images
        ],
        "choices": None if item.choices is None else list(item.choices),
        "answer": item.answer,
        "episode_id": item.episode_id,
        "frames": list(item.frames),
        "split": item.split,
    }


def item_from_jsonable(data: dict) -> VqaItem:
    images = tuple(
        ImageRef(
            episode_id=ref["episode_id"],
            frame=int(ref["frame"]),
            overlay=None if ref.get("overlay") is None else spec_from_jsonable(ref["overlay"]),
        )
        for ref in data["images"]
    )
    choices = data.get("choices")
    return VqaItem(
        item_id=data["item_id"],
        family=data["family"],
        axis=tuple(data["axis"]),
        prompt=data["prompt"],
        images=images,
        choices=None if choices is None else tuple(choices),
        answer=_tuplify(data["answer"]),
        episode_id=data["episode_id"],
        frames=tuple(int(f) for f in data["frames"]),
        split=data.get("split", TRAIN),
    )


def write_items_jsonl(items, path):
    """One JSON object per line; newline terminated."""
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item_to_jsonable(item), ensure_ascii=False) + "\n")


def read_items_jsonl(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [item_from_jsonable(json.loads(line)) for line in fh if line.strip()]
