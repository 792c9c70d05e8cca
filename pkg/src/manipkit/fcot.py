"""Flexible chain-of-thought serialization: an ordered selection of derived
representations rendered as tagged text, or as an overlay spec for the visual
form. The inverse parser recovers every field exactly."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .episode import Episode
from .errors import MissingRepresentationError, ParseError
from .masks import mask_bbox_centroid
from .traces import MAX_TRACE_POINTS, subsample_trace
from .vqa.overlay import PURPLE, WHITE, YELLOW, Box, OverlaySpec, Polyline

SUBTASK = "subtask"
SKILL = "skill"
OBJECT_BOX = "object_box"
GRIPPER_BOX = "gripper_box"
AFFORDANCE_BOX = "affordance_box"
TRACE = "trace"

REPRESENTATIONS = (SUBTASK, SKILL, OBJECT_BOX, GRIPPER_BOX, AFFORDANCE_BOX, TRACE)

TEXTUAL = "textual"
VISUAL_PROMPT = "visual_prompt"


@dataclass(frozen=True)
class FcotSpec:
    """Ordered, duplicate-free selection over the six representations."""

    selection: tuple[str, ...]
    form: str = TEXTUAL

    def __post_init__(self):
        if not self.selection:
            raise ValueError("selection must be non-empty")
        if len(set(self.selection)) != len(self.selection):
            raise ValueError(f"duplicate selections in {self.selection}")
        unknown = set(self.selection) - set(REPRESENTATIONS)
        if unknown:
            raise ValueError(f"unknown representations {sorted(unknown)}")
        if self.form not in (TEXTUAL, VISUAL_PROMPT):
            raise ValueError(f"unknown form {self.form!r}")


def _clip_at(episode: Episode, frame: int):
    for clip in sorted(episode.annotations.clips, key=lambda c: c.start_frame):
        if clip.start_frame <= frame <= clip.end_frame:
            return clip
    return None


def _int_box(box) -> tuple[int, int, int, int]:
    return tuple(int(round(v)) for v in box)


def _representation_value(episode: Episode, frame: int, name: str):
    ann = episode.annotations
    clip = _clip_at(episode, frame)
    if name in (SUBTASK, SKILL, TRACE) and clip is None:
        raise MissingRepresentationError(f"{name}: no clip covers frame {frame}")
    if name == SUBTASK:
        return clip.description
    if name == SKILL:
        return clip.skill
    if name == OBJECT_BOX:
        candidates = [clip.object_id] if clip and clip.object_id else sorted(ann.object_masks)
        for oid in candidates:
            mask = ann.object_masks.get(oid, {}).get(frame)
            if mask is not None:
                return _int_box(mask_bbox_centroid(mask)[0])
        raise MissingRepresentationError(f"object_box: no object mask at frame {frame}")
    if name == GRIPPER_BOX:
        boxes = ann.derived.gripper_boxes if ann.derived else None
        if not boxes or frame not in boxes:
            raise MissingRepresentationError(f"gripper_box: none derived at frame {frame}")
        return _int_box(boxes[frame])
    if name == AFFORDANCE_BOX:
        box = ann.derived.grasp_affordance_box if ann.derived else None
        if box is None:
            raise MissingRepresentationError("affordance_box: not derived")
        return _int_box(box)
    if name == TRACE:
        if ann.trace2d is None:
            raise MissingRepresentationError("trace: trace2d not computed")
        return subsample_trace(ann.trace2d[frame : clip.end_frame + 1])
    raise MissingRepresentationError(f"unknown representation {name!r}")


def serialize_fcot(episode: Episode, frame: int, spec: FcotSpec):
    """Tagged text (or an OverlaySpec for the visual-prompt form) for one frame.

    Textual output is one `<tag>value</tag>` segment per selection, in spec
    order; boxes are integer `x1,y1,x2,y2`, traces `u,v;u,v;...` of at most 16
    subsampled waypoints. The visual form maps the geometric selections to
    overlay primitives (subtask/skill have no visual shape and contribute
    nothing).

    Raises:
        MissingRepresentationError: naming the first underivable selection.
    """
    values = {name: _representation_value(episode, frame, name) for name in spec.selection}
    if spec.form == VISUAL_PROMPT:
        prims = []
        for name in spec.selection:
            if name == OBJECT_BOX:
                prims.append(Box(PURPLE, tuple(float(v) for v in values[name])))
            elif name == GRIPPER_BOX:
                prims.append(Box(YELLOW, tuple(float(v) for v in values[name])))
            elif name == AFFORDANCE_BOX:
                prims.append(Box(WHITE, tuple(float(v) for v in values[name])))
            elif name == TRACE:
                prims.append(Polyline(tuple((float(u), float(v)) for u, v in values[name])))
        return OverlaySpec(
            width=episode.camera.width, height=episode.camera.height, primitives=tuple(prims)
        )
    parts = []
    for name in spec.selection:
        value = values[name]
        if name in (SUBTASK, SKILL):
            text = value
        elif name == TRACE:
            text = ";".join(f"{u},{v}" for u, v in value)
        else:
            text = ",".join(str(v) for v in value)
        parts.append(f"<{name}>{text}</{name}>")
    return "".join(parts)


_TAG_RE = re.compile(r"<(\w+)>(.*?)</\1>", re.DOTALL)


def parse_fcot(text: str) -> dict:
    """Invert serialize_fcot: tag -> typed value, in serialization order.

    Raises:
        ParseError: unknown tags, malformed numbers, or trailing junk.
    """
    out: dict = {}
    pos = 0
    for m in _TAG_RE.finditer(text):
        if text[pos : m.start()].strip():
            raise ParseError(f"unexpected text {text[pos:m.start()]!r}")
        tag, body = m.group(1), m.group(2)
        if tag not in REPRESENTATIONS:
            raise ParseError(f"unknown tag <{tag}>")
        if tag in (SUBTASK, SKILL):
            out[tag] = body
        elif tag == TRACE:
            try:
                out[tag] = tuple(
                    tuple(int(c) for c in point.split(",")) for point in body.split(";") if point
                )
            except ValueError as e:
                raise ParseError(f"<trace>: {e}") from e
            if any(len(p) != 2 for p in out[tag]):
                raise ParseError("<trace>: points must be u,v pairs")
        else:
            try:
                box = tuple(int(c) for c in body.split(","))
            except ValueError as e:
                raise ParseError(f"<{tag}>: {e}") from e
            if len(box) != 4:
                raise ParseError(f"<{tag}>: expected x1,y1,x2,y2, got {body!r}")
            out[tag] = box
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"trailing text {text[pos:]!r}")
    if not out:
        raise ParseError("no representation tags found")
    return out
