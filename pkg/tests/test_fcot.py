import itertools

import pytest
from dataclasses import replace

from manipkit.errors import MissingRepresentationError, ParseError
from manipkit.fcot import (
    AFFORDANCE_BOX,
    GRIPPER_BOX,
    OBJECT_BOX,
    REPRESENTATIONS,
    SKILL,
    SUBTASK,
    TRACE,
    VISUAL_PROMPT,
    FcotSpec,
    parse_fcot,
    serialize_fcot,
)
from manipkit.masks import mask_bbox_centroid
from manipkit.traces import subsample_trace
from manipkit.vqa.overlay import PURPLE, WHITE, YELLOW, Box, OverlaySpec, Polyline


@pytest.fixture(scope="module")
def frame(derived_episode):
    return min(derived_episode.annotations.contact_frames, key=lambda c: c.frame).frame


def _expected_values(ep, frame):
    ann = ep.annotations
    clip = next(
        c
        for c in sorted(ann.clips, key=lambda c: c.start_frame)
        if c.start_frame <= frame <= c.end_frame
    )
    obj_box, _ = mask_bbox_centroid(ann.object_masks[clip.object_id][frame])
    return {
        SUBTASK: clip.description,
        SKILL: clip.skill,
        OBJECT_BOX: tuple(int(round(v)) for v in obj_box),
        GRIPPER_BOX: tuple(int(round(v)) for v in ann.derived.gripper_boxes[frame]),
        AFFORDANCE_BOX: tuple(int(round(v)) for v in ann.derived.grasp_affordance_box),
        TRACE: subsample_trace(ann.trace2d[frame : clip.end_frame + 1]),
    }


def test_every_selection_round_trips(derived_episode, frame):
    expected = _expected_values(derived_episode, frame)
    count = 0
    for r in range(1, len(REPRESENTATIONS) + 1):
        for subset in itertools.combinations(REPRESENTATIONS, r):
            count += 1
            text = serialize_fcot(derived_episode, frame, FcotSpec(subset))
            parsed = parse_fcot(text)
            assert tuple(parsed) == subset
            for name in subset:
                assert parsed[name] == expected[name]
    assert count == 63


def test_textual_format_is_tagged_segments(derived_episode, frame):
    expected = _expected_values(derived_episode, frame)
    text = serialize_fcot(derived_episode, frame, FcotSpec((SKILL, OBJECT_BOX, TRACE)))
    x1, y1, x2, y2 = expected[OBJECT_BOX]
    trace_text = ";".join(f"{u},{v}" for u, v in expected[TRACE])
    assert text == (
        f"<skill>{expected[SKILL]}</skill>"
        f"<object_box>{x1},{y1},{x2},{y2}</object_box>"
        f"<trace>{trace_text}</trace>"
    )


def test_selection_order_is_preserved(derived_episode, frame):
    forward = serialize_fcot(derived_episode, frame, FcotSpec((SKILL, SUBTASK)))
    assert list(parse_fcot(forward)) == [SKILL, SUBTASK]
    backward = serialize_fcot(derived_episode, frame, FcotSpec((SUBTASK, SKILL)))
    assert list(parse_fcot(backward)) == [SUBTASK, SKILL]


def test_spec_validation():
    with pytest.raises(ValueError):
        FcotSpec(())
    with pytest.raises(ValueError):
        FcotSpec((SKILL, SKILL))
    with pytest.raises(ValueError):
        FcotSpec(("telepathy",))
    with pytest.raises(ValueError):
        FcotSpec((SKILL,), form="interpretive_dance")


def test_parse_rejects_malformed_text():
    with pytest.raises(ParseError, match="unknown tag"):
        parse_fcot("<bogus>x</bogus>")
    with pytest.raises(ParseError, match="unexpected text"):
        parse_fcot("hello <skill>pick</skill>")
    with pytest.raises(ParseError, match="trailing text"):
        parse_fcot("<skill>pick</skill> bye")
    with pytest.raises(ParseError):
        parse_fcot("<object_box>1,2,3</object_box>")
    with pytest.raises(ParseError):
        parse_fcot("<object_box>a,b,c,d</object_box>")
    with pytest.raises(ParseError):
        parse_fcot("<trace>1,2;3</trace>")
    with pytest.raises(ParseError):
        parse_fcot("   ")


def test_missing_representations_raise(derived_episode, frame):
    ann = derived_episode.annotations
    gap = replace(derived_episode, annotations=replace(ann, clips=ann.clips[:1]))
    beyond = ann.clips[0].end_frame + 1
    with pytest.raises(MissingRepresentationError, match="subtask"):
        serialize_fcot(gap, beyond, FcotSpec((SUBTASK,)))

    no_masks = replace(derived_episode, annotations=replace(ann, object_masks={}))
    with pytest.raises(MissingRepresentationError, match="object_box"):
        serialize_fcot(no_masks, frame, FcotSpec((OBJECT_BOX,)))

    no_boxes = replace(
        derived_episode,
        annotations=replace(ann, derived=replace(ann.derived, gripper_boxes={})),
    )
    with pytest.raises(MissingRepresentationError, match="gripper_box"):
        serialize_fcot(no_boxes, frame, FcotSpec((GRIPPER_BOX,)))

    no_afford = replace(
        derived_episode,
        annotations=replace(ann, derived=replace(ann.derived, grasp_affordance_box=None)),
    )
    with pytest.raises(MissingRepresentationError, match="affordance_box"):
        serialize_fcot(no_afford, frame, FcotSpec((AFFORDANCE_BOX,)))

    no_trace = replace(derived_episode, annotations=replace(ann, trace2d=None))
    with pytest.raises(MissingRepresentationError, match="trace"):
        serialize_fcot(no_trace, frame, FcotSpec((TRACE,)))


def test_visual_form_maps_selections_to_primitives(derived_episode, frame):
    expected = _expected_values(derived_episode, frame)
    spec = FcotSpec(
        (SUBTASK, OBJECT_BOX, SKILL, GRIPPER_BOX, AFFORDANCE_BOX, TRACE),
        form=VISUAL_PROMPT,
    )
    overlay = serialize_fcot(derived_episode, frame, spec)
    assert isinstance(overlay, OverlaySpec)
    assert overlay.width == derived_episode.camera.width
    assert overlay.height == derived_episode.camera.height
    # subtask and skill have no geometry, so four primitives remain
    assert len(overlay.primitives) == 4
    obj, grip, afford, trace = overlay.primitives
    assert isinstance(obj, Box) and obj.color == PURPLE
    assert obj.rect == tuple(float(v) for v in expected[OBJECT_BOX])
    assert isinstance(grip, Box) and grip.color == YELLOW
    assert isinstance(afford, Box) and afford.color == WHITE
    assert isinstance(trace, Polyline)
    assert trace.points == tuple((float(u), float(v)) for u, v in expected[TRACE])
