import json
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from PIL import Image

from manipkit.derive import derive_all
from manipkit.errors import (
    DimMismatchError,
    InvariantError,
    MissingAnnotationError,
    SchemaError,
)
from manipkit.masks import mask_bbox_centroid
from manipkit.metrics import iou
from manipkit.skills import SKILLS
from manipkit.synth import make_episode
from manipkit.traces import subsample_trace
from manipkit.vqa.generate import (
    EVAL,
    FAMILY_AXES,
    LETTERS,
    TRAIN,
    CorpusContext,
    assign_split,
    check_split_leakage,
    generate_items,
    item_to_jsonable,
    read_items_jsonl,
    write_items_jsonl,
)
from manipkit.vqa.overlay import (
    COLOR_NAMES,
    ORANGE,
    PURPLE,
    RED,
    Arrow,
    Box,
    ForkMarker,
    OverlaySpec,
    Polyline,
    render_overlay,
    spec_from_jsonable,
    spec_to_jsonable,
)
from manipkit.vqa.templates import BANKS, template_fragments

BACKGROUND = (203, 203, 208)


@pytest.fixture(scope="module")
def corpus(arm6):
    return [derive_all(make_episode(f"ep{i:02d}", seed=i), arm6) for i in range(4)]


@pytest.fixture(scope="module")
def context(corpus):
    return CorpusContext.from_episodes(corpus)


@pytest.fixture(scope="module")
def items(corpus, context):
    return generate_items(corpus[0], rng_seed=7, context=context)


def test_generation_is_byte_deterministic(corpus, context):
    first = generate_items(corpus[0], rng_seed=7, context=context)
    second = generate_items(corpus[0], rng_seed=7, context=context)
    a = "\n".join(json.dumps(item_to_jsonable(i), sort_keys=True) for i in first)
    b = "\n".join(json.dumps(item_to_jsonable(i), sort_keys=True) for i in second)
    assert a == b


def test_families_generate_independently(corpus, context):
    full = generate_items(corpus[0], rng_seed=7, context=context)
    solo = generate_items(corpus[0], families=["trace_choice"], rng_seed=7, context=context)
    assert solo == [i for i in full if i.family == "trace_choice"]


def test_unknown_family_is_rejected(corpus):
    with pytest.raises(ValueError, match="unknown families"):
        generate_items(corpus[0], families=["mind_reading"])


def test_item_invariants(items):
    assert items, "fixture corpus produced no items"
    for item in items:
        eid, family, ordinal = item.item_id.split("/")
        assert eid == item.episode_id and family == item.family
        assert len(ordinal) == 4 and ordinal.isdigit()
        assert item.axis == FAMILY_AXES[item.family]
        assert item.images and item.frames
        if item.choices is not None:
            assert len(set(item.choices)) == len(item.choices)
            assert item.answer in item.choices


def _matches_template(prompt, template):
    pos = 0
    for frag in template_fragments(template):
        found = prompt.find(frag, pos)
        if found < 0:
            return False
        pos = found + len(frag)
    return True


def test_prompts_are_filled_bank_templates(items):
    for item in items:
        bank = BANKS[item.family]
        assert any(
            _matches_template(item.prompt, template) for template in bank
        ), f"{item.item_id}: prompt matches no template"


def test_grounding_distractor_boxes_stay_apart(items):
    checked = 0
    for item in items:
        if item.family != "grounding_choice":
            continue
        boxes = [ref.overlay.primitives[0].rect for ref in item.images]
        truth = boxes[LETTERS.index(item.answer)]
        for k, box in enumerate(boxes):
            if k != LETTERS.index(item.answer):
                assert iou(box, truth) <= 0.3 + 1e-9
        checked += 1
    assert checked


def test_grasp_pose_marker_sits_on_the_trace(items, corpus):
    ep = corpus[0]
    contact = min(ep.annotations.contact_frames, key=lambda c: c.frame)
    u, v = ep.annotations.trace2d[contact.frame]
    for item in items:
        if item.family != "grasp_pose_choice":
            continue
        marker = item.images[LETTERS.index(item.answer)].overlay.primitives[0]
        assert isinstance(marker, ForkMarker) and marker.color == ORANGE
        assert marker.pose2d[0] == pytest.approx(float(u))
        assert marker.pose2d[1] == pytest.approx(float(v))


def test_direction_choices_are_color_names(items):
    for item in items:
        if item.family != "trace_direction_choice":
            continue
        assert set(item.choices) == set(COLOR_NAMES)
        arrows = item.images[0].overlay.primitives
        assert len(arrows) == len(item.choices)
        for name, arrow in zip(item.choices, arrows):
            assert isinstance(arrow, Arrow)
            assert arrow.color == COLOR_NAMES[name]


def test_trace_generation_answers_recompute(items, corpus):
    ep = corpus[0]
    clips = sorted(ep.annotations.clips, key=lambda c: c.start_frame)
    by_start = {c.start_frame: c for c in clips}
    for item in items:
        if item.family not in ("trace_easy", "trace_hard"):
            continue
        clip = by_start[item.frames[0]]
        canonical = subsample_trace(
            ep.annotations.trace2d[clip.start_frame : clip.end_frame + 1]
        )
        if item.family == "trace_hard":
            assert item.answer == canonical
        else:
            n_ctx = max(1, len(canonical) // 4)
            assert item.answer == canonical[n_ctx:]
            given = ";".join(f"{x},{y}" for x, y in canonical[:n_ctx])
            assert given in item.prompt


def test_keypoint_answer_is_contact_point_mean(items, corpus):
    points = list(corpus[0].annotations.derived.contact_points.values())
    u = sum(p[0] for p in points) / len(points)
    v = sum(p[1] for p in points) / len(points)
    (item,) = [i for i in items if i.family == "grasp_affordance_keypoint"]
    assert item.answer == (int(round(u)), int(round(v)))


def _distinct_points(points):
    return len({(round(u, 6), round(v, 6)) for u, v in points})


def _expected_counts(ep, ctx):
    """Per-family item counts recomputed from the annotation structure alone."""
    ann = ep.annotations
    clips = sorted(ann.clips, key=lambda c: c.start_frame)
    contacts = sorted(ann.contact_frames, key=lambda c: c.frame)
    n_clips = len(clips)

    def clip_at(frame):
        return next(
            (c for c in clips if c.start_frame <= frame <= c.end_frame), None
        )

    def has_mask(object_id, frame):
        return frame in ann.object_masks.get(object_id, {})

    def clip_trace(clip):
        return ann.trace2d[clip.start_frame : clip.end_frame + 1]

    def pool_excluding(exclude):
        pool = [c.description for c in clips if c.description not in exclude]
        pool += [t for t in ctx.other_clip_texts(ep.episode_id) if t not in exclude]
        return list(dict.fromkeys(pool))

    moving = [c for c in clips if _distinct_points(clip_trace(c)) >= 2]

    counts = Counter()
    for contact in contacts:
        clip = clip_at(contact.frame)
        if clip is not None:
            counts["contact_decide"] += 1 + (clip.start_frame < contact.frame)
            if has_mask(contact.object_id, contact.frame):
                counts["object_grounding_gen"] += 1
        if has_mask(contact.object_id, contact.frame):
            counts["grounding_choice"] += 1
    counts["grasp_pose_choice"] = 1 if contacts else 0
    counts["scene_understanding"] = 1 if len(ctx.other_scenes(ep.episode_id)) >= 3 else 0
    counts["grasp_affordance_box"] = 1
    counts["grasp_affordance_keypoint"] = 1
    box_frames = sorted(ann.derived.gripper_boxes)
    counts["gripper_detection"] = len(
        {box_frames[0], box_frames[len(box_frames) // 2], box_frames[-1]}
    )
    counts["place_affordance"] = sum(
        1
        for c in clips
        if c.object_id is not None and has_mask(c.object_id, c.end_frame)
    )
    counts["trace_choice"] = len(moving)
    counts["trace_direction_choice"] = len(moving)
    counts["trace_language_choice"] = sum(
        1 for c in moving if pool_excluding({c.description})
    )
    counts["past_multitask_selection"] = sum(
        1
        for k in range(1, n_clips)
        if len(
            dict.fromkeys(
                [c.description for c in clips[k:] if c.description != clips[k - 1].description]
                + [
                    t
                    for t in ctx.other_clip_texts(ep.episode_id)
                    if t != clips[k - 1].description
                ]
            )
        )
        >= 3
    )
    counts["future_multitask_selection"] = sum(
        1
        for k in range(n_clips)
        if len(
            dict.fromkeys(
                [c.description for j, c in enumerate(clips) if j != k and c.description != clips[k].description]
                + [
                    t
                    for t in ctx.other_clip_texts(ep.episode_id)
                    if t != clips[k].description
                ]
            )
        )
        >= 3
    )
    counts["past_primitive_selection"] = max(n_clips - 1, 0)
    counts["future_primitive_selection"] = n_clips
    if n_clips >= 2:
        eligible = []
        for target in clips:
            candidates = [
                (c.start_frame + c.end_frame) // 2 for c in clips if c is not target
            ] + [0, ep.num_frames - 1]
            outside = []
            for frame in candidates:
                inside = target.start_frame <= frame <= target.end_frame
                if not inside and frame not in outside:
                    outside.append(frame)
            eligible.append(len(outside) >= 3)
        assert all(eligible) or not any(eligible), "oracle needs a uniform corpus"
        counts["temporal_understanding"] = 1 if all(eligible) else 0
    counts["success_positive"] = n_clips
    counts["success_negative"] = max(n_clips - 1, 0)
    counts["discriminative_affordance_positive"] = n_clips
    counts["discriminative_affordance_negative"] = sum(
        1 for c in clips if pool_excluding({c.description})
    )
    long_moving = sum(
        1
        for c in clips
        if len(clip_trace(c)) >= 8 and _distinct_points(clip_trace(c)) >= 2
    )
    counts["trace_easy"] = long_moving
    counts["trace_hard"] = long_moving
    counts["planning_task"] = n_clips
    counts["planning_with_context"] = max(n_clips - 1, 0)
    counts["planning_remaining_steps"] = max(n_clips - 1, 0)
    counts["generative_affordance"] = n_clips
    counts["future_prediction"] = max(n_clips - 1, 0)
    counts["past_description"] = max(n_clips - 1, 0)
    return {k: v for k, v in counts.items() if v}


def test_per_family_counts_match_structure_oracle(corpus, context):
    for ep in corpus:
        got = Counter(i.family for i in generate_items(ep, rng_seed=3, context=context))
        assert dict(got) == _expected_counts(ep, context)


def test_families_missing_their_annotations_raise(corpus):
    ep = corpus[0]
    no_trace = replace(ep, annotations=replace(ep.annotations, trace2d=None))
    for family in ("trace_choice", "trace_easy", "trace_hard"):
        with pytest.raises(MissingAnnotationError):
            generate_items(no_trace, families=[family])
    bare = replace(ep, annotations=replace(ep.annotations, derived=None))
    for family in ("grasp_affordance_box", "gripper_detection"):
        with pytest.raises(MissingAnnotationError):
            generate_items(bare, families=[family])


def test_split_assignment_and_leakage_check(items):
    tagged = assign_split(items, {"ep00"})
    assert all(i.split == EVAL for i in tagged)
    tagged = assign_split(items, {"ep03"})
    assert all(i.split == TRAIN for i in tagged)
    check_split_leakage(tagged)
    leaked = [replace(items[0], split=TRAIN), replace(items[1], split=EVAL)]
    with pytest.raises(InvariantError, match="both splits"):
        check_split_leakage(leaked)


def test_items_jsonl_round_trip(tmp_path, items):
    path = tmp_path / "items.jsonl"
    write_items_jsonl(items, path)
    assert read_items_jsonl(path) == items
    first_line = path.read_text(encoding="utf-8").splitlines()[0]
    assert json.loads(first_line)["item_id"] == items[0].item_id


# -------------------------------------------------------------- overlays


def _flat(width=64, height=48):
    return Image.new("RGB", (width, height), BACKGROUND)


def test_box_ring_matches_brute_force():
    rect = (5, 7, 20, 18)
    spec = OverlaySpec(64, 48, (Box(PURPLE, rect, stroke=2),))
    out = render_overlay(_flat(), spec)
    px = out.load()
    x1, y1, x2, y2 = rect
    for y in range(48):
        for x in range(64):
            on_ring = (
                x1 <= x <= x2
                and y1 <= y <= y2
                and not (x1 + 2 <= x <= x2 - 2 and y1 + 2 <= y <= y2 - 2)
            )
            assert px[x, y] == (PURPLE if on_ring else BACKGROUND), (x, y)


def test_polyline_gradient_runs_green_to_red():
    spec = OverlaySpec(64, 48, (Polyline(((2.0, 2.0), (30.0, 2.0))),))
    px = render_overlay(_flat(), spec).load()
    assert px[2, 2] == (0, 255, 0)
    assert px[30, 2] == (255, 0, 0)
    for x in range(3, 30):
        t = (x - 2) / 28.0
        assert px[x, 2] == (round(255 * t), round(255 * (1.0 - t)), 0)
    # nothing outside the segment is touched
    assert px[1, 2] == BACKGROUND and px[31, 2] == BACKGROUND and px[16, 3] == BACKGROUND


def test_arrow_uses_its_color_and_draws_barbs():
    spec = OverlaySpec(64, 48, (Arrow(RED, (5.0, 24.0), (40.0, 24.0)),))
    px = render_overlay(_flat(), spec).load()
    assert px[5, 24] == RED and px[40, 24] == RED
    shaft = sum(1 for x in range(5, 41) if px[x, 24] == RED)
    off_shaft = sum(
        1
        for y in range(48)
        for x in range(64)
        if px[x, y] == RED and y != 24
    )
    assert shaft == 36
    assert off_shaft > 0  # barbs leave the shaft line


def test_fork_marker_touches_its_center():
    spec = OverlaySpec(64, 48, (ForkMarker(ORANGE, (32.0, 24.0, 0.0)),))
    px = render_overlay(_flat(), spec).load()
    assert px[32, 24] == ORANGE


def test_render_does_not_mutate_the_input():
    image = _flat()
    before = np.asarray(image).copy()
    render_overlay(image, OverlaySpec(64, 48, (Box(PURPLE, (1, 1, 10, 10)),)))
    assert np.array_equal(np.asarray(image), before)


def test_render_rejects_size_mismatch():
    with pytest.raises(DimMismatchError):
        render_overlay(_flat(32, 32), OverlaySpec(64, 48, ()))


def test_overlay_spec_json_round_trip():
    spec = OverlaySpec(
        64,
        48,
        (
            Box(PURPLE, (1.0, 2.0, 3.0, 4.0)),
            Arrow(RED, (0.0, 0.0), (5.0, 5.0)),
            Polyline(((1.0, 1.0), (2.0, 2.0))),
            ForkMarker(ORANGE, (3.0, 3.0, 0.5)),
        ),
    )
    assert spec_from_jsonable(spec_to_jsonable(spec)) == spec
    with pytest.raises(SchemaError):
        spec_from_jsonable({"width": 8, "height": 8, "primitives": [{"kind": "blob"}]})


def test_primitive_selection_offers_skill_names(items):
    displays = [display for display, _ in SKILLS.values()]
    for item in items:
        if item.family.endswith("primitive_selection"):
            assert item.choices == LETTERS
            named = [d for d in displays if d in item.prompt]
            assert len(named) >= 4
