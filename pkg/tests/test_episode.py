import json
from dataclasses import replace

import numpy as np
import pytest

from manipkit.episode import (
    Clip,
    ContactAnnotation,
    load_episode,
    save_episode,
    validate_episode,
)
from manipkit.errors import InvariantError, IoError, SchemaError
from manipkit.synth import make_episode


def _episode():
    return make_episode("ep_test", seed=11)


def test_save_load_round_trip(tmp_path):
    ep = _episode()
    path = tmp_path / "ep_test.json"
    save_episode(ep, path)
    back = load_episode(path)
    assert back.episode_id == ep.episode_id
    assert back.num_frames == ep.num_frames
    assert back.annotations.clips == ep.annotations.clips
    assert back.annotations.object_masks == ep.annotations.object_masks
    for a, b in zip(ep.frames, back.frames):
        np.testing.assert_allclose(a.tcp_pose.translation, b.tcp_pose.translation)
        assert a.joint_positions == b.joint_positions


def test_save_is_byte_stable(tmp_path):
    ep = _episode()
    save_episode(ep, tmp_path / "a.json")
    save_episode(ep, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    reloaded = load_episode(tmp_path / "a.json")
    save_episode(reloaded, tmp_path / "c.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "c.json").read_bytes()


def test_validate_passes_on_fixture():
    assert validate_episode(_episode()) is not None


def test_validate_rejects_overlapping_clips():
    ep = _episode()
    clips = ep.annotations.clips
    overlapping = clips + (replace(clips[0], start_frame=clips[0].start_frame + 1),)
    bad = replace(ep, annotations=replace(ep.annotations, clips=overlapping))
    with pytest.raises(InvariantError, match="overlaps"):
        validate_episode(bad)


def test_validate_rejects_unknown_skill():
    ep = _episode()
    clips = (replace(ep.annotations.clips[0], skill="levitate"),) + ep.annotations.clips[1:]
    bad = replace(ep, annotations=replace(ep.annotations, clips=clips))
    with pytest.raises(InvariantError, match="skill"):
        validate_episode(bad)


def test_validate_rejects_inverted_clip():
    ep = _episode()
    clips = (Clip(start_frame=5, end_frame=5, skill="pick", description="x"),)
    bad = replace(ep, annotations=replace(ep.annotations, clips=clips))
    with pytest.raises(InvariantError):
        validate_episode(bad)


def test_validate_rejects_contact_without_mask():
    ep = _episode()
    contacts = (ContactAnnotation(frame=1, object_id="phantom"),)
    bad = replace(ep, annotations=replace(ep.annotations, contact_frames=contacts))
    with pytest.raises(InvariantError, match="phantom"):
        validate_episode(bad)


def test_validate_rejects_wrong_trace_length():
    ep = _episode()
    bad = replace(ep, annotations=replace(ep.annotations, trace2d=ep.annotations.trace2d[:-1]))
    with pytest.raises(InvariantError, match="trace2d"):
        validate_episode(bad)


def test_load_rejects_missing_file(tmp_path):
    with pytest.raises(IoError):
        load_episode(tmp_path / "absent.json")


def test_load_rejects_schema_violation(tmp_path):
    ep = _episode()
    path = tmp_path / "ep_test.json"
    save_episode(ep, path)
    doc = json.loads(path.read_text())
    del doc["camera"]
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        load_episode(path)


def test_load_rejects_invalid_camera(tmp_path):
    ep = _episode()
    path = tmp_path / "ep_test.json"
    save_episode(ep, path)
    doc = json.loads(path.read_text())
    doc["camera"]["width"] = -4
    path.write_text(json.dumps(doc))
    with pytest.raises(InvariantError):
        load_episode(path)
