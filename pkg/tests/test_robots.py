import xml.etree.ElementTree as ET

import numpy as np
import pytest

from manipkit.errors import (
    ArityError,
    BehindCameraError,
    CycleError,
    ParseError,
    TooFewVisibleError,
    UnknownLinkError,
)
from manipkit.robots import (
    forward_kinematics,
    gripper_bbox,
    parse_robot_description,
    project_keypoints,
    project_point,
)
from manipkit.synth import ARM6_XML, PLANAR2_XML, make_camera, make_episode

# --- independent FK oracle on 4x4 homogeneous matrices -------------------------


def _rot(axis, angle):
    x, y, z = axis
    k = np.array([[0, -z, y], [z, 0, -x], [-y, x, 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def _hom(rotation, translation):
    m = np.eye(4)
    m[:3, :3] = rotation
    m[:3, 3] = translation
    return m


def _origin_matrix(elem):
    if elem is None:
        return np.eye(4)
    xyz = [float(v) for v in (elem.get("xyz", "0 0 0")).split()]
    r, p, y = (float(v) for v in (elem.get("rpy", "0 0 0")).split())
    rot = _rot([0, 0, 1], y) @ _rot([0, 1, 0], p) @ _rot([1, 0, 0], r)
    return _hom(rot, xyz)


def _fk_oracle(xml, joint_positions, gripper_opening, ee_offset=None):
    """Forward kinematics straight from the XML, using homogeneous matrices."""
    root = ET.fromstring(xml)
    ee_link = root.get("ee_link")
    joints = []
    for el in root.findall("joint"):
        entry = {
            "type": el.get("type"),
            "parent": el.find("parent").get("link"),
            "child": el.find("child").get("link"),
            "origin": _origin_matrix(el.find("origin")),
            "axis": None,
            "mimic": None,
        }
        axis_el = el.find("axis")
        if axis_el is not None:
            entry["axis"] = np.array([float(v) for v in axis_el.get("xyz").split()])
        mimic_el = el.find("mimic")
        if mimic_el is not None:
            entry["mimic"] = (
                float(mimic_el.get("multiplier", "1")),
                float(mimic_el.get("offset", "0")),
            )
        joints.append(entry)

    actuated = [j for j in joints if j["type"] != "fixed" and j["mimic"] is None]
    values = {id(j): q for j, q in zip(actuated, joint_positions)}
    children = {j["child"] for j in joints}
    links = [el.get("name") for el in root.findall("link")]
    base = next(l for l in links if not l.startswith("kp_") and l not in children)

    poses = {base: np.eye(4)}
    offset_m = np.eye(4)
    if ee_offset is not None:
        offset_m = _hom(np.eye(3), np.asarray(ee_offset, dtype=float))

    def outgoing(link):
        pose = poses[link]
        return pose @ offset_m if (ee_offset is not None and link == ee_link) else pose

    remaining = list(joints)
    while remaining:
        progressed = []
        for j in remaining:
            if j["parent"] not in poses:
                continue
            if j["mimic"] is not None:
                q = j["mimic"][0] * gripper_opening + j["mimic"][1]
            else:
                q = values.get(id(j), 0.0)
            if j["type"] == "revolute":
                motion = _hom(_rot(j["axis"], q), np.zeros(3))
            elif j["type"] == "prismatic":
                motion = _hom(np.eye(3), j["axis"] * q)
            else:
                motion = np.eye(4)
            poses[j["child"]] = outgoing(j["parent"]) @ j["origin"] @ motion
            progressed.append(j)
        for j in progressed:
            remaining.remove(j)
        assert progressed, "oracle could not order the joint tree"
    return poses


@pytest.mark.parametrize("xml", [ARM6_XML, PLANAR2_XML], ids=["arm6", "planar2"])
def test_fk_matches_homogeneous_oracle(xml):
    model = parse_robot_description(xml)
    rng = np.random.default_rng(42)
    n = len(model.actuated_joints)
    for _ in range(200):
        q = rng.uniform(-np.pi, np.pi, size=n)
        opening = float(rng.uniform(0, 1))
        offset = rng.uniform(-0.1, 0.1, size=3) if rng.random() < 0.5 else None
        poses = forward_kinematics(model, q, gripper_opening=opening, ee_offset=offset)
        oracle = _fk_oracle(xml, q, opening, ee_offset=offset)
        for link, pose in poses.items():
            if link in oracle:
                np.testing.assert_allclose(
                    pose.translation, oracle[link][:3, 3], atol=1e-10, err_msg=link
                )


def test_keypoints_ride_their_parent_links(arm6):
    q = np.zeros(len(arm6.actuated_joints))
    poses = forward_kinematics(arm6, q, gripper_opening=0.5)
    for kp in arm6.keypoints:
        parent = poses[kp.parent_link]
        np.testing.assert_allclose(
            poses[kp.name].translation, parent.apply(kp.offset_in_parent), atol=1e-12
        )


def test_fk_rejects_wrong_arity(arm6):
    with pytest.raises(ArityError):
        forward_kinematics(arm6, [0.0, 0.0])


def test_ee_offset_moves_only_the_ee_subtree(arm6):
    q = np.linspace(-0.4, 0.4, len(arm6.actuated_joints))
    base = forward_kinematics(arm6, q)
    shifted = forward_kinematics(arm6, q, ee_offset=(0.02, -0.01, 0.03))
    np.testing.assert_allclose(base["l3"].translation, shifted["l3"].translation, atol=1e-12)
    moved = np.linalg.norm(base["kp_tip_left"].translation - shifted["kp_tip_left"].translation)
    assert moved > 0.01


def test_project_point_pinhole_formula():
    cam = make_camera()
    r = cam.extrinsics
    # choose a base point mapping to camera frame (0.1, -0.05, 0.8)
    target_cam = np.array([0.1, -0.05, 0.8])
    base_point = r.invert().apply(target_cam)
    u, v = project_point(cam, base_point)
    assert u == pytest.approx(cam.fx * 0.1 / 0.8 + cam.cx, abs=1e-9)
    assert v == pytest.approx(cam.fy * -0.05 / 0.8 + cam.cy, abs=1e-9)


def test_project_point_rejects_points_behind_camera():
    cam = make_camera()
    behind = cam.extrinsics.invert().apply(np.array([0.0, 0.0, -0.5]))
    with pytest.raises(BehindCameraError):
        project_point(cam, behind)


def test_project_keypoints_reports_behind_names(arm6):
    ep = make_episode("ep_proj", seed=1)
    proj = project_keypoints(arm6, ep.camera, ep.frames[0])
    assert set(proj.pixels) | set(proj.behind) == {kp.name for kp in arm6.keypoints}
    assert proj.behind == frozenset()


def test_gripper_bbox_is_tight_and_clamped():
    cam = make_camera()
    pixels = {"a": (10.0, 20.0), "b": (50.0, 5.0), "c": (-7.0, 400.0)}
    box = gripper_bbox(pixels, cam)
    assert box == (0.0, 5.0, 50.0, cam.height - 1.0)
    with pytest.raises(TooFewVisibleError):
        gripper_bbox({"a": (1.0, 1.0)}, cam)


# --- parser rejections ---------------------------------------------------------


def test_parse_rejects_non_robot_root():
    with pytest.raises(ParseError):
        parse_robot_description("<arm><link name='a'/></arm>")


def test_parse_rejects_undeclared_link():
    xml = """<robot name="r"><link name="a"/><link name="b"/>
      <joint name="j" type="fixed"><parent link="a"/><child link="ghost"/></joint>
    </robot>"""
    with pytest.raises(UnknownLinkError):
        parse_robot_description(xml)


def test_parse_rejects_two_parents():
    xml = """<robot name="r"><link name="a"/><link name="b"/><link name="c"/>
      <joint name="j1" type="fixed"><parent link="a"/><child link="c"/></joint>
      <joint name="j2" type="fixed"><parent link="b"/><child link="c"/></joint>
    </robot>"""
    with pytest.raises(CycleError):
        parse_robot_description(xml)


def test_parse_rejects_revolute_without_axis():
    xml = """<robot name="r"><link name="a"/><link name="b"/>
      <joint name="j" type="revolute"><parent link="a"/><child link="b"/></joint>
    </robot>"""
    with pytest.raises(ParseError):
        parse_robot_description(xml)


def test_parse_rejects_non_unit_axis():
    xml = """<robot name="r"><link name="a"/><link name="b"/>
      <joint name="j" type="revolute"><parent link="a"/><child link="b"/>
        <axis xyz="0 0 2"/></joint>
    </robot>"""
    with pytest.raises(ParseError):
        parse_robot_description(xml)
