"""Robot description parsing, forward kinematics, and pixel projection.

The description dialect is a strict URDF-like XML subset: <link> declarations,
<joint> elements of type revolute/prismatic/fixed with <parent>/<child>/
<origin>/<axis>, an optional <mimic source="gripper_opening"> binding finger
joints to the scalar gripper state, and fixed keypoint links whose names start
with ``kp_``. Full grammar in docs/formats.md.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .episode import CameraParams, FrameRecord
from .errors import (
    ArityError,
    BehindCameraError,
    CycleError,
    ParseError,
    TooFewVisibleError,
    UnknownLinkError,
)
from .geometry import Se3, quat_from_axis_angle

JOINT_TYPES = ("revolute", "prismatic", "fixed")
KEYPOINT_PREFIX = "kp_"


@dataclass(frozen=True)
class Mimic:
    source: str  # only "gripper_opening" is supported
    multiplier: float
    offset: float


@dataclass(frozen=True)
class Joint:
    name: str
    type: str
    parent: str
    child: str
    origin: Se3
    axis: np.ndarray | None
    mimic: Mimic | None = None


@dataclass(frozen=True)
class KeypointLink:
    name: str
    parent_link: str
    offset_in_parent: np.ndarray


@dataclass(frozen=True)
class RobotModel:
    name: str
    links: tuple[str, ...]
    joints: tuple[Joint, ...]
    keypoints: tuple[KeypointLink, ...]
    base_link: str
    ee_link: str | None = None

    @property
    def actuated_joints(self) -> tuple[Joint, ...]:
        """Joints driven by joint_positions, in document order."""
        return tuple(j for j in self.joints if j.type != "fixed" and j.mimic is None)


def _parse_vec(text: str | None, n: int, what: str) -> np.ndarray:
    parts = (text or "").split()
    if len(parts) != n:
        raise ParseError(f"{what}: expected {n} numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as e:
        raise ParseError(f"{what}: {e}") from e


def _origin_from(elem: ET.Element | None, what: str) -> Se3:
    if elem is None:
        return Se3.identity()
    xyz = _parse_vec(elem.get("xyz", "0 0 0"), 3, f"{what} xyz")
    rpy = _parse_vec(elem.get("rpy", "0 0 0"), 3, f"{what} rpy")
    rot = quat_from_axis_angle([0, 0, 1], rpy[2])
    rot = Se3(np.zeros(3), rot)
    rot = rot.compose(Se3(np.zeros(3), quat_from_axis_angle([0, 1, 0], rpy[1])))
    rot = rot.compose(Se3(np.zeros(3), quat_from_axis_angle([1, 0, 0], rpy[0])))
    return Se3(xyz, rot.rotation)


def parse_robot_description(text: str) -> RobotModel:
    """Parse the XML dialect into a tree-validated RobotModel.

    Raises:
        ParseError: malformed XML or unsupported element/attribute values.
        UnknownLinkError: a joint references an undeclared link.
        CycleError: the joint graph is not a tree rooted at one base link.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise ParseError(f"robot description: {e}") from e
    if root.tag != "robot":
        raise ParseError(f"expected <robot> root, got <{root.tag}>")

    declared = [el.get("name") for el in root.findall("link")]
    if any(not name for name in declared):
        raise ParseError("link without name attribute")
    if len(set(declared)) != len(declared):
        raise ParseError("duplicate link names")
    link_set = set(declared)

    joints: list[Joint] = []
    keypoints: list[KeypointLink] = []
    children: set[str] = set()
    for el in root.findall("joint"):
        name = el.get("name") or ""
        jtype = el.get("type") or ""
        if jtype not in JOINT_TYPES:
            raise ParseError(f"joint {name!r}: unsupported type {jtype!r}")
        parent_el, child_el = el.find("parent"), el.find("child")
        if parent_el is None or child_el is None:
            raise ParseError(f"joint {name!r}: missing <parent> or <child>")
        parent, child = parent_el.get("link"), child_el.get("link")
        for link in (parent, child):
            if link not in link_set:
                raise UnknownLinkError(f"joint {name!r} references undeclared link {link!r}")
        if child in children:
            raise CycleError(f"link {child!r} has two parent joints")
        children.add(child)
        origin = _origin_from(el.find("origin"), f"joint {name!r} origin")

        if child.startswith(KEYPOINT_PREFIX):
            if jtype != "fixed":
                raise ParseError(f"keypoint link {child!r} must hang on a fixed joint")
            keypoints.append(KeypointLink(child, parent, origin.translation))
            continue

        axis = None
        if jtype in ("revolute", "prismatic"):
            axis_el = el.find("axis")
            if axis_el is None:
                raise ParseError(f"joint {name!r}: {jtype} joint needs an <axis>")
            axis = _parse_vec(axis_el.get("xyz"), 3, f"joint {name!r} axis")
            norm = float(np.linalg.norm(axis))
            if abs(norm - 1.0) > 1e-6:
                raise ParseError(f"joint {name!r}: axis must be unit-norm, got |axis|={norm}")
            axis = axis / norm
        mimic = None
        mimic_el = el.find("mimic")
        if mimic_el is not None:
            source = mimic_el.get("source", "")
            if source != "gripper_opening":
                raise ParseError(f"joint {name!r}: unsupported mimic source {source!r}")
            mimic = Mimic(
                source=source,
                multiplier=float(mimic_el.get("multiplier", "1")),
                offset=float(mimic_el.get("offset", "0")),
            )
        joints.append(Joint(name, jtype, parent, child, origin, axis, mimic))

    kp_names = [kp.name for kp in keypoints]
    if len(set(kp_names)) != len(kp_names):
        raise ParseError("duplicate keypoint names")

    plain_links = tuple(l for l in declared if not l.startswith(KEYPOINT_PREFIX))
    roots = [l for l in plain_links if l not in children]
    if len(roots) != 1:
        raise CycleError(f"joint graph must have exactly one root link, found {roots}")

    # every non-root link must be reachable from the root
    reachable = {roots[0]}
    frontier = [roots[0]]
    by_parent: dict[str, list[Joint]] = {}
    for j in joints:
        by_parent.setdefault(j.parent, []).append(j)
    while frontier:
        link = frontier.pop()
        for j in by_parent.get(link, ()):
            reachable.add(j.child)
            frontier.append(j.child)
    unreachable = set(plain_links) - reachable
    if unreachable:
        raise CycleError(f"links not reachable from {roots[0]!r}: {sorted(unreachable)}")

    ee_link = root.get("ee_link")
    if ee_link is not None and ee_link not in link_set:
        raise UnknownLinkError(f"ee_link {ee_link!r} is not a declared link")
    return RobotModel(
        name=root.get("name", ""),
        links=plain_links,
        joints=tuple(joints),
        keypoints=tuple(keypoints),
        base_link=roots[0],
        ee_link=ee_link,
    )


def _joint_motion(joint: Joint, value: float) -> Se3:
    if joint.type == "revolute":
        return Se3(np.zeros(3), quat_from_axis_angle(joint.axis, value))
    if joint.type == "prismatic":
        return Se3.from_translation(joint.axis * value)
    return Se3.identity()


def forward_kinematics(
    model: RobotModel,
    joint_positions,
    gripper_opening: float = 0.0,
    ee_offset=None,
) -> dict[str, Se3]:
    """Pose of every link and keypoint in the base frame.

    Args:
        joint_positions: one value per actuated joint, in the model's
            actuated-joint order (radians for revolute, meters for prismatic).
        gripper_opening: normalized [0,1] state feeding the mimic joints.
        ee_offset: optional 3-vector translation applied in the end-effector
            link frame before the gripper subtree (the calibrated offset).

    Raises:
        ArityError: wrong joint_positions length.
    """
    actuated = model.actuated_joints
    if len(joint_positions) != len(actuated):
        raise ArityError(
            f"{model.name}: got {len(joint_positions)} joint positions, "
            f"expected {len(actuated)}"
        )
    values = {j.name: float(q) for j, q in zip(actuated, joint_positions)}
    for j in model.joints:
        if j.mimic is not None:
            values[j.name] = j.mimic.multiplier * float(gripper_opening) + j.mimic.offset

    offset_pose = None
    if ee_offset is not None and model.ee_link is not None:
        offset_pose = Se3.from_translation(np.asarray(ee_offset, dtype=float))

    poses: dict[str, Se3] = {model.base_link: Se3.identity()}
    by_parent: dict[str, list[Joint]] = {}
    for j in model.joints:
        by_parent.setdefault(j.parent, []).append(j)

    def outgoing(link: str) -> Se3:
        pose = poses[link]
        if offset_pose is not None and link == model.ee_link:
            return pose.compose(offset_pose)
        return pose

    frontier = [model.base_link]
    while frontier:
        link = frontier.pop()
        for j in by_parent.get(link, ()):
            poses[j.child] = outgoing(link).compose(j.origin).compose(_joint_motion(j, values.get(j.name, 0.0)))
            frontier.append(j.child)

    for kp in model.keypoints:
        parent = outgoing(kp.parent_link)
        poses[kp.name] = Se3(parent.apply(kp.offset_in_parent), parent.rotation)
    return poses


def project_point(camera: CameraParams, point_base) -> tuple[float, float]:
    """Pinhole projection of a base-frame point to pixel coordinates.

    Raises:
        BehindCameraError: point is at or behind the image plane (z <= 1e-9).
    """
    p = camera.extrinsics.apply(np.asarray(point_base, dtype=float))
    z = float(p[2])
    if z <= 1e-9:
        raise BehindCameraError(f"point at camera-frame z={z}")
    return (
        float(camera.fx * p[0] / z + camera.cx),
        float(camera.fy * p[1] / z + camera.cy),
    )


@dataclass(frozen=True)
class ProjectedKeypoints:
    """Visible keypoint pixels plus the names that fell behind the camera."""

    pixels: dict[str, tuple[float, float]]
    behind: frozenset[str]


def project_keypoints(
    model: RobotModel,
    camera: CameraParams,
    frame: FrameRecord,
    ee_offset=None,
) -> ProjectedKeypoints:
    """Project all gripper keypoints of one frame's configuration to pixels."""
    poses = forward_kinematics(
        model, frame.joint_positions, gripper_opening=frame.gripper_opening, ee_offset=ee_offset
    )
    pixels: dict[str, tuple[float, float]] = {}
    behind = set()
    for kp in model.keypoints:
        try:
            pixels[kp.name] = project_point(camera, poses[kp.name].translation)
        except BehindCameraError:
            behind.add(kp.name)
    return ProjectedKeypoints(pixels=pixels, behind=frozenset(behind))


def gripper_bbox(keypoint_pixels: dict, camera: CameraParams) -> tuple[float, float, float, float]:
    """Tight box over visible keypoint pixels, clamped to the image.

    Raises:
        TooFewVisibleError: fewer than two visible keypoints.
    """
    if len(keypoint_pixels) < 2:
        raise TooFewVisibleError(f"need >=2 visible keypoints, got {len(keypoint_pixels)}")
    us = [p[0] for p in keypoint_pixels.values()]
    vs = [p[1] for p in keypoint_pixels.values()]

    def clamp(val: float, hi: int) -> float:
        return min(max(val, 0.0), float(hi - 1))

    return (
        clamp(min(us), camera.width),
        clamp(min(vs), camera.height),
        clamp(max(us), camera.width),
        clamp(max(vs), camera.height),
    )
