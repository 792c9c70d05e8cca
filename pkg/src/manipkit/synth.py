"""Synthetic desk-scale fixtures: robots, cameras, episodes, and corpora.

Real corpora are enormous; these generators produce small, fully annotated
episodes with known ground truth so every stage of the toolchain can be
exercised and checked end to end.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .episode import (
    AnnotationSet,
    CameraParams,
    Clip,
    ContactAnnotation,
    Episode,
    FrameRecord,
    save_episode,
)
from .geometry import Se3, quat_from_matrix
from .masks import encode_mask
from .robots import RobotModel, forward_kinematics, parse_robot_description, project_point
from .skills import fill_template

PLANAR2_XML = """\
<robot name="planar2">
  <link name="base"/>
  <link name="l1"/>
  <link name="l2"/>
  <joint name="j1" type="revolute">
    <parent link="base"/>
    <child link="l1"/>
    <origin xyz="0 0 0"/>
    <axis xyz="0 0 1"/>
  </joint>
  <joint name="j2" type="revolute">
    <parent link="l1"/>
    <child link="l2"/>
    <origin xyz="1 0 0"/>
    <axis xyz="0 0 1"/>
  </joint>
</robot>
"""

ARM6_XML = """\
<robot name="arm6" ee_link="ee">
  <link name="base"/>
  <link name="l1"/>
  <link name="l2"/>
  <link name="l3"/>
  <link name="l4"/>
  <link name="l5"/>
  <link name="ee"/>
  <link name="gripper"/>
  <link name="finger_left"/>
  <link name="finger_right"/>
  <link name="kp_tip_left"/>
  <link name="kp_tip_right"/>
  <link name="kp_jaw_left"/>
  <link name="kp_jaw_right"/>
  <joint name="j1" type="revolute">
    <parent link="base"/>
    <child link="l1"/>
    <origin xyz="0 0 0.15"/>
    <axis xyz="0 0 1"/>
  </joint>
  <joint name="j2" type="revolute">
    <parent link="l1"/>
    <child link="l2"/>
    <origin xyz="0 0 0.10"/>
    <axis xyz="0 1 0"/>
  </joint>
  <joint name="j3" type="revolute">
    <parent link="l2"/>
    <child link="l3"/>
    <origin xyz="0 0 0.25"/>
    <axis xyz="0 1 0"/>
  </joint>
  <joint name="j4" type="revolute">
    <parent link="l3"/>
    <child link="l4"/>
    <origin xyz="0 0 0.20"/>
    <axis xyz="0 0 1"/>
  </joint>
  <joint name="j5" type="revolute">
    <parent link="l4"/>
    <child link="l5"/>
    <origin xyz="0 0 0.12"/>
    <axis xyz="0 1 0"/>
  </joint>
  <joint name="j6" type="revolute">
    <parent link="l5"/>
    <child link="ee"/>
    <origin xyz="0 0 0.08"/>
    <axis xyz="0 0 1"/>
  </joint>
  <joint name="gripper_mount" type="fixed">
    <parent link="ee"/>
    <child link="gripper"/>
    <origin xyz="0 0 0.03"/>
  </joint>
  <joint name="finger_left_joint" type="prismatic">
    <parent link="gripper"/>
    <child link="finger_left"/>
    <origin xyz="0 0.01 0.02"/>
    <axis xyz="0 1 0"/>
    <mimic source="gripper_opening" multiplier="0.035" offset="0"/>
  </joint>
  <joint name="finger_right_joint" type="prismatic">
    <parent link="gripper"/>
    <child link="finger_right"/>
    <origin xyz="0 -0.01 0.02"/>
    <axis xyz="0 -1 0"/>
    <mimic source="gripper_opening" multiplier="0.035" offset="0"/>
  </joint>
  <joint name="kp_tip_left_joint" type="fixed">
    <parent link="finger_left"/>
    <child link="kp_tip_left"/>
    <origin xyz="0 0 0.045"/>
  </joint>
  <joint name="kp_tip_right_joint" type="fixed">
    <parent link="finger_right"/>
    <child link="kp_tip_right"/>
    <origin xyz="0 0 0.045"/>
  </joint>
  <joint name="kp_jaw_left_joint" type="fixed">
    <parent link="finger_left"/>
    <child link="kp_jaw_left"/>
    <origin xyz="0 0 0.01"/>
  </joint>
  <joint name="kp_jaw_right_joint" type="fixed">
    <parent link="finger_right"/>
    <child link="kp_jaw_right"/>
    <origin xyz="0 0 0.01"/>
  </joint>
</robot>
"""

ROBOT_XML = {"arm6": ARM6_XML, "planar2": PLANAR2_XML}

_JOINT_LO = np.array([-0.5, 0.3, -1.2, -0.5, 0.3, -0.5])
_JOINT_HI = np.array([0.5, 0.9, -0.6, 0.5, 0.9, 0.5])

_OBJECTS = [
    ("red block", (200, 40, 40)),
    ("blue mug", (50, 80, 200)),
    ("green bottle", (40, 160, 60)),
    ("yellow sponge", (210, 200, 60)),
]
_PLACES = ["on the table", "on the tray", "on the shelf", "in the box"]


def make_camera(width: int = 320, height: int = 240, fx: float = 350.0) -> CameraParams:
    """Camera 1.3 m from the workspace, looking at the arm's working volume."""
    position = np.array([1.3, 0.0, 0.9])
    target = np.array([0.0, 0.0, 0.78])
    forward = target - position
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, np.array([0.0, 0.0, 1.0]))
    right = right / np.linalg.norm(right)
    down = np.cross(forward, right)
    # columns: camera x (right), y (down), z (forward) expressed in base frame
    rot_base_cam = np.stack([right, down, forward], axis=1)
    extr = Se3(position, quat_from_matrix(rot_base_cam)).invert()
    return CameraParams(
        fx=fx, fy=fx, cx=width / 2.0, cy=height / 2.0, width=width, height=height, extrinsics=extr
    )


def _tcp_visible(model: RobotModel, camera: CameraParams, q, margin: float = 30.0) -> bool:
    tcp = forward_kinematics(model, q)["ee"].translation
    try:
        u, v = project_point(camera, tcp)
    except Exception:
        return False
    return margin <= u <= camera.width - margin and margin <= v <= camera.height - margin


def _sample_config(rng: np.random.Generator, model: RobotModel, camera: CameraParams) -> np.ndarray:
    for _ in range(200):
        q = rng.uniform(_JOINT_LO, _JOINT_HI)
        if _tcp_visible(model, camera, q):
            return q
    raise RuntimeError("could not sample a visible arm configuration")


def _disc_mask(width: int, height: int, cx: float, cy: float, radius: float):
    ys, xs = np.ogrid[:height, :width]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= radius**2


def make_episode(
    episode_id: str,
    seed: int = 0,
    num_frames: int = 40,
    static_prefix: int = 3,
    source_setting: str = "TableTop",
    camera: CameraParams | None = None,
) -> Episode:
    """A scripted pick / move / place episode with dense ground-truth annotations.

    The arm interpolates between sampled waypoints; the object sits under the
    gripper at the contact frame and rides along until the place frame, so the
    TCP projection and object centroid coincide at contact by construction.
    """
    rng = np.random.default_rng(seed)
    model = parse_robot_description(ARM6_XML)
    camera = camera or make_camera()

    contact = static_prefix + max(6, num_frames // 4)
    place = min(num_frames - 6, contact + max(8, num_frames // 3))
    q_way = [_sample_config(rng, model, camera) for _ in range(3)]

    def config_at(i: int) -> np.ndarray:
        if i <= static_prefix:
            return q_way[0]
        if i <= contact:
            a = (i - static_prefix) / (contact - static_prefix)
            return (1 - a) * q_way[0] + a * q_way[1]
        if i <= place:
            a = (i - contact) / (place - contact)
            return (1 - a) * q_way[1] + a * q_way[2]
        return q_way[2]

    def opening_at(i: int) -> float:
        if i < contact - 2:
            return 1.0
        if i < contact:
            return 1.0 - 0.4 * (i - (contact - 3))
        if i <= place:
            return 0.2
        return min(1.0, 0.2 + 0.2 * (i - place))

    frames = []
    tcps = []
    for i in range(num_frames):
        q = config_at(i)
        poses = forward_kinematics(model, q, gripper_opening=opening_at(i))
        tcp = poses["ee"]
        tcps.append(tcp.translation)
        frames.append(
            FrameRecord(
                index=i,
                timestamp=round(i / 15.0, 6),
                joint_positions=tuple(round(float(v), 9) for v in q),
                gripper_opening=opening_at(i),
                tcp_pose=tcp,
            )
        )

    trace2d = tuple(project_point(camera, t) for t in tcps)

    obj_name, _ = _OBJECTS[seed % len(_OBJECTS)]
    object_id = "obj0"
    drop = np.array([0.0, 0.0, -0.02])
    obj_pos = []
    for i in range(num_frames):
        if i < contact:
            obj_pos.append(tcps[contact] + drop)
        elif i <= place:
            obj_pos.append(tcps[i] + drop)
        else:
            obj_pos.append(tcps[place] + drop)
    masks = {}
    for i in range(num_frames):
        u, v = project_point(camera, obj_pos[i])
        masks[i] = encode_mask(_disc_mask(camera.width, camera.height, u, v, 8.0))

    src, dst = _PLACES[seed % len(_PLACES)], _PLACES[(seed + 1) % len(_PLACES)]
    clips = (
        Clip(0, contact, "pick", fill_template("pick", obj_name, src), object_id),
        Clip(contact, place, "move_with_object", fill_template("move_with_object", obj_name, src, dst), object_id),
        Clip(place, num_frames - 1, "place", fill_template("place", obj_name, dst), object_id),
    )
    annotations = AnnotationSet(
        global_description=", then ".join(c.description for c in clips),
        clips=clips,
        contact_frames=(ContactAnnotation(contact, object_id),),
        object_masks={object_id: masks},
        trace2d=trace2d,
    )
    return Episode(
        episode_id=episode_id,
        source_setting=source_setting,
        robot_id="arm6",
        camera=camera,
        frames=tuple(frames),
        annotations=annotations,
        video_uri=f"frames/{episode_id}",
    )


def write_frame_images(ep: Episode, episodes_dir: Path) -> None:
    """Render flat synthetic frame PNGs matching the episode's annotations."""
    from PIL import Image, ImageDraw

    from .masks import mask_bbox_centroid

    out_dir = episodes_dir / ep.video_uri
    out_dir.mkdir(parents=True, exist_ok=True)
    obj_color = _OBJECTS[0][1]
    for name, rgb in _OBJECTS:
        if name in ep.annotations.clips[0].description:
            obj_color = rgb
    for i, fr in enumerate(ep.frames):
        img = Image.new("RGB", (ep.camera.width, ep.camera.height), (203, 203, 208))
        draw = ImageDraw.Draw(img)
        per_frame = ep.annotations.object_masks.get("obj0", {})
        if i in per_frame:
            (x1, y1, x2, y2), _ = mask_bbox_centroid(per_frame[i])
            draw.ellipse([x1, y1, x2, y2], fill=obj_color)
        if ep.annotations.trace2d is not None:
            u, v = ep.annotations.trace2d[i]
            draw.line([u - 4, v, u + 4, v], fill=(30, 30, 30))
            draw.line([u, v - 4, u, v + 4], fill=(30, 30, 30))
        img.save(out_dir / f"frame_{i:05d}.png")


def make_corpus(
    root, n_episodes: int = 6, seed: int = 0, write_frames: bool = False
) -> list[Path]:
    """Write a small annotated corpus under `root`: robots/, episodes/, frames.

    Returns the manifest paths, sorted by episode id.
    """
    root = Path(root)
    robots_dir = root / "robots"
    robots_dir.mkdir(parents=True, exist_ok=True)
    for rid, xml in ROBOT_XML.items():
        (robots_dir / f"{rid}.xml").write_text(xml, encoding="utf-8")
    episodes_dir = root / "episodes"
    episodes_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n_episodes):
        ep = make_episode(
            f"ep_{i:04d}",
            seed=seed * 1000 + i,
            num_frames=36 + 2 * (i % 3),
            source_setting="TableTop" if i % 2 == 0 else "InTheWild",
        )
        path = episodes_dir / f"{ep.episode_id}.json"
        save_episode(ep, path)
        if write_frames:
            write_frame_images(ep, episodes_dir)
        paths.append(path)
    return paths


# --- calibration fixtures ---------------------------------------------------------


def make_calibration_scene(true_offset, n_samples: int = 8, noise_px: float = 0.0, seed: int = 0):
    """Synthetic hand-eye scene with annotations generated at a known EE offset.

    Returns (model, camera, samples) where each sample's annotated pixels were
    produced by projecting the keypoints with `true_offset` applied, plus
    optional Gaussian pixel noise.
    """
    from .calibration import CalibrationSample
    from .robots import project_keypoints

    rng = np.random.default_rng(seed)
    model = parse_robot_description(ARM6_XML)
    camera = make_camera()
    true_offset = np.asarray(true_offset, dtype=float)
    samples = []
    attempt = 0
    while len(samples) < n_samples:
        attempt += 1
        if attempt > 120 * n_samples:
            raise RuntimeError("could not build enough fully visible samples")
        q = rng.uniform(_JOINT_LO, _JOINT_HI)
        opening = float(rng.uniform(0.2, 1.0))
        poses = forward_kinematics(model, q, gripper_opening=opening)
        frame = FrameRecord(
            index=len(samples),
            timestamp=len(samples) / 15.0,
            joint_positions=tuple(float(v) for v in q),
            gripper_opening=opening,
            tcp_pose=poses["ee"],
        )
        proj = project_keypoints(model, camera, frame, ee_offset=true_offset)
        if proj.behind or len(proj.pixels) < len(model.keypoints):
            continue
        annotated = {}
        in_bounds = True
        for name, (u, v) in proj.pixels.items():
            if noise_px > 0:
                u += float(rng.normal(0.0, noise_px))
                v += float(rng.normal(0.0, noise_px))
            if not (0 <= u < camera.width and 0 <= v < camera.height):
                in_bounds = False
                break
            annotated[name] = (u, v)
        if not in_bounds:
            continue
        samples.append(
            CalibrationSample(
                episode_id="calib_scene",
                frame=len(samples),
                annotated=annotated,
                frame_record=frame,
            )
        )
    return model, camera, samples


def lagged_episode(ep: Episode, lag: int) -> Episode:
    """Shift the robot-state stream by `lag` frames against the video clock.

    Positive lag delays the trajectory (front records repeated); negative lag
    advances it. Frame indices and timestamps keep the original video grid.
    """
    n = len(ep.frames)
    frames = []
    for k in range(n):
        src = ep.frames[min(max(k - lag, 0), n - 1)]
        frames.append(
            FrameRecord(
                index=k,
                timestamp=ep.frames[k].timestamp,
                joint_positions=src.joint_positions,
                gripper_opening=src.gripper_opening,
                tcp_pose=src.tcp_pose,
            )
        )
    return Episode(
        episode_id=ep.episode_id,
        source_setting=ep.source_setting,
        robot_id=ep.robot_id,
        camera=ep.camera,
        frames=tuple(frames),
        annotations=ep.annotations,
        video_uri=ep.video_uri,
    )
