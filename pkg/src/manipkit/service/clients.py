"""Annotation helper clients: deterministic local stubs and remote HTTP twins.

Every client is a callable taking a request payload dict and returning a
result payload dict. The job runner enriches requests with episode facts
(image width/height) before calling, so remote services see self-contained
payloads with the exact same schema the stubs consume.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from ..errors import ClientTimeoutError, EditSchemaError
from ..masks import encode_mask

DEFAULT_SEGMENT_RADIUS = 10.0
PLAN_STEPS = (
    "pick up the target object for: {task}",
    "transfer the target object to where it is needed",
    "place the target object at the goal position",
)


def stub_segment(payload: dict) -> dict:
    """Disc mask of the given radius around the first prompt point.

    Request: {frame, points: [[u, v], ...], object_id, width, height,
    radius?}. The disc is clipped to the image, so the centroid matches the
    prompt point whenever the disc fits inside the frame.
    """
    points = payload.get("points") or []
    if not points:
        raise EditSchemaError("segment request needs at least one prompt point")
    u0, v0 = (float(points[0][0]), float(points[0][1]))
    width, height = int(payload["width"]), int(payload["height"])
    radius = float(payload.get("radius", DEFAULT_SEGMENT_RADIUS))
    ys, xs = np.mgrid[0:height, 0:width]
    grid = (xs - u0) ** 2 + (ys - v0) ** 2 <= radius**2
    if not grid.any():
        grid[min(max(int(round(v0)), 0), height - 1), min(max(int(round(u0)), 0), width - 1)] = True
    rle = encode_mask(grid)
    return {
        "frame": int(payload["frame"]),
        "object_id": str(payload.get("object_id", "obj_new")),
        "rle": {"width": rle.width, "height": rle.height, "counts": list(rle.counts)},
    }


def stub_pre_annotate(payload: dict) -> dict:
    """Fixed three-step plan in the fenced-JSON list format reviewers expect.

    Request: {task, frame}. The text block is a ```json fence around a JSON
    list of step strings; "steps" repeats the parsed list for convenience.
    """
    task = str(payload.get("task", "")).strip()
    if not task:
        raise EditSchemaError("pre-annotate request needs a task text")
    steps = [template.format(task=task) for template in PLAN_STEPS]
    text = "```json\n" + json.dumps(steps, indent=2) + "\n```"
    return {"text": text, "steps": steps}


def parse_plan_text(text: str) -> list[str]:
    """Strip the ```json fences and parse the enclosed list of step strings."""
    body = text.strip()
    if body.startswith("```json"):
        body = body[len("```json") :]
    if body.endswith("```"):
        body = body[: -len("```")]
    steps = json.loads(body)
    if not isinstance(steps, list) or not all(isinstance(s, str) for s in steps):
        raise EditSchemaError("plan text must contain a JSON list of strings")
    return steps


def stub_video_onset(payload: dict) -> dict:
    """Index of the first signal sample exceeding the threshold, else None.

    Request: {signal: [float, ...], threshold}.
    """
    signal = payload.get("signal")
    if not signal:
        raise EditSchemaError("video-onset request needs a non-empty signal")
    threshold = float(payload.get("threshold", 0.0))
    for k, value in enumerate(signal):
        if float(value) > threshold:
            return {"frame": k}
    return {"frame": None}


def _remote(url: str, timeout: float):
    import httpx

    def call(payload: dict) -> dict:
        try:
            response = httpx.post(url, json=payload, timeout=timeout)
        except httpx.TimeoutException as e:
            raise ClientTimeoutError(f"{url} timed out after {timeout}s") from e
        response.raise_for_status()
        return response.json()

    return call


@dataclass(frozen=True)
class ClientSet:
    """The three pluggable annotation helpers, keyed by job kind."""

    segment: object
    pre_annotate: object
    video_onset: object

    def for_kind(self, kind: str):
        return {
            "Segment": self.segment,
            "PreAnnotate": self.pre_annotate,
            "VideoOnset": self.video_onset,
        }[kind]


def stub_clients() -> ClientSet:
    return ClientSet(
        segment=stub_segment,
        pre_annotate=stub_pre_annotate,
        video_onset=stub_video_onset,
    )


def clients_from_env(timeout: float = 10.0) -> ClientSet:
    """Stubs, individually replaced by remote endpoints when env vars are set.

    MANIPKIT_SEGMENT_URL, MANIPKIT_PREANNOTATE_URL, MANIPKIT_VIDEO_ONSET_URL.
    """
    base = stub_clients()
    segment_url = os.environ.get("MANIPKIT_SEGMENT_URL")
    pre_url = os.environ.get("MANIPKIT_PREANNOTATE_URL")
    onset_url = os.environ.get("MANIPKIT_VIDEO_ONSET_URL")
    return ClientSet(
        segment=_remote(segment_url, timeout) if segment_url else base.segment,
        pre_annotate=_remote(pre_url, timeout) if pre_url else base.pre_annotate,
        video_onset=_remote(onset_url, timeout) if onset_url else base.video_onset,
    )
