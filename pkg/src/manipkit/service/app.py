"""FastAPI application exposing the curation review workflow over HTTP.

Error mapping: 400 malformed body, 404 unknown resource, 409 stale revision,
422 edit that would violate episode invariants. See docs/service-api.md for
the full schema reference.
"""

from __future__ import annotations

import io
import json
import os
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from ..errors import (
    EditSchemaError,
    InvariantError,
    IoError,
    ManipkitError,
    StaleRevisionError,
)
from ..fcot import (
    AFFORDANCE_BOX,
    GRIPPER_BOX,
    OBJECT_BOX,
    TRACE,
    VISUAL_PROMPT,
    FcotSpec,
    serialize_fcot,
)
from ..vqa.overlay import OverlaySpec, render_overlay
from .clients import clients_from_env
from .jobs import JobQueue
from .state import CurationStore

LAYER_REPRESENTATIONS = {
    "object": OBJECT_BOX,
    "gripper": GRIPPER_BOX,
    "affordance": AFFORDANCE_BOX,
    "trace": TRACE,
}
BACKGROUND = (203, 203, 208)


def _detail(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": message})


def _frame_png(store: CurationStore, episode, frame: int) -> bytes:
    from PIL import Image

    path = store.data_root / "episodes" / episode.video_uri / f"frame_{frame:05d}.png"
    if path.is_file():
        return path.read_bytes()
    img = Image.new("RGB", (episode.camera.width, episode.camera.height), BACKGROUND)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def create_app(
    data_root=None,
    clients=None,
    eval_ids=None,
    workers: int = 2,
    snapshot_every: int = 20,
) -> FastAPI:
    """Build the service around a corpus root.

    The root comes from the argument or MANIPKIT_DATA_ROOT; eval episode ids
    from the argument or an optional eval_ids.json list beside episodes/.
    """
    root = data_root or os.environ.get("MANIPKIT_DATA_ROOT")
    if not root:
        raise IoError("no data root: pass data_root or set MANIPKIT_DATA_ROOT")
    root = Path(root)
    if eval_ids is None:
        ids_path = root / "eval_ids.json"
        eval_ids = json.loads(ids_path.read_text(encoding="utf-8")) if ids_path.is_file() else ()
    store = CurationStore(root, eval_ids=eval_ids, snapshot_every=snapshot_every)
    jobs = JobQueue(store, clients or clients_from_env(), workers=workers)

    app = FastAPI(title="manipkit curation service")
    app.state.store = store
    app.state.jobs = jobs

    @app.get("/episodes")
    def list_episodes(
        split: str = Query(default=""),
        status: str = Query(default=""),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=50, ge=1, le=500),
    ):
        summaries = [store.summary(eid) for eid in store.episode_ids()]
        if split:
            summaries = [s for s in summaries if s["split"] == split]
        if status:
            summaries = [s for s in summaries if s["status"] == status]
        start = (page - 1) * page_size
        return {
            "episodes": summaries[start : start + page_size],
            "total": len(summaries),
            "page": page,
            "page_size": page_size,
        }

    @app.get("/episodes/{episode_id}")
    def get_episode(episode_id: str):
        try:
            state = store.state(episode_id)
        except KeyError:
            return _detail(404, f"unknown episode {episode_id!r}")
        return {
            "episode_id": episode_id,
            "revision": state.revision,
            "split": store.split_of(episode_id),
            "status": store.status_of(state),
            "hard_sample": state.hard_sample,
            "reject_streak": state.reject_streak,
            "pending": state.pending,
            "manifest": store.manifest_doc(episode_id),
        }

    @app.get("/episodes/{episode_id}/frames/{frame}")
    def get_frame(episode_id: str, frame: int):
        try:
            episode = store.state(episode_id).episode
        except KeyError:
            return _detail(404, f"unknown episode {episode_id!r}")
        if not 0 <= frame < episode.num_frames:
            return _detail(404, f"frame {frame} out of range")
        return Response(content=_frame_png(store, episode, frame), media_type="image/png")

    @app.get("/episodes/{episode_id}/overlay/{frame}")
    def get_overlay(episode_id: str, frame: int, layers: str = Query(default="")):
        from PIL import Image

        try:
            episode = store.state(episode_id).episode
        except KeyError:
            return _detail(404, f"unknown episode {episode_id!r}")
        if not 0 <= frame < episode.num_frames:
            return _detail(404, f"frame {frame} out of range")
        names = [n.strip() for n in layers.split(",") if n.strip()] or list(
            LAYER_REPRESENTATIONS
        )
        unknown = [n for n in names if n not in LAYER_REPRESENTATIONS]
        if unknown:
            return _detail(400, f"unknown layers {unknown}")
        img = Image.open(io.BytesIO(_frame_png(store, episode, frame)))
        primitives = []
        for name in names:
            spec = FcotSpec(selection=(LAYER_REPRESENTATIONS[name],), form=VISUAL_PROMPT)
            try:
                primitives.extend(serialize_fcot(episode, frame, spec).primitives)
            except ManipkitError:
                continue  # layer not available at this frame
        rendered = render_overlay(
            img,
            OverlaySpec(
                width=episode.camera.width,
                height=episode.camera.height,
                primitives=tuple(primitives),
            ),
        )
        buf = io.BytesIO()
        rendered.save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/episodes/{episode_id}/edits")
    async def post_edit(episode_id: str, request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _detail(400, "body is not valid JSON")
        if not isinstance(body, dict):
            return _detail(400, "body must be a JSON object")
        kind = body.get("kind")
        payload = body.get("payload")
        revision = body.get("revision")
        if not isinstance(kind, str) or not isinstance(payload, dict):
            return _detail(400, "body needs string 'kind' and object 'payload'")
        if not isinstance(revision, int) or isinstance(revision, bool):
            return _detail(400, "body needs integer 'revision'")
        editor_id = str(body.get("editor_id", "anonymous"))
        try:
            new_revision = store.apply_edit(episode_id, kind, payload, editor_id, revision)
        except KeyError:
            return _detail(404, f"unknown episode {episode_id!r}")
        except EditSchemaError as e:
            return _detail(400, str(e))
        except StaleRevisionError as e:
            return _detail(409, str(e))
        except InvariantError as e:
            return _detail(422, str(e))
        return {"episode_id": episode_id, "revision": new_revision}

    @app.post("/episodes/{episode_id}/jobs", status_code=202)
    async def post_job(episode_id: str, request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _detail(400, "body is not valid JSON")
        if not isinstance(body, dict) or not isinstance(body.get("kind"), str):
            return _detail(400, "body needs string 'kind' and optional object 'payload'")
        payload = body.get("payload", {})
        try:
            job = jobs.submit(body["kind"], episode_id, payload)
        except KeyError:
            return _detail(404, f"unknown episode {episode_id!r}")
        except EditSchemaError as e:
            return _detail(400, str(e))
        return {"job_id": job.job_id, "status": job.status}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            job = jobs.get(job_id)
        except KeyError:
            return _detail(404, f"unknown job {job_id!r}")
        return job.to_jsonable()

    @app.get("/progress")
    def get_progress():
        return {**store.progress(), "jobs": jobs.counts()}

    return app
