"""Review-state store: current episodes, revisions, edit log, pending results.

Base manifests under `data_root/episodes` are never rewritten. Every accepted
edit is appended to `data_root/edits/{episode_id}.jsonl`, and replaying that
log over the base manifest reproduces the current manifest exactly; startup
does that replay. Periodic snapshots under `data_root/snapshots` are a
convenience cache, never the source of truth. Pending-review entries produced
by jobs live in memory only until a reviewer accepts or rejects them.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..episode import (
    Clip,
    ContactAnnotation,
    Episode,
    canonical_json,
    episode_to_jsonable,
    load_episode,
    validate_episode,
)
from ..errors import EditSchemaError, InvariantError, IoError, StaleRevisionError
from ..masks import RleMask

EDIT_KINDS = (
    "SetContactFrame",
    "AddClip",
    "EditClipText",
    "DeleteClip",
    "AcceptMask",
    "RejectMask",
    "SetGlobalDescription",
    "BindObjectToClip",
)
JOB_KINDS = ("Segment", "PreAnnotate", "VideoOnset")
HARD_SAMPLE_REJECTS = 3


@dataclass
class EpisodeState:
    episode: Episode
    revision: int = 0
    reject_streak: int = 0
    hard_sample: bool = False
    pending: list = field(default_factory=list)
    next_pending: int = 1
    lock: threading.Lock = field(default_factory=threading.Lock)


def _need(payload: dict, key: str, kind):
    if key not in payload:
        raise EditSchemaError(f"payload misses {key!r}")
    value = payload[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise EditSchemaError(f"payload field {key!r} must be {kind.__name__}")
    return value


def _rle_from_payload(obj) -> RleMask:
    if not isinstance(obj, dict):
        raise EditSchemaError("rle must be an object with width/height/counts")
    try:
        return RleMask(
            width=int(obj["width"]),
            height=int(obj["height"]),
            counts=tuple(int(c) for c in obj["counts"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise EditSchemaError(f"malformed rle payload: {e}") from e


def _clip_at(ep: Episode, index) -> int:
    if not isinstance(index, int) or isinstance(index, bool):
        raise EditSchemaError("clip_index must be an integer")
    if not 0 <= index < len(ep.annotations.clips):
        raise InvariantError(
            f"clip_index {index} out of range for {len(ep.annotations.clips)} clips"
        )
    return index


def _with_clips(ep: Episode, clips) -> Episode:
    return replace(ep, annotations=replace(ep.annotations, clips=tuple(clips)))


def apply_edit_to_episode(ep: Episode, kind: str, payload: dict) -> Episode:
    """Pure edit application; returns the edited episode, validated.

    Raises:
        EditSchemaError: malformed payload or unknown kind.
        InvariantError: edit references a missing entity or breaks invariants.
    """
    if kind == "SetContactFrame":
        frame = _need(payload, "frame", int)
        object_id = _need(payload, "object_id", str)
        contacts = tuple(
            sorted(
                [c for c in ep.annotations.contact_frames if c.object_id != object_id]
                + [ContactAnnotation(frame=frame, object_id=object_id)],
                key=lambda c: (c.frame, c.object_id),
            )
        )
        new_ep = replace(ep, annotations=replace(ep.annotations, contact_frames=contacts))
    elif kind == "AddClip":
        clip = Clip(
            start_frame=_need(payload, "start_frame", int),
            end_frame=_need(payload, "end_frame", int),
            skill=_need(payload, "skill", str),
            description=_need(payload, "description", str),
            object_id=payload.get("object_id"),
        )
        clips = sorted(ep.annotations.clips + (clip,), key=lambda c: c.start_frame)
        new_ep = _with_clips(ep, clips)
    elif kind == "EditClipText":
        index = _clip_at(ep, payload.get("clip_index"))
        text = _need(payload, "description", str)
        clips = list(ep.annotations.clips)
        clips[index] = replace(clips[index], description=text)
        new_ep = _with_clips(ep, clips)
    elif kind == "DeleteClip":
        index = _clip_at(ep, payload.get("clip_index"))
        clips = list(ep.annotations.clips)
        del clips[index]
        new_ep = _with_clips(ep, clips)
    elif kind == "AcceptMask":
        object_id = _need(payload, "object_id", str)
        frame = _need(payload, "frame", int)
        mask = _rle_from_payload(payload.get("rle"))
        masks = {oid: dict(per) for oid, per in ep.annotations.object_masks.items()}
        masks.setdefault(object_id, {})[frame] = mask
        new_ep = replace(ep, annotations=replace(ep.annotations, object_masks=masks))
    elif kind == "RejectMask":
        if "pending_id" in payload:
            return ep  # pending entries live outside the manifest
        object_id = _need(payload, "object_id", str)
        frame = _need(payload, "frame", int)
        masks = {oid: dict(per) for oid, per in ep.annotations.object_masks.items()}
        if object_id not in masks or frame not in masks[object_id]:
            raise InvariantError(f"no mask for {object_id!r} at frame {frame}")
        del masks[object_id][frame]
        if not masks[object_id]:
            del masks[object_id]
        new_ep = replace(ep, annotations=replace(ep.annotations, object_masks=masks))
    elif kind == "SetGlobalDescription":
        text = _need(payload, "text", str)
        new_ep = replace(ep, annotations=replace(ep.annotations, global_description=text))
    elif kind == "BindObjectToClip":
        index = _clip_at(ep, payload.get("clip_index"))
        object_id = _need(payload, "object_id", str)
        if object_id not in ep.annotations.object_masks:
            raise InvariantError(f"object {object_id!r} has no masks to bind")
        clips = list(ep.annotations.clips)
        clips[index] = replace(clips[index], object_id=object_id)
        new_ep = _with_clips(ep, clips)
    else:
        raise EditSchemaError(f"unknown edit kind {kind!r}")
    return validate_episode(new_ep)


class CurationStore:
    """All mutable review state behind per-episode locks."""

    def __init__(self, data_root, eval_ids=(), snapshot_every: int = 20):
        self.data_root = Path(data_root)
        self.eval_ids = frozenset(eval_ids)
        self.snapshot_every = snapshot_every
        self._states: dict[str, EpisodeState] = {}
        episodes_dir = self.data_root / "episodes"
        if not episodes_dir.is_dir():
            raise IoError(f"no episodes directory at {episodes_dir}")
        for path in sorted(episodes_dir.glob("*.json")):
            episode = load_episode(path)
            state = EpisodeState(episode=episode)
            self._states[episode.episode_id] = state
            for record in self._read_log(episode.episode_id):
                self._commit(state, record)

    # --- plumbing -------------------------------------------------------------

    def _log_path(self, episode_id: str) -> Path:
        return self.data_root / "edits" / f"{episode_id}.jsonl"

    def _read_log(self, episode_id: str) -> list[dict]:
        path = self._log_path(episode_id)
        if not path.is_file():
            return []
        records = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(json.loads(line))
        return records

    def episode_ids(self) -> list[str]:
        return sorted(self._states)

    def state(self, episode_id: str) -> EpisodeState:
        if episode_id not in self._states:
            raise KeyError(episode_id)
        return self._states[episode_id]

    def split_of(self, episode_id: str) -> str:
        return "Eval" if episode_id in self.eval_ids else "Train"

    def status_of(self, state: EpisodeState) -> str:
        return "in_review" if state.revision > 0 else "unreviewed"

    def summary(self, episode_id: str) -> dict:
        state = self.state(episode_id)
        ep = state.episode
        return {
            "episode_id": episode_id,
            "split": self.split_of(episode_id),
            "status": self.status_of(state),
            "revision": state.revision,
            "num_frames": ep.num_frames,
            "num_clips": len(ep.annotations.clips),
            "pending_review": len(state.pending),
            "hard_sample": state.hard_sample,
            "global_description": ep.annotations.global_description,
        }

    def manifest_doc(self, episode_id: str) -> dict:
        return episode_to_jsonable(self.state(episode_id).episode)

    def manifest_bytes(self, episode_id: str) -> bytes:
        return canonical_json(self.manifest_doc(episode_id)).encode("utf-8")

    def progress(self) -> dict:
        states = self._states.values()
        return {
            "episodes": len(self._states),
            "unreviewed": sum(1 for s in states if s.revision == 0),
            "in_review": sum(1 for s in states if s.revision > 0),
            "hard_samples": sum(1 for s in states if s.hard_sample),
            "pending_review": sum(len(s.pending) for s in states),
            "edits": sum(s.revision for s in states),
        }

    # --- edits ----------------------------------------------------------------

    def apply_edit(
        self, episode_id: str, kind: str, payload: dict, editor_id: str, revision: int
    ) -> int:
        """Apply one edit optimistically; returns the new revision.

        Raises:
            KeyError: unknown episode.
            EditSchemaError: unknown kind or malformed payload.
            StaleRevisionError: base revision no longer current.
            InvariantError: the edit would leave the episode invalid.
        """
        if kind not in EDIT_KINDS:
            raise EditSchemaError(f"unknown edit kind {kind!r}")
        state = self.state(episode_id)
        with state.lock:
            if revision != state.revision:
                raise StaleRevisionError(
                    f"edit based on revision {revision}, current is {state.revision}"
                )
            record = {
                "revision": state.revision + 1,
                "kind": kind,
                "payload": self._enrich(state, kind, payload),
                "editor_id": editor_id,
            }
            # dry run before touching the log or the state
            apply_edit_to_episode(state.episode, kind, record["payload"])
            log_path = self._log_path(episode_id)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._commit(state, record)
            if self.snapshot_every and state.revision % self.snapshot_every == 0:
                snap = self.data_root / "snapshots" / f"{episode_id}.json"
                snap.parent.mkdir(parents=True, exist_ok=True)
                snap.write_bytes(self.manifest_bytes(episode_id))
            return state.revision

    def _enrich(self, state: EpisodeState, kind: str, payload: dict) -> dict:
        """Resolve pending references so the logged payload is self-contained."""
        if kind in ("AcceptMask", "RejectMask") and "pending_id" in payload:
            entry = next(
                (p for p in state.pending if p["pending_id"] == payload["pending_id"]),
                None,
            )
            if entry is None:
                raise InvariantError(f"no pending entry {payload['pending_id']}")
            if kind == "AcceptMask":
                if entry["kind"] != "Segment":
                    raise InvariantError("pending entry is not a mask")
                result = entry["result"]
                return {
                    "pending_id": payload["pending_id"],
                    "object_id": result["object_id"],
                    "frame": result["frame"],
                    "rle": result["rle"],
                }
        return dict(payload)

    def _commit(self, state: EpisodeState, record: dict) -> None:
        """Apply one enriched log record to the state; used by edits and replay."""
        kind = record["kind"]
        payload = record["payload"]
        state.episode = apply_edit_to_episode(state.episode, kind, payload)
        state.revision = record["revision"]
        if kind == "AcceptMask":
            state.reject_streak = 0
        elif kind == "RejectMask":
            state.reject_streak += 1
            if state.reject_streak >= HARD_SAMPLE_REJECTS:
                state.hard_sample = True
        if "pending_id" in payload:
            state.pending = [
                p for p in state.pending if p["pending_id"] != payload["pending_id"]
            ]

    # --- job results ------------------------------------------------------------

    def add_pending(self, episode_id: str, kind: str, result: dict, job_id: str) -> int:
        """Record a job result for review; never touches the manifest."""
        state = self.state(episode_id)
        with state.lock:
            pending_id = state.next_pending
            state.next_pending += 1
            state.pending.append(
                {
                    "pending_id": pending_id,
                    "kind": kind,
                    "result": result,
                    "job_id": job_id,
                }
            )
            return pending_id
