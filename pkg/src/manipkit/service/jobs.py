"""In-process FIFO job queue feeding the annotation helper clients.

Jobs move strictly forward through Queued -> Running -> Done | Failed.
Timeouts retry in place (the job stays Running) up to max_retries before the
job fails; successful results are handed to the store as pending-review
entries, never written into accepted annotations.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass, field

from ..errors import ClientTimeoutError, EditSchemaError
from .clients import ClientSet
from .state import JOB_KINDS, CurationStore


@dataclass
class Job:
    job_id: str
    kind: str
    episode_id: str
    payload: dict
    status: str = "Queued"
    result: dict | None = None
    error: str | None = None
    retries: int = 0
    pending_id: int | None = None
    done: threading.Event = field(default_factory=threading.Event)

    def to_jsonable(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "episode_id": self.episode_id,
            "status": self.status,
            "result": self.result,
            "error": self.error,
            "retries": self.retries,
            "pending_id": self.pending_id,
        }


class JobQueue:
    def __init__(
        self,
        store: CurationStore,
        clients: ClientSet,
        workers: int = 2,
        max_retries: int = 2,
    ):
        self.store = store
        self.clients = clients
        self.max_retries = max_retries
        self._queue: queue.Queue = queue.Queue()
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._counter = 0
        self._workers = [
            threading.Thread(target=self._worker, daemon=True) for _ in range(workers)
        ]
        for thread in self._workers:
            thread.start()

    def submit(self, kind: str, episode_id: str, payload: dict) -> Job:
        """Queue a job; raises EditSchemaError on bad kind, KeyError on bad id."""
        if kind not in JOB_KINDS:
            raise EditSchemaError(f"unknown job kind {kind!r}")
        if not isinstance(payload, dict):
            raise EditSchemaError("job payload must be an object")
        episode = self.store.state(episode_id).episode
        if kind == "Segment":
            payload = {
                **payload,
                "width": episode.camera.width,
                "height": episode.camera.height,
            }
        with self._lock:
            self._counter += 1
            job = Job(
                job_id=f"job_{self._counter:06d}",
                kind=kind,
                episode_id=episode_id,
                payload=payload,
            )
            self._jobs[job.job_id] = job
        self._queue.put(job)
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self._jobs:
                raise KeyError(job_id)
            return self._jobs[job_id]

    def counts(self) -> dict:
        with self._lock:
            out = {"Queued": 0, "Running": 0, "Done": 0, "Failed": 0}
            for job in self._jobs.values():
                out[job.status] += 1
            return out

    def wait(self, job_id: str, timeout: float = 10.0) -> Job:
        job = self.get(job_id)
        job.done.wait(timeout)
        return job

    def stop(self) -> None:
        for _ in self._workers:
            self._queue.put(None)
        for thread in self._workers:
            thread.join(timeout=5.0)

    def _worker(self) -> None:
        while True:
            job = self._queue.get()
            if job is None:
                return
            job.status = "Running"
            client = self.clients.for_kind(job.kind)
            while True:
                try:
                    result = client(job.payload)
                except ClientTimeoutError as e:
                    job.retries += 1
                    if job.retries > self.max_retries:
                        job.status = "Failed"
                        job.error = str(e)
                        break
                    continue
                except Exception as e:  # noqa: BLE001 - a bad job must not kill the worker
                    job.status = "Failed"
                    job.error = f"{type(e).__name__}: {e}"
                    break
                job.result = result
                job.pending_id = self.store.add_pending(
                    job.episode_id, job.kind, result, job.job_id
                )
                job.status = "Done"
                break
            job.done.set()
