"""Background jobs for long manipulations: submit, poll, collect."""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable

from ..errors import StageFailure


class JobQueue:
    """Single-worker queue: request threads stay free, compute is serialized."""

    def __init__(self, workers: int = 1):
        self._executor = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, dict] = {}
        self._lock = threading.Lock()

    def submit(self, fn: Callable[[], Any]) -> str:
        job_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._jobs[job_id] = {"status": "queued"}

        def run():
            with self._lock:
                self._jobs[job_id]["status"] = "running"
            try:
                result = fn()
            except StageFailure as exc:
                with self._lock:
                    self._jobs[job_id] = {"status": "error", "stage": exc.stage,
                                          "error": str(exc)}
            except Exception as exc:
                with self._lock:
                    self._jobs[job_id] = {"status": "error", "error": str(exc)}
            else:
                with self._lock:
                    self._jobs[job_id] = {"status": "done", "result": result}

        self._executor.submit(run)
        return job_id

    def status(self, job_id: str) -> dict:
        with self._lock:
            if job_id not in self._jobs:
                raise KeyError(job_id)
            return dict(self._jobs[job_id])

    def shutdown(self) -> None:
        self._executor.shutdown(wait=True)
