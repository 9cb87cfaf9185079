"""External evaluators as child processes speaking line-delimited JSON.

One request is in flight at a time. Each request carries the design values
and one operating point; the child answers with a metrics map or an error
object under the same id. Timeouts, crashes, and malformed replies raise
:class:`EvaluationError`, which the environment converts into an explicit
evaluation-error result.
"""
from __future__ import annotations

import json
import queue
import subprocess
import threading
import uuid
from typing import Sequence

from ..space import DesignPoint
from .base import EvaluationError, OperatingPoint

DEFAULT_TIMEOUT_S = 300.0


class SubprocessEvaluator:
    # Real external solvers have meaningful wall time; stand-ins report zero
    # so recorded runs stay byte-identical across machines.
    measures_wall_time = True

    def __init__(self, command: Sequence[str], timeout: float = DEFAULT_TIMEOUT_S):
        if not command:
            raise ValueError("evaluator command must be non-empty")
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        self._command = list(command)
        self._timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._lock = threading.Lock()

    # -- child lifecycle ---------------------------------------------------

    def _start(self) -> None:
        self._lines = queue.Queue()
        self._proc = subprocess.Popen(
            self._command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        thread = threading.Thread(
            target=self._pump, args=(self._proc.stdout, self._lines), daemon=True
        )
        thread.start()

    @staticmethod
    def _pump(stream, out: queue.Queue) -> None:
        for line in stream:
            out.put(line)
        out.put(None)  # EOF marker

    def _ensure_running(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._start()
        assert self._proc is not None
        return self._proc

    def close(self) -> None:
        with self._lock:
            self._close_locked()

    def _close_locked(self) -> None:
        """Terminate the child. Caller must hold (or not need) the lock."""
        proc, self._proc = self._proc, None
        if proc is not None and proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    def _fail(self, message: str) -> None:
        # Called from point_metrics, which already holds the lock.
        self._close_locked()
        raise EvaluationError(message)

    # -- protocol ----------------------------------------------------------

    def point_metrics(self, point: DesignPoint, op: OperatingPoint, index: int) -> dict:
        with self._lock:
            request_id = uuid.uuid4().hex
            request = {
                "id": request_id,
                "params": point.to_json(),
                "operating_point": op.to_json(),
            }
            payload = json.dumps(request) + "\n"
            line = None
            # One silent retry on a fresh child covers the case where the
            # previous request crashed the evaluator between calls.
            for attempt in range(2):
                proc = self._ensure_running()
                try:
                    proc.stdin.write(payload)
                    proc.stdin.flush()
                except (BrokenPipeError, OSError) as exc:
                    self._close_locked()
                    if attempt == 0:
                        continue
                    raise EvaluationError(f"evaluator pipe closed: {exc}")
                try:
                    line = self._lines.get(timeout=self._timeout)
                except queue.Empty:
                    self._fail(f"evaluator timed out after {self._timeout} s")
                if line is not None:
                    break
                code = proc.poll()
                self._close_locked()
                if attempt == 1:
                    raise EvaluationError(
                        f"evaluator exited (code {code}) before replying"
                    )
            try:
                reply = json.loads(line)
            except json.JSONDecodeError as exc:
                self._fail(f"malformed evaluator reply: {exc}")
            if reply.get("id") != request_id:
                self._fail(
                    f"reply id {reply.get('id')!r} does not match request {request_id!r}"
                )
            if "error" in reply:
                raise EvaluationError(f"evaluator error: {reply['error']}")
            metrics = reply.get("metrics")
            if not isinstance(metrics, dict):
                self._fail("evaluator reply lacks a metrics object")
            return metrics
