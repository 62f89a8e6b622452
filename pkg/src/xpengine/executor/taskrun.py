"""Single-task execution under the manifest contract.

The engine invokes ``<impl> --manifest <absolute path>`` with the task's
output directory as working directory. The manifest is canonical JSON with
exactly the keys ``task``, ``params``, ``inputs``, ``deployment``,
``output_dir``; the task must write ``result.json`` with ``outputs`` (paths
relative to the output directory) and ``metrics`` (numbers) and exit 0.
Stdout and stderr are captured to ``log.txt``.

Child resource usage comes from ``os.wait4``: exact CPU time and peak RSS for
that child alone, no sampling races. Where the OS reports nothing, peak
memory stays unknown rather than zero.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..model import TaskSpec
from ..records import CostRecord, TaskResult, TaskStatus

RESULT_NAME = "result.json"
MANIFEST_NAME = "manifest.json"
LOG_NAME = "log.txt"
_POLL_S = 0.005
_KILL_GRACE_S = 2.0

_spawn_lock = threading.Lock()
_spawned = 0


def processes_spawned() -> int:
    """Total task processes started by this interpreter (test observability)."""
    return _spawned


def _count_spawn(stats: dict | None = None) -> None:
    global _spawned
    with _spawn_lock:
        _spawned += 1
        if stats is not None:
            stats["spawned"] = stats.get("spawned", 0) + 1


@dataclass(frozen=True)
class TaskManifest:
    task: str
    params: dict
    inputs: dict[str, str]
    deployment: str | None
    output_dir: str

    def to_obj(self) -> dict:
        return {
            "task": self.task,
            "params": self.params,
            "inputs": self.inputs,
            "deployment": self.deployment,
            "output_dir": self.output_dir,
        }


def _wait_with_rusage(proc: subprocess.Popen, timeout_s: float) -> tuple[int | None, object | None]:
    """Wait for the child, returning (returncode, rusage); None on timeout."""
    deadline = time.monotonic() + timeout_s
    while True:
        pid, status, rusage = os.wait4(proc.pid, os.WNOHANG)
        if pid == proc.pid:
            proc.returncode = os.waitstatus_to_exitcode(status)
            return proc.returncode, rusage
        if time.monotonic() > deadline:
            return None, None
        time.sleep(_POLL_S)


def _terminate(proc: subprocess.Popen) -> object | None:
    proc.terminate()
    deadline = time.monotonic() + _KILL_GRACE_S
    while True:
        pid, status, rusage = os.wait4(proc.pid, os.WNOHANG)
        if pid == proc.pid:
            proc.returncode = os.waitstatus_to_exitcode(status)
            return rusage
        if time.monotonic() > deadline:
            proc.kill()
            pid, status, rusage = os.wait4(proc.pid, 0)
            proc.returncode = os.waitstatus_to_exitcode(status)
            return rusage
        time.sleep(_POLL_S)


def _cost_from_rusage(rusage, wall_s: float) -> CostRecord:
    if rusage is None:
        return CostRecord(wall_s=wall_s, cpu_s=0.0, peak_mem_mb=None)
    return CostRecord(
        wall_s=wall_s,
        cpu_s=rusage.ru_utime + rusage.ru_stime,
        peak_mem_mb=(rusage.ru_maxrss / 1024.0) if rusage.ru_maxrss > 0 else None,
    )


def run_task(task: TaskSpec, manifest: TaskManifest, workdir: str | Path, stats: dict | None = None) -> TaskResult:
    """Execute one automated task as a subprocess and parse its result file.

    Manual tasks never reach this function; the executor routes them to the
    interaction module.
    """
    if task.impl is None:
        raise ValueError(f"task '{task.name}' has no implementation command")
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    manifest_path = workdir / MANIFEST_NAME
    manifest_path.write_text(
        json.dumps(manifest.to_obj(), sort_keys=True, separators=(",", ":"), ensure_ascii=False),
        encoding="utf-8",
    )

    cmd = shlex.split(task.impl) + ["--manifest", str(manifest_path)]
    log_path = workdir / LOG_NAME
    start = time.perf_counter()
    with open(log_path, "ab") as log:
        try:
            proc = subprocess.Popen(cmd, stdout=log, stderr=log, cwd=workdir)
        except OSError as exc:
            return TaskResult(
                task=task.name,
                status=TaskStatus.FAILED,
                cost=CostRecord(wall_s=time.perf_counter() - start),
                error=f"spawn failed: {exc}",
            )
        _count_spawn(stats)
        returncode, rusage = _wait_with_rusage(proc, task.timeout_s)
        if returncode is None:
            rusage = _terminate(proc)
            return TaskResult(
                task=task.name,
                status=TaskStatus.TIMED_OUT,
                cost=_cost_from_rusage(rusage, time.perf_counter() - start),
                error=f"timed out after {task.timeout_s}s",
            )
    cost = _cost_from_rusage(rusage, time.perf_counter() - start)

    if returncode != 0:
        tail = _log_tail(log_path)
        return TaskResult(
            task=task.name,
            status=TaskStatus.FAILED,
            cost=cost,
            error=f"exit code {returncode}" + (f"; log tail: {tail}" if tail else ""),
        )

    result_path = workdir / RESULT_NAME
    try:
        obj = json.loads(result_path.read_text(encoding="utf-8"))
        outputs = obj.get("outputs", {})
        metrics = obj.get("metrics", {})
        if not isinstance(outputs, dict) or not isinstance(metrics, dict):
            raise ValueError("outputs and metrics must be objects")
        metrics = {str(k): float(v) for k, v in metrics.items()}
        outputs = {str(k): str(v) for k, v in outputs.items()}
    except (OSError, ValueError, TypeError) as exc:
        return TaskResult(
            task=task.name,
            status=TaskStatus.FAILED,
            cost=cost,
            error=f"MalformedResult: {exc}",
        )
    return TaskResult(task=task.name, status=TaskStatus.OK, outputs=outputs, metrics=metrics, cost=cost)


def _log_tail(path: Path, limit: int = 400) -> str:
    try:
        text = path.read_text(encoding="utf-8", errors="replace").strip()
    except OSError:
        return ""
    return text[-limit:]
