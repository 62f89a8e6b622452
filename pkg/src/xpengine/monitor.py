"""Production monitoring and re-execution triggers."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .model import Direction


class TriggerReason(str, Enum):
    DRIFT = "drift"
    NEW_DATA = "new_data"


@dataclass(frozen=True)
class MonitorSpec:
    metric: str
    threshold: float
    window: int = 20
    min_new: int = 1


@dataclass(frozen=True)
class TriggerDecision:
    fired: bool
    reason: TriggerReason | None = None

    def __bool__(self) -> bool:
        return self.fired


NO_TRIGGER = TriggerDecision(False)


def evaluate_retraining_trigger(
    monitor: MonitorSpec,
    stream: Sequence[float],
    new_data_count: int,
    direction: Direction = Direction.MAXIMIZE,
) -> TriggerDecision:
    """Decide whether deployed-model evidence warrants re-running the experiment.

    Drift fires when the mean of the last ``window`` production values falls on
    the wrong side of the threshold (below it for a maximized metric, above it
    for a minimized one); drift needs a full window of evidence. Enough new
    data fires regardless of metric health.
    """
    if len(stream) >= monitor.window:
        tail = stream[-monitor.window :]
        mean = sum(tail) / len(tail)
        drifted = mean < monitor.threshold if direction is not Direction.MINIMIZE else mean > monitor.threshold
        if drifted:
            return TriggerDecision(True, TriggerReason.DRIFT)
    if new_data_count >= monitor.min_new:
        return TriggerDecision(True, TriggerReason.NEW_DATA)
    return NO_TRIGGER
