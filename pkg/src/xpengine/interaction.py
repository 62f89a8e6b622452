"""Human-in-the-loop protocol: prompts, budgets, profiles, auto-answering.

Interaction is metered in minutes of attention. Involving the user consumes
budget; skipping is free. Once a user has answered the same kind of validation
question consistently often enough, the engine answers on their behalf and
spends nothing.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

from .errors import StaleResponseError, UnknownConfigError

AUTO_ANSWER_MIN_SAMPLES = 3
AUTO_ANSWER_MIN_AGREEMENT = 0.8
DEFAULT_MANUAL_COST_MIN = 1.0


class Role(str, Enum):
    SUPERVISOR = "supervisor"
    VALIDATOR = "validator"


class SupervisorAction(str, Enum):
    CONTINUE = "continue"
    ABORT = "abort"
    PRUNE = "prune"
    PRIORITIZE = "prioritize"


@dataclass(frozen=True)
class InteractionPoint:
    """A place where the engine may hand control to a person.

    ``after_k`` triggers a supervisor checkpoint after every k completed
    configurations; ``manual_task`` triggers when the named manual task runs.
    Exactly one of the two is set.
    """

    role: Role
    cost_min: float
    after_k: int | None = None
    manual_task: str | None = None


@dataclass(frozen=True)
class InteractionBudget:
    total_min: float
    used_min: float = 0.0

    @property
    def remaining_min(self) -> float:
        return self.total_min - self.used_min

    def can_afford(self, cost_min: float) -> bool:
        return self.used_min + cost_min <= self.total_min

    def charge(self, cost_min: float) -> "InteractionBudget":
        return replace(self, used_min=self.used_min + cost_min)


@dataclass(frozen=True)
class InteractionPlan:
    checkpoints: tuple[InteractionPoint, ...] = ()
    budget_total_min: float = 0.0


@dataclass
class UserProfile:
    """Per-user traits and append-only answer history by question category."""

    user: str
    traits: dict[str, str] = field(default_factory=dict)
    history: dict[str, list[str]] = field(default_factory=dict)

    def record_answer(self, category: str, answer: str) -> None:
        self.history.setdefault(category, []).append(answer)

    def to_obj(self) -> dict:
        return {"user": self.user, "traits": self.traits, "history": self.history}

    @classmethod
    def from_obj(cls, obj: dict) -> "UserProfile":
        return cls(
            user=obj["user"],
            traits=dict(obj.get("traits", {})),
            history={k: list(v) for k, v in obj.get("history", {}).items()},
        )


@dataclass(frozen=True)
class Prompt:
    id: str
    role: Role
    category: str
    cost_min: float
    payload: dict


@dataclass(frozen=True)
class SupervisorResponse:
    action: SupervisorAction
    ordinals: tuple[int, ...] = ()


@dataclass(frozen=True)
class ValidatorResponse:
    valid: bool
    note: str = ""


Response = Union[SupervisorResponse, ValidatorResponse]


@dataclass(frozen=True)
class Involve:
    pass


@dataclass(frozen=True)
class AutoAnswer:
    answer: str
    confidence: float


@dataclass(frozen=True)
class Skip:
    pass


Decision = Union[Involve, AutoAnswer, Skip]


def decide_involvement(
    point: InteractionPoint,
    budget: InteractionBudget,
    profile: UserProfile,
    category: str,
) -> Decision:
    """Decide whether to prompt the user, answer for them, or skip.

    Validator questions with at least ``AUTO_ANSWER_MIN_SAMPLES`` recorded
    answers in the same category and a clear majority (agreement at or above
    ``AUTO_ANSWER_MIN_AGREEMENT``) are answered automatically at no cost.
    Otherwise the user is involved when the budget still covers the point's
    cost, and skipped when it does not. Skips consume nothing.
    """
    if point.role is Role.VALIDATOR:
        answers = profile.history.get(category, [])
        if len(answers) >= AUTO_ANSWER_MIN_SAMPLES:
            counts = Counter(answers).most_common()
            top, top_count = counts[0]
            tied = len(counts) > 1 and counts[1][1] == top_count
            agreement = top_count / len(answers)
            if not tied and agreement >= AUTO_ANSWER_MIN_AGREEMENT:
                return AutoAnswer(answer=top, confidence=agreement)
    if budget.can_afford(point.cost_min):
        return Involve()
    return Skip()


@dataclass(frozen=True)
class ScheduleDelta:
    """Effect of a supervisor response on the pending schedule."""

    abort: bool = False
    prune_ordinals: tuple[int, ...] = ()
    prioritize_ordinals: tuple[int, ...] = ()


def apply_response(
    budget: InteractionBudget,
    profile: UserProfile,
    prompt: Prompt,
    response: Response,
    pending_ordinals: set[int],
    resolved: bool = False,
) -> tuple[InteractionBudget, ScheduleDelta]:
    """Account for a real user response and derive its schedule effect.

    The budget is charged only here: auto-answers and skips never pass
    through. Validator answers are appended to the profile history so future
    questions in the same category can be auto-answered.
    """
    if resolved:
        raise StaleResponseError(prompt.id)
    if isinstance(response, ValidatorResponse):
        if prompt.role is not Role.VALIDATOR:
            raise ValueError("validator response to a non-validator prompt")
        profile.record_answer(prompt.category, "yes" if response.valid else "no")
        return budget.charge(prompt.cost_min), ScheduleDelta()

    if prompt.role is not Role.SUPERVISOR:
        raise ValueError("supervisor response to a non-supervisor prompt")
    if response.action in (SupervisorAction.PRUNE, SupervisorAction.PRIORITIZE):
        unknown = [o for o in response.ordinals if o not in pending_ordinals]
        if unknown:
            raise UnknownConfigError(unknown)
    charged = budget.charge(prompt.cost_min)
    if response.action is SupervisorAction.ABORT:
        return charged, ScheduleDelta(abort=True)
    if response.action is SupervisorAction.PRUNE:
        return charged, ScheduleDelta(prune_ordinals=response.ordinals)
    if response.action is SupervisorAction.PRIORITIZE:
        return charged, ScheduleDelta(prioritize_ordinals=response.ordinals)
    return charged, ScheduleDelta()
