"""Interaction: involvement decisions, budget accounting, auto-answering."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpengine.errors import StaleResponseError, UnknownConfigError
from xpengine.interaction import (
    AutoAnswer,
    InteractionBudget,
    InteractionPoint,
    Involve,
    Prompt,
    Role,
    Skip,
    SupervisorAction,
    SupervisorResponse,
    UserProfile,
    ValidatorResponse,
    apply_response,
    decide_involvement,
)


def point(role=Role.SUPERVISOR, cost=2.0):
    return InteractionPoint(role=role, cost_min=cost, after_k=1)


def prompt(role=Role.SUPERVISOR, cost=2.0, category="c"):
    return Prompt(id="p1", role=role, category=category, cost_min=cost, payload={})


class TestDecideInvolvement:
    def test_boundary_budget_involves(self):
        budget = InteractionBudget(total_min=10, used_min=8)
        decision = decide_involvement(point(cost=2.0), budget, UserProfile("u"), "c")
        assert isinstance(decision, Involve)

    def test_over_budget_skips(self):
        budget = InteractionBudget(total_min=10, used_min=9)
        decision = decide_involvement(point(cost=2.0), budget, UserProfile("u"), "c")
        assert isinstance(decision, Skip)

    def test_three_consistent_answers_auto(self):
        profile = UserProfile("u", history={"c": ["yes", "yes", "yes"]})
        decision = decide_involvement(
            point(role=Role.VALIDATOR), InteractionBudget(10), profile, "c"
        )
        assert decision == AutoAnswer("yes", 1.0)

    def test_two_answers_not_enough(self):
        profile = UserProfile("u", history={"c": ["yes", "yes"]})
        decision = decide_involvement(
            point(role=Role.VALIDATOR), InteractionBudget(10), profile, "c"
        )
        assert isinstance(decision, Involve)

    def test_low_agreement_involves(self):
        profile = UserProfile("u", history={"c": ["yes", "no", "yes", "no"]})
        decision = decide_involvement(
            point(role=Role.VALIDATOR), InteractionBudget(10), profile, "c"
        )
        assert isinstance(decision, Involve)

    def test_agreement_exactly_point_eight_auto(self):
        profile = UserProfile("u", history={"c": ["yes"] * 4 + ["no"]})
        decision = decide_involvement(
            point(role=Role.VALIDATOR), InteractionBudget(10), profile, "c"
        )
        assert decision == AutoAnswer("yes", 0.8)

    def test_other_category_history_ignored(self):
        profile = UserProfile("u", history={"other": ["yes"] * 5})
        decision = decide_involvement(
            point(role=Role.VALIDATOR), InteractionBudget(10), profile, "c"
        )
        assert isinstance(decision, Involve)

    def test_supervisor_never_auto_answers(self):
        profile = UserProfile("u", history={"c": ["yes"] * 5})
        decision = decide_involvement(point(role=Role.SUPERVISOR), InteractionBudget(10), profile, "c")
        assert isinstance(decision, Involve)

    def test_deterministic_given_profile(self):
        profile = UserProfile("u", history={"c": ["no", "no", "no", "yes"]})
        budget = InteractionBudget(10)
        first = decide_involvement(point(role=Role.VALIDATOR), budget, profile, "c")
        second = decide_involvement(point(role=Role.VALIDATOR), budget, profile, "c")
        assert first == second


class TestApplyResponse:
    def test_involvement_charges_budget(self):
        budget = InteractionBudget(total_min=10, used_min=4)
        updated, delta = apply_response(
            budget,
            UserProfile("u"),
            prompt(),
            SupervisorResponse(SupervisorAction.CONTINUE),
            pending_ordinals=set(),
        )
        assert updated.used_min == 6
        assert not delta.abort and not delta.prune_ordinals

    def test_validator_answer_appends_history(self):
        profile = UserProfile("u")
        budget, _ = apply_response(
            InteractionBudget(10),
            profile,
            prompt(role=Role.VALIDATOR),
            ValidatorResponse(valid=True),
            pending_ordinals=set(),
        )
        assert profile.history == {"c": ["yes"]}
        assert budget.used_min == 2.0

    def test_prune_with_non_pending_target_rejected(self):
        with pytest.raises(UnknownConfigError) as exc:
            apply_response(
                InteractionBudget(10),
                UserProfile("u"),
                prompt(),
                SupervisorResponse(SupervisorAction.PRUNE, (7, 8)),
                pending_ordinals={7},  # 8 is already running
            )
        assert exc.value.targets == [8]

    def test_prune_of_pending_targets(self):
        _, delta = apply_response(
            InteractionBudget(10),
            UserProfile("u"),
            prompt(),
            SupervisorResponse(SupervisorAction.PRUNE, (5, 6)),
            pending_ordinals={5, 6, 7},
        )
        assert delta.prune_ordinals == (5, 6)

    def test_abort(self):
        _, delta = apply_response(
            InteractionBudget(10),
            UserProfile("u"),
            prompt(),
            SupervisorResponse(SupervisorAction.ABORT),
            pending_ordinals=set(),
        )
        assert delta.abort

    def test_stale_prompt_rejected(self):
        with pytest.raises(StaleResponseError):
            apply_response(
                InteractionBudget(10),
                UserProfile("u"),
                prompt(),
                SupervisorResponse(SupervisorAction.CONTINUE),
                pending_ordinals=set(),
                resolved=True,
            )


@settings(max_examples=60, deadline=None)
@given(
    budget=st.floats(0, 40),
    cost=st.floats(0.5, 10),
    prompts=st.integers(0, 30),
)
def test_involvement_count_formula(budget: float, cost: float, prompts: int):
    """With uniform cost c and budget B, involvements = min(#prompts, floor(B/c))."""
    state = InteractionBudget(total_min=budget)
    profile = UserProfile("u")
    involved = 0
    for i in range(prompts):
        decision = decide_involvement(point(cost=cost), state, profile, "c")
        if isinstance(decision, Involve):
            state, _ = apply_response(
                state,
                profile,
                Prompt(id=f"p{i}", role=Role.SUPERVISOR, category="c", cost_min=cost, payload={}),
                SupervisorResponse(SupervisorAction.CONTINUE),
                pending_ordinals=set(),
            )
            involved += 1
    assert involved == min(prompts, math.floor(budget / cost + 1e-9))
    assert state.used_min <= state.total_min + 1e-9
