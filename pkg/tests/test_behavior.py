import pytest
from hypothesis import given, strategies as st

from sleepcoach.behavior import (
    SELECTION_CAP,
    TechniqueDomain,
    TechniqueSelection,
    select_techniques,
    technique_guidance,
)
from sleepcoach.errors import PortFailure


def test_exactly_seven_domains():
    assert len(TechniqueDomain) == 7


@pytest.mark.parametrize("domain,fragment,field", [
    (TechniqueDomain.GOALS, "Setting clear, achievable sleep-related objectives", "definition"),
    (TechniqueDomain.EMOTIONAL_SUPPORT, "changing sleep habits can be challenging", "example"),
    (TechniqueDomain.KNOWLEDGE, "tailored information about sleep health", "definition"),
    (TechniqueDomain.CONSEQUENCES_AND_REINFORCEMENT, "anticipated outcomes of sleep behaviors", "definition"),
    (TechniqueDomain.FEEDBACK_AND_MONITORING, "sleep efficiency over the past week", "example"),
    (TechniqueDomain.ENVIRONMENTAL_CONTEXT_AND_RESOURCES, "white noise machine", "example"),
    (TechniqueDomain.SKILLS_AND_CAPABILITIES, "breathing exercise", "example"),
])
def test_guidance_table_contents(domain, fragment, field):
    assert fragment in getattr(technique_guidance(domain), field)


def test_guidance_complete():
    for domain in TechniqueDomain:
        guidance = technique_guidance(domain)
        assert guidance.definition and guidance.example and guidance.name


class TestSelection:
    def test_reasons_question_selects_knowledge(self):
        selection = select_techniques(
            "What are the possible reasons for waking up at midnight?", [])
        assert TechniqueDomain.KNOWLEDGE in selection.domains

    def test_goal_message_selects_goals(self):
        selection = select_techniques("Can we set a sleep goal for this month?", [])
        assert TechniqueDomain.GOALS in selection.domains

    def test_empty_message_rejected(self):
        with pytest.raises(ValueError):
            select_techniques("", [])
        with pytest.raises(ValueError):
            select_techniques("   ", [])

    def test_stress_selects_emotional_support(self):
        selection = select_techniques("I feel so stressed before bed", [])
        assert TechniqueDomain.EMOTIONAL_SUPPORT in selection.domains

    def test_data_reference_selects_feedback(self):
        selection = select_techniques("show me my sleep efficiency data", [])
        assert TechniqueDomain.FEEDBACK_AND_MONITORING in selection.domains

    def test_default_is_knowledge(self):
        selection = select_techniques("I went to a concert yesterday evening", [])
        assert selection.domains == (TechniqueDomain.KNOWLEDGE,)

    def test_cap_respected(self):
        busy = "my goal is to fix my sleep score, any reason I'm so stressed in my noisy room?"
        selection = select_techniques(busy, [])
        assert 1 <= len(selection.domains) <= SELECTION_CAP

    @given(st.text(min_size=1).filter(lambda s: s.strip()))
    def test_total_and_pure(self, message):
        first = select_techniques(message, [])
        second = select_techniques(message, [])
        assert first == second
        assert 1 <= len(first.domains) <= SELECTION_CAP

    def test_selection_size_invariant(self):
        with pytest.raises(ValueError):
            TechniqueSelection((), "empty")
        with pytest.raises(ValueError):
            TechniqueSelection(tuple(TechniqueDomain)[:4], "too many")


class _FailingLivePort:
    live = True

    def classify(self, prompt, labels):
        raise PortFailure("down")


class _PickyLivePort:
    live = True

    def classify(self, prompt, labels):
        return "emotional_support"


def test_live_port_failure_falls_back_to_rules():
    selection = select_techniques("Can we set a sleep goal?", [], _FailingLivePort())
    assert TechniqueDomain.GOALS in selection.domains


def test_live_port_result_used_when_available():
    selection = select_techniques("Can we set a sleep goal?", [], _PickyLivePort())
    assert selection.domains == (TechniqueDomain.EMOTIONAL_SUPPORT,)
