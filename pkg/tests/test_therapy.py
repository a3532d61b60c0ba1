import dataclasses

import pytest

from wellbot.content import UnknownValueTag
from wellbot.engine import UserEvent, advance, new_session
from wellbot.flows import parse_flow_set
from wellbot.therapy import (
    ACT_PROCESSES,
    STEP_COUNT,
    TherapyScriptError,
    build_script,
    committed_action_for,
    start_therapy,
    therapy_state,
)


@pytest.fixture
def script(flow_set):
    return build_script(flow_set)


def test_fixture_script_is_valid(script):
    assert len(script.steps) == STEP_COUNT
    assert [s.step_index for s in script.steps] == [0, 1, 2, 3, 4]
    assert script.covered_processes() == frozenset(ACT_PROCESSES)
    assert script.steps[0].state_id == "acknowledge"
    assert script.steps[3].required_action == "value_pick"


# --- script validation ---------------------------------------------------


def minimal_therapy_doc(mutate=None):
    doc = {
        "entry_flow": "t",
        "flows": {
            "t": {
                "entry": "s0",
                "states": {
                    "s0": {
                        "template": {"kind": "default", "header": "h", "body": "b"},
                        "meta": {
                            "step_index": 0,
                            "act_tags": list(ACT_PROCESSES),
                            "required_action": "verbal_confirmation",
                        },
                        "intents": {"go": {"phrases": ["go"], "target": "s1"}},
                    },
                    "s1": {
                        "template": {"kind": "default", "header": "h", "body": "b"},
                        "meta": {
                            "step_index": 1,
                            "act_tags": [],
                            "required_action": "verbal_confirmation",
                        },
                        "intents": {"go": {"phrases": ["go"], "target": "s2"}},
                    },
                    "s2": {
                        "template": {"kind": "default", "header": "h", "body": "b"},
                        "meta": {
                            "step_index": 2,
                            "act_tags": [],
                            "required_action": "verbal_confirmation",
                        },
                        "intents": {"go": {"phrases": ["go"], "target": "s3"}},
                    },
                    "s3": {
                        "template": {"kind": "default", "header": "h", "body": "b"},
                        "meta": {
                            "step_index": 3,
                            "act_tags": [],
                            "required_action": "value_pick",
                        },
                        "intents": {"go": {"phrases": ["go"], "target": "s4"}},
                    },
                    "s4": {
                        "template": {"kind": "default", "header": "h", "body": "b"},
                        "meta": {
                            "step_index": 4,
                            "act_tags": [],
                            "required_action": "verbal_confirmation",
                        },
                        "intents": {"go": {"phrases": ["go"], "target": "end"}},
                    },
                    "end": {
                        "template": {"kind": "default", "header": "h", "body": "b"},
                        "terminal": True,
                    },
                },
            }
        }
    }
    if mutate:
        mutate(doc)
    return doc


def build(mutate=None):
    return parse_flow_set(minimal_therapy_doc(mutate), source="inline")


def test_minimal_script_builds():
    script = build_script(build(), flow_id="t")
    assert len(script.steps) == STEP_COUNT


def test_missing_flow_rejected(flow_set):
    with pytest.raises(TherapyScriptError, match="no flow named"):
        build_script(flow_set, flow_id="nope")


def test_gap_in_step_indexes_rejected():
    def mutate(doc):
        doc["flows"]["t"]["states"]["s2"]["meta"]["step_index"] = 7

    with pytest.raises(TherapyScriptError, match="expected step indexes"):
        build_script(build(mutate), flow_id="t")


def test_duplicate_step_index_rejected():
    def mutate(doc):
        doc["flows"]["t"]["states"]["s2"]["meta"]["step_index"] = 1

    with pytest.raises(TherapyScriptError, match="expected step indexes"):
        build_script(build(mutate), flow_id="t")


def test_non_integer_index_rejected():
    def mutate(doc):
        doc["flows"]["t"]["states"]["s2"]["meta"]["step_index"] = "two"

    with pytest.raises(TherapyScriptError, match="must be an integer"):
        build_script(build(mutate), flow_id="t")


def test_unknown_process_tag_rejected():
    def mutate(doc):
        doc["flows"]["t"]["states"]["s1"]["meta"]["act_tags"] = ["wishful_thinking"]

    with pytest.raises(TherapyScriptError, match="unknown process tag"):
        build_script(build(mutate), flow_id="t")


def test_unknown_required_action_rejected():
    def mutate(doc):
        doc["flows"]["t"]["states"]["s1"]["meta"]["required_action"] = "interpretive_dance"

    with pytest.raises(TherapyScriptError, match="unknown required action"):
        build_script(build(mutate), flow_id="t")


def test_uncovered_process_rejected():
    def mutate(doc):
        doc["flows"]["t"]["states"]["s0"]["meta"]["act_tags"] = ["acceptance"]

    with pytest.raises(TherapyScriptError, match="never covered"):
        build_script(build(mutate), flow_id="t")


def test_broken_chain_rejected():
    def mutate(doc):
        doc["flows"]["t"]["states"]["s1"]["intents"]["go"]["target"] = "s1"

    with pytest.raises(TherapyScriptError, match="no transition to"):
        build_script(build(mutate), flow_id="t")


def test_final_step_must_reach_terminal():
    def mutate(doc):
        doc["flows"]["t"]["states"]["s4"]["intents"]["go"]["target"] = "s0"

    with pytest.raises(TherapyScriptError, match="terminal"):
        build_script(build(mutate), flow_id="t")


# --- running the exercise ---------------------------------------------------


def run(session, ctx, text, ts=0.0):
    return advance(session, UserEvent.utterance(text, ts), *ctx).session


@pytest.fixture
def ctx(flow_set, library, wheel):
    return (flow_set, library, wheel)


def test_entry_guard_without_emotion(session, ctx, script):
    turn = start_therapy(session, *ctx)
    assert turn.session.current == ("main", "emotion_wheel")
    assert therapy_state(turn.session, script).step_index is None


def test_full_run_marks_completed(session, ctx, script):
    s = run(session, ctx, "emotions")
    s = run(s, ctx, "i feel very sad")
    turn = start_therapy(s, *ctx)
    s = turn.session
    assert therapy_state(s, script).step_index == 0

    s = run(s, ctx, "ready")
    assert therapy_state(s, script).step_index == 1
    s = run(s, ctx, "People think I am a burden")
    state = therapy_state(s, script)
    assert state.step_index == 2
    assert state.threatening_thought == "People think I am a burden"
    s = run(s, ctx, "done")
    assert therapy_state(s, script).step_index == 3

    s = run(s, ctx, "my health")
    state = therapy_state(s, script)
    assert state.step_index == 4
    assert state.chosen_value == "health"
    assert state.suggested_action == committed_action_for("health", ctx[0])
    assert not state.completed

    s = run(s, ctx, "yes")
    final = therapy_state(s, script)
    assert final.completed
    assert final.step_index is None  # terminal state is not a step
    assert s.current == ("therapy", "complete")
    assert final.declared_emotion == "sadness"


def test_each_value_pick_maps_to_its_action(session, ctx, flow_set):
    table = flow_set.tables["actions"]
    for tag in ("family", "work", "health", "friends", "growth", "community"):
        s = run(session, ctx, "emotions")
        s = run(s, ctx, "i feel sad")
        s = start_therapy(s, *ctx).session
        s = run(s, ctx, "ready")
        s = run(s, ctx, "a worry")
        s = run(s, ctx, "done")
        s = run(s, ctx, tag)
        assert s.slots["chosen_value"] == tag
        assert s.slots["suggested_action"] == table[tag]


def test_committed_action_for_unknown_tag(flow_set):
    with pytest.raises(UnknownValueTag):
        committed_action_for("chocolate", flow_set)


def test_restart_after_completion(session, ctx, script):
    s = run(session, ctx, "emotions")
    s = run(s, ctx, "i feel sad")
    s = start_therapy(s, *ctx).session
    for text in ("ready", "a thought", "done", "family", "yes"):
        s = run(s, ctx, text)
    assert therapy_state(s, script).completed

    again = start_therapy(s, *ctx)
    assert again.session.current == ("therapy", "restart_prompt")
    fresh = run(again.session, ctx, "yes")
    state = therapy_state(fresh, script)
    assert state.step_index == 0
    assert not state.completed
    assert state.threatening_thought is None
    assert state.chosen_value is None
    assert state.suggested_action is None
    assert state.declared_emotion == "sadness"

    declined = run(again.session, ctx, "no")
    assert declined.current == ("main", "menu")
    assert therapy_state(declined, script).completed


def test_resume_restores_bookmarked_step(session, ctx, script):
    s = run(session, ctx, "emotions")
    s = run(s, ctx, "i feel sad")
    s = start_therapy(s, *ctx).session
    s = run(s, ctx, "ready")
    s = run(s, ctx, "a thought")
    assert therapy_state(s, script).step_index == 2
    s = run(s, ctx, "main menu")
    s = start_therapy(s, *ctx).session
    assert therapy_state(s, script).step_index == 2
