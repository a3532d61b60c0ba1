"""The calming exercise as a validated script over flow metadata.

The exercise itself is authored in the flow fixture; states tagged with
``step_index`` form the script. This module checks the therapeutic contract
that the flow loader does not know about: exactly five linear steps, every
one of the six change processes covered, and a sensible required action per
step.
"""

from __future__ import annotations

from dataclasses import dataclass

from .content import ContentLibrary, UnknownValueTag
from .emotions import EmotionWheel
from .engine import Session, Turn, UserEvent, advance
from .flows import FlowSet

ACT_PROCESSES = (
    "acceptance",
    "cognitive_defusion",
    "being_present",
    "self_as_context",
    "values",
    "committed_action",
)

REQUIRED_ACTIONS = ("verbal_confirmation", "free_text_capture", "value_pick")

STEP_COUNT = 5

COMPLETED_SLOT = "therapy_completed"
EMOTION_SLOT = "declared_emotion"
THOUGHT_SLOT = "threatening_thought"
VALUE_SLOT = "chosen_value"
ACTION_SLOT = "suggested_action"


class TherapyScriptError(ValueError):
    pass


@dataclass(frozen=True)
class TherapyStep:
    state_id: str
    step_index: int
    act_tags: tuple[str, ...]
    required_action: str


@dataclass(frozen=True)
class TherapyScript:
    flow_id: str
    steps: tuple[TherapyStep, ...]

    def covered_processes(self) -> frozenset:
        return frozenset(tag for step in self.steps for tag in step.act_tags)


@dataclass(frozen=True)
class TherapyState:
    step_index: int | None
    completed: bool
    declared_emotion: str | None
    threatening_thought: str | None
    chosen_value: str | None
    suggested_action: str | None


def build_script(flow_set: FlowSet, flow_id: str = "therapy") -> TherapyScript:
    """Extract and validate the step script from a flow's state metadata."""
    if flow_id not in flow_set.flows:
        raise TherapyScriptError(f"no flow named {flow_id!r}")
    flow = flow_set.flows[flow_id]

    steps: list[TherapyStep] = []
    for state in flow.states.values():
        if "step_index" not in state.meta:
            continue
        index = state.meta["step_index"]
        if not isinstance(index, int):
            raise TherapyScriptError(f"{state.state_id}: step_index must be an integer")
        tags = tuple(state.meta.get("act_tags", ()))
        for tag in tags:
            if tag not in ACT_PROCESSES:
                raise TherapyScriptError(f"{state.state_id}: unknown process tag {tag!r}")
        action = state.meta.get("required_action")
        if action not in REQUIRED_ACTIONS:
            raise TherapyScriptError(f"{state.state_id}: unknown required action {action!r}")
        steps.append(
            TherapyStep(
                state_id=state.state_id, step_index=index, act_tags=tags, required_action=action
            )
        )

    steps.sort(key=lambda s: s.step_index)
    if [s.step_index for s in steps] != list(range(STEP_COUNT)):
        raise TherapyScriptError(
            f"expected step indexes 0..{STEP_COUNT - 1}, got "
            f"{[s.step_index for s in steps]}"
        )

    script = TherapyScript(flow_id=flow_id, steps=tuple(steps))
    missing = set(ACT_PROCESSES) - script.covered_processes()
    if missing:
        raise TherapyScriptError(f"process tags never covered: {sorted(missing)}")

    # Linearity: each step must lead to the next, the last to a terminal state.
    for current, following in zip(script.steps, script.steps[1:]):
        state = flow.states[current.state_id]
        targets = {t.target for t in state.transitions.values()}
        if following.state_id not in targets:
            raise TherapyScriptError(
                f"step {current.step_index} ({current.state_id}) has no transition to "
                f"step {following.step_index} ({following.state_id})"
            )
    last = flow.states[script.steps[-1].state_id]
    to_terminal = any(
        t.target in flow.states and flow.states[t.target].terminal
        for t in last.transitions.values()
    )
    if not to_terminal:
        raise TherapyScriptError("the final step does not lead to a terminal state")
    return script


def therapy_state(session: Session, script: TherapyScript) -> TherapyState:
    """Read the exercise progress out of a session."""
    step_index = None
    flow_id, state_id = session.current
    if flow_id == script.flow_id:
        for step in script.steps:
            if step.state_id == state_id:
                step_index = step.step_index
                break
    slots = session.slots
    return TherapyState(
        step_index=step_index,
        completed=COMPLETED_SLOT in slots,
        declared_emotion=slots.get(EMOTION_SLOT),
        threatening_thought=slots.get(THOUGHT_SLOT),
        chosen_value=slots.get(VALUE_SLOT),
        suggested_action=slots.get(ACTION_SLOT),
    )


def start_therapy(
    session: Session,
    flow_set: FlowSet,
    library: ContentLibrary,
    wheel: EmotionWheel,
    intent_id: str = "go_therapy",
    timestamp: float = 0.0,
) -> Turn:
    """Jump into the exercise the same way a button tap would.

    Entry guards live on the flow: without a declared emotion the turn lands
    on the emotion wheel instead, and a completed exercise lands on the
    restart prompt.
    """
    return advance(session, UserEvent.button(intent_id, timestamp), flow_set, library, wheel)


def committed_action_for(
    value_tag: str, flow_set: FlowSet, table_name: str = "actions"
) -> str:
    """The suggestion text a value pick resolves to."""
    table = flow_set.tables.get(table_name, {})
    if value_tag not in table:
        raise UnknownValueTag(value_tag)
    return table[value_tag]
