"""The dialogue engine.

`advance` is a pure function: (session, event, fixtures) -> Turn. It never
touches a clock or RNG and never performs I/O; side effects it wants (so far
only feedback tallies) come back as Turn.effects for the host to apply
exactly once. That makes the append-only event log sufficient to rebuild any
session byte-for-byte, which `replay` checks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable

from . import flows as flowmod
from .content import ContentLibrary
from .emotions import EmotionRecord, EmotionRef, EmotionWheel, parse_emotion_utterance, wheel_layout
from .flows import (
    CAPTURED,
    FALLBACK,
    STAY,
    FlowSet,
    FlowState,
    TransitionSpec,
    split_target,
    state_key,
)
from .intents import match, normalize
from .protocol import (
    Button,
    CallToAction,
    CheckboxData,
    CheckOption,
    DashboardData,
    EmotionsData,
    ResponsePayload,
    SlideBox,
    SlidesData,
    Tile,
    WheelCell,
    build_response,
    serialize,
)

EVENT_KINDS = ("utterance", "button", "emotion_selected", "checkbox_submit")
GENDERS = ("female", "male", "unspecified")

DEFAULT_FALLBACK = "I did not catch that. Could you say it differently, or use the buttons?"

# A redirect chain longer than this is a cycle in the fixture.
MAX_REDIRECT_HOPS = 10


class MalformedEvent(ValueError):
    pass


class UnboundPlaceholder(KeyError):
    pass


class EngineError(RuntimeError):
    pass


class ReplayDivergence(RuntimeError):
    def __init__(self, index: int, detail: str):
        super().__init__(f"replay diverged at event {index}: {detail}")
        self.index = index


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    name: str
    gender: str = "unspecified"
    values: frozenset = frozenset()
    emotion_history: tuple[EmotionRecord, ...] = ()


@dataclass(frozen=True)
class UserEvent:
    kind: str
    timestamp: float
    text: str | None = None
    intent: str | None = None
    emotion: tuple[str, str] | None = None  # (sector, intensity)
    tags: tuple[str, ...] | None = None

    @staticmethod
    def utterance(text: str, timestamp: float = 0.0) -> "UserEvent":
        return UserEvent(kind="utterance", timestamp=timestamp, text=text)

    @staticmethod
    def button(intent: str, timestamp: float = 0.0) -> "UserEvent":
        return UserEvent(kind="button", timestamp=timestamp, intent=intent)

    @staticmethod
    def emotion_selected(sector: str, intensity: str, timestamp: float = 0.0) -> "UserEvent":
        return UserEvent(kind="emotion_selected", timestamp=timestamp, emotion=(sector, intensity))

    @staticmethod
    def checkbox_submit(tags: Iterable[str], timestamp: float = 0.0) -> "UserEvent":
        return UserEvent(kind="checkbox_submit", timestamp=timestamp, tags=tuple(tags))


def validate_event(event: UserEvent) -> None:
    if event.kind not in EVENT_KINDS:
        raise MalformedEvent(f"unknown event kind {event.kind!r}")
    if event.kind == "utterance" and not isinstance(event.text, str):
        raise MalformedEvent("utterance event needs text")
    if event.kind == "button" and not isinstance(event.intent, str):
        raise MalformedEvent("button event needs an intent id")
    if event.kind == "emotion_selected":
        if (
            not isinstance(event.emotion, tuple)
            or len(event.emotion) != 2
            or not all(isinstance(p, str) for p in event.emotion)
        ):
            raise MalformedEvent("emotion_selected event needs (sector, intensity)")
    if event.kind == "checkbox_submit":
        if event.tags is None or not all(isinstance(t, str) for t in event.tags):
            raise MalformedEvent("checkbox_submit event needs a list of tags")


def event_to_doc(event: UserEvent) -> dict:
    doc: dict = {"kind": event.kind, "timestamp": event.timestamp}
    if event.text is not None:
        doc["text"] = event.text
    if event.intent is not None:
        doc["intent"] = event.intent
    if event.emotion is not None:
        doc["emotion"] = {"sector": event.emotion[0], "intensity": event.emotion[1]}
    if event.tags is not None:
        doc["tags"] = list(event.tags)
    return doc


def event_from_doc(doc: object) -> UserEvent:
    if not isinstance(doc, dict) or not isinstance(doc.get("kind"), str):
        raise MalformedEvent("event document must be an object with a kind")
    emotion_doc = doc.get("emotion")
    emotion = None
    if emotion_doc is not None:
        if not isinstance(emotion_doc, dict):
            raise MalformedEvent("emotion must be an object")
        emotion = (str(emotion_doc.get("sector")), str(emotion_doc.get("intensity")))
    tags_doc = doc.get("tags")
    tags = None
    if tags_doc is not None:
        if not isinstance(tags_doc, list):
            raise MalformedEvent("tags must be a list")
        tags = tuple(str(t) for t in tags_doc)
    timestamp = doc.get("timestamp", 0.0)
    if not isinstance(timestamp, (int, float)):
        raise MalformedEvent("timestamp must be a number")
    event = UserEvent(
        kind=doc["kind"],
        timestamp=float(timestamp),
        text=doc.get("text"),
        intent=doc.get("intent"),
        emotion=emotion,
        tags=tags,
    )
    validate_event(event)
    return event


@dataclass(frozen=True)
class LogEntry:
    event: UserEvent
    state_after: tuple[str, str]
    response: bytes


@dataclass(frozen=True)
class Effect:
    kind: str
    item_id: str = ""
    helpful: bool = True


@dataclass(frozen=True)
class Session:
    session_id: str
    profile: UserProfile
    current: tuple[str, str]  # (flow_id, state_id)
    slots: dict = field(default_factory=dict)
    event_log: tuple[LogEntry, ...] = ()


@dataclass(frozen=True)
class Turn:
    session: Session
    payload: ResponsePayload
    effects: tuple[Effect, ...] = ()


def new_session(session_id: str, profile: UserProfile, flow_set: FlowSet) -> Session:
    return Session(session_id=session_id, profile=profile, current=flow_set.entry())


# --- text rendering ---------------------------------------------------------


def render_slots(text: str, profile: UserProfile, slots: dict) -> str:
    """Expand {slot:...}, {profile:...} and {g:female|male|neutral} markers."""

    def sub(m: re.Match) -> str:
        family, name = m.group(1), m.group(2)
        if family == "profile":
            if name == "values":
                return ", ".join(sorted(profile.values))
            try:
                value = getattr(profile, name)
            except AttributeError:
                raise UnboundPlaceholder(f"unknown profile field {name!r}") from None
            return str(value)
        if family == "slot":
            if name not in slots:
                raise UnboundPlaceholder(f"slot {name!r} has no value")
            value = slots[name]
            if isinstance(value, tuple):
                return ", ".join(str(v) for v in value)
            return str(value)
        # gender alternatives: female|male|neutral
        parts = name.split("|")
        if len(parts) != 3:
            raise UnboundPlaceholder("gender marker needs three alternatives")
        index = {"female": 0, "male": 1}.get(profile.gender, 2)
        return parts[index]

    return flowmod.PLACEHOLDER_RE.sub(sub, text)


def _option_rows(state: FlowState, library: ContentLibrary) -> list[tuple[str, str]]:
    if state.template.options_from_values:
        return [(opt.tag, opt.label) for opt in library.values]
    return []


def _slide_boxes(state: FlowState, library: ContentLibrary) -> tuple[SlideBox, ...]:
    template = state.template
    items = []
    if template.item is not None:
        items = [library.get_item(template.item)]
    elif template.section is not None:
        items = list(library.get_section(template.section).items)
    return tuple(SlideBox(title=item.speech_text, body=item.body_text) for item in items)


def _wheel_cells(wheel: EmotionWheel) -> tuple[WheelCell, ...]:
    cells = []
    for ref in wheel.all_refs():
        pos = wheel_layout(ref, wheel)
        cells.append(
            WheelCell(
                sector=ref.sector,
                intensity=ref.intensity,
                label=ref.canonical_label,
                sector_index=pos.sector_index,
                ring_index=pos.ring_index,
                angle_start=pos.angle_start,
                angle_end=pos.angle_end,
            )
        )
    cells.sort(key=lambda c: (c.sector_index, c.ring_index))
    return tuple(cells)


def _speak_segments(
    names: tuple[str, ...],
    header: str | None,
    body: str | None,
    data: object,
) -> tuple[str, ...]:
    out: list[str] = []
    for name in names:
        if name == "header" and header:
            out.append(header)
        elif name == "body" and body:
            out.append(body)
        elif name == "titles":
            if isinstance(data, SlidesData):
                out.extend(box.title for box in data.boxes if box.title)
            elif isinstance(data, DashboardData):
                out.extend(tile.title for tile in data.tiles)
        elif name == "bodies":
            if isinstance(data, SlidesData):
                out.extend(box.body for box in data.boxes)
            elif isinstance(data, DashboardData):
                out.extend(tile.text for tile in data.tiles)
        elif name == "options" and isinstance(data, CheckboxData):
            out.extend(opt.label for opt in data.options)
        elif name == "tiles" and isinstance(data, DashboardData):
            for tile in data.tiles:
                out.append(tile.title)
                out.append(tile.text)
    return tuple(out)


def render_state(
    session: Session,
    state: FlowState,
    flow_id: str,
    flow_set: FlowSet,
    library: ContentLibrary,
    wheel: EmotionWheel,
    notification: bool = False,
) -> ResponsePayload:
    template = state.template
    header = (
        None
        if template.header is None
        else render_slots(template.header, session.profile, session.slots)
    )
    body = (
        None
        if template.body is None
        else render_slots(template.body, session.profile, session.slots)
    )

    data = None
    if template.kind == "slides":
        data = SlidesData(boxes=_slide_boxes(state, library))
    elif template.kind == "checkboxes":
        data = CheckboxData(
            options=tuple(
                CheckOption(tag=tag, label=label, checked=tag in session.profile.values)
                for tag, label in _option_rows(state, library)
            )
        )
    elif template.kind == "emotions":
        data = EmotionsData(cells=_wheel_cells(wheel))
    elif template.kind == "dashboard":
        data = DashboardData(
            tiles=tuple(Tile(t.tile_id, t.title, t.text) for t in template.tiles),
            cta=None
            if template.cta is None
            else CallToAction(label=template.cta.label, intent=template.cta.intent),
        )

    skey = state_key(flow_id, state.state_id)
    buttons = []
    for intent_id in state.buttons:
        intent = flow_set.registry.lookup(intent_id, skey)
        buttons.append(Button(label=intent.label if intent and intent.label else intent_id, intent=intent_id))

    available = set(flow_set.global_transitions) | {
        i for i in state.transitions if not i.startswith("@")
    }
    speak = (
        None
        if template.speak is None
        else _speak_segments(template.speak, header, body, data)
    )
    return build_response(
        template.kind,
        header=header,
        body=body,
        html_frame=template.html_frame,
        buttons=tuple(buttons),
        data=data,
        speak=speak,
        available_intents=available,
        notification=notification,
    )


def fallback_payload(
    session: Session,
    state: FlowState,
    flow_id: str,
    flow_set: FlowSet,
) -> ResponsePayload:
    body = state.fallback or DEFAULT_FALLBACK
    body = render_slots(body, session.profile, session.slots)
    skey = state_key(flow_id, state.state_id)
    buttons = []
    for intent_id in state.buttons:
        intent = flow_set.registry.lookup(intent_id, skey)
        buttons.append(Button(label=intent.label if intent and intent.label else intent_id, intent=intent_id))
    available = set(flow_set.global_transitions) | {
        i for i in state.transitions if not i.startswith("@")
    }
    return build_response(
        "default",
        body=body,
        buttons=tuple(buttons),
        speak=(body,),
        available_intents=available,
    )


def render_current(
    session: Session, flow_set: FlowSet, library: ContentLibrary, wheel: EmotionWheel
) -> ResponsePayload:
    flow_id, sid = session.current
    return render_state(session, flow_set.state(flow_id, sid), flow_id, flow_set, library, wheel)


# --- event application ------------------------------------------------------


@dataclass
class _Captured:
    slot: str
    value: object
    profile: UserProfile


def _bookmark_slot(flow_id: str) -> str:
    return f"{flowmod.ENGINE_SLOT_PREFIX}position_{flow_id}"


def _resolve_entry(
    flow_set: FlowSet, slots: dict, current_flow: str, target: str
) -> tuple[str, str]:
    """Map a transition target to the state actually entered, honoring the
    resume bookmark when jumping into a resumable flow at its entry state."""
    flow_id, sid = split_target(target, current_flow)
    flow = flow_set.flows[flow_id]
    if flow_id != current_flow and flow.resume and sid == flow.entry_state_id:
        bookmark = slots.get(_bookmark_slot(flow_id))
        if isinstance(bookmark, str) and bookmark in flow.states and bookmark != sid:
            sid = bookmark
    return flow_id, sid


def _try_capture(
    session: Session,
    state: FlowState,
    event: UserEvent,
    library: ContentLibrary,
    wheel: EmotionWheel,
) -> _Captured | None:
    """Interpret free-form input against the state's capture rule. Returns
    None when nothing usable was said, which renders the fallback."""
    capture = state.capture
    profile = session.profile
    if capture.mode == "none" or event.kind == "button":
        return None

    if capture.mode == "free_text" and event.kind == "utterance":
        text = (event.text or "").strip()
        if not normalize(text):
            return None
        return _Captured(slot=capture.slot, value=text, profile=profile)

    if capture.mode == "emotion":
        refs: list[EmotionRef] = []
        source = ""
        if event.kind == "utterance":
            refs = parse_emotion_utterance(event.text or "", wheel)
            source = "voice"
        elif event.kind == "emotion_selected":
            sector, intensity = event.emotion
            cell = wheel.cells.get((sector, intensity))
            if cell is None:
                raise MalformedEvent(f"no wheel cell ({sector}, {intensity})")
            refs = [cell]
            source = "touch"
        if not refs:
            return None
        records = tuple(
            EmotionRecord(
                ref=ref,
                recorded_at=event.timestamp,
                source=source,
                session_id=session.session_id,
            )
            for ref in refs
        )
        profile = replace(profile, emotion_history=profile.emotion_history + records)
        return _Captured(slot=capture.slot, value=refs[0].canonical_label, profile=profile)

    if capture.mode == "checkbox":
        option_tags = [tag for tag, _ in _option_rows(state, library)]
        chosen: list[str] = []
        if event.kind == "utterance":
            tokens = set(normalize(event.text or ""))
            chosen = [tag for tag in option_tags if tag in tokens]
        elif event.kind == "checkbox_submit":
            wanted = set(event.tags or ())
            chosen = [tag for tag in option_tags if tag in wanted]
        if not chosen:
            return None
        if capture.profile_field == "values":
            profile = replace(profile, values=frozenset(chosen))
        return _Captured(slot=capture.slot, value=tuple(chosen), profile=profile)

    return None


def advance(
    session: Session,
    event: UserEvent,
    flow_set: FlowSet,
    library: ContentLibrary,
    wheel: EmotionWheel,
) -> Turn:
    """Apply one user event and return the next session plus its response.

    NoMatch is not an error: the session keeps its state and slots and the
    answer is the state's fallback prompt. Only the event log grows.
    """
    validate_event(event)
    flow_id, sid = session.current
    state = flow_set.state(flow_id, sid)
    skey = state_key(flow_id, sid)

    transition: TransitionSpec | None = None
    captured: _Captured | None = None

    if event.kind == "utterance":
        found = match(event.text or "", skey, flow_set.registry)
        if found is not None:
            transition = state.transitions.get(found.intent_id) or flow_set.global_transitions.get(
                found.intent_id
            )
        else:
            captured = _try_capture(session, state, event, library, wheel)
            if captured is not None:
                transition = state.transitions.get(CAPTURED)
    elif event.kind == "button":
        intent_id = event.intent or ""
        # Reserved keys like @captured are not tappable intents.
        if not intent_id.startswith("@"):
            transition = state.transitions.get(intent_id) or flow_set.global_transitions.get(
                intent_id
            )
    else:
        captured = _try_capture(session, state, event, library, wheel)
        if captured is not None:
            transition = state.transitions.get(CAPTURED)

    if transition is None or transition.target == FALLBACK:
        payload = fallback_payload(session, state, flow_id, flow_set)
        entry = LogEntry(event=event, state_after=session.current, response=serialize(payload))
        return Turn(
            session=replace(session, event_log=session.event_log + (entry,)),
            payload=payload,
            effects=(),
        )

    slots = dict(session.slots)
    profile = session.profile
    effects: list[Effect] = []

    if captured is not None:
        slots[captured.slot] = captured.value
        profile = captured.profile

    for name in transition.clears:
        slots.pop(name, None)
    for name, value in transition.sets:
        slots[name] = value
    if transition.lookup is not None:
        table = flow_set.tables.get(transition.lookup.table, {})
        key = slots.get(transition.lookup.key_slot)
        if not isinstance(key, str) or key not in table:
            raise EngineError(
                f"lookup into {transition.lookup.table!r} has no entry for {key!r}"
            )
        slots[transition.lookup.into] = table[key]
    if transition.feedback is not None:
        effects.append(
            Effect(
                kind="feedback",
                item_id=transition.feedback.item_id,
                helpful=transition.feedback.helpful,
            )
        )

    if transition.target == STAY:
        next_flow, next_sid = flow_id, sid
    else:
        next_flow, next_sid = _resolve_entry(flow_set, slots, flow_id, transition.target)
        # Guard redirects run on entry, possibly chaining across states.
        hops = 0
        while True:
            landed = flow_set.state(next_flow, next_sid)
            target = None
            for rule in landed.redirects:
                present = rule.slot in slots
                if (rule.when == "present") == present:
                    target = rule.target
                    break
            if target is None:
                break
            hops += 1
            if hops > MAX_REDIRECT_HOPS:
                raise EngineError(f"redirect cycle at {next_flow}:{next_sid}")
            next_flow, next_sid = _resolve_entry(flow_set, slots, next_flow, target)

    final_state = flow_set.state(next_flow, next_sid)
    flow = flow_set.flows[next_flow]
    if flow.resume:
        if final_state.terminal:
            slots.pop(_bookmark_slot(next_flow), None)
        else:
            slots[_bookmark_slot(next_flow)] = next_sid

    moved = replace(session, profile=profile, current=(next_flow, next_sid), slots=slots)
    payload = render_state(moved, final_state, next_flow, flow_set, library, wheel)
    entry = LogEntry(event=event, state_after=moved.current, response=serialize(payload))
    return Turn(
        session=replace(moved, event_log=moved.event_log + (entry,)),
        payload=payload,
        effects=tuple(effects),
    )


# --- replay -----------------------------------------------------------------


def replay(
    events: Iterable[UserEvent],
    flow_set: FlowSet,
    library: ContentLibrary,
    wheel: EmotionWheel,
    profile: UserProfile,
    session_id: str,
    expected: Iterable[LogEntry] | None = None,
) -> Session:
    """Rebuild a session by re-applying its events in order.

    Effects are discarded: they were applied when the events first happened.
    With ``expected`` log entries given, every step is checked against the
    recorded state and response bytes and any difference raises
    ReplayDivergence.
    """
    session = new_session(session_id, profile, flow_set)
    expected_list = None if expected is None else list(expected)
    for i, event in enumerate(events):
        turn = advance(session, event, flow_set, library, wheel)
        session = turn.session
        if expected_list is not None:
            if i >= len(expected_list):
                raise ReplayDivergence(i, "more events than recorded entries")
            want = expected_list[i]
            got = session.event_log[-1]
            if got.state_after != want.state_after:
                raise ReplayDivergence(
                    i, f"state {got.state_after} != recorded {want.state_after}"
                )
            if got.response != want.response:
                raise ReplayDivergence(i, "response bytes differ from recorded entry")
    return session
