"""Conversation flows as data.

A flow set is a YAML document: global intents with their jump targets, one or
more flows of named states, and lookup tables. Each state declares a screen
template, local intents with transitions, an optional capture rule for
free-form input, and guard redirects. The loader builds typed objects and
``validate_flow_set`` reports structural problems as named diagnostics
before anything runs.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import yaml

from .intents import IntentDef, IntentRegistry, RegistryError, normalize

TEMPLATE_KINDS = ("slides", "checkboxes", "emotions", "dashboard", "default")
CAPTURE_MODES = ("none", "free_text", "emotion", "checkbox")

# Reserved transition targets: re-render in place / answer with the fallback.
STAY = "@stay"
FALLBACK = "@fallback"
# Reserved transition key fired when a state's capture rule is satisfied.
CAPTURED = "@captured"

PROFILE_FIELDS = ("user_id", "name", "gender", "values")

PLACEHOLDER_RE = re.compile(r"\{(slot|profile|g):([^{}]+)\}")

# Slots the engine writes on its own (resume bookmarks).
ENGINE_SLOT_PREFIX = "_"


class FlowLoadError(ValueError):
    """Flow fixture rejected; carries the diagnostics that caused it."""

    def __init__(self, diagnostics: list["Diagnostic"]):
        super().__init__(
            "flow set failed validation: "
            + "; ".join(str(d) for d in diagnostics[:5])
            + ("" if len(diagnostics) <= 5 else f" (+{len(diagnostics) - 5} more)")
        )
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    flow_id: str | None
    state_id: str | None
    detail: str

    def __str__(self) -> str:
        where = ":".join(p for p in (self.flow_id, self.state_id) if p)
        return f"{self.kind}[{where}] {self.detail}" if where else f"{self.kind} {self.detail}"


@dataclass(frozen=True)
class TileSpec:
    tile_id: str
    title: str
    text: str


@dataclass(frozen=True)
class CtaSpec:
    label: str
    intent: str


@dataclass(frozen=True)
class TemplateSpec:
    kind: str
    header: str | None = None
    body: str | None = None
    html_frame: str | None = None
    speak: tuple[str, ...] | None = None  # field names; None = speak everything shown
    section: str | None = None
    item: str | None = None
    options_from_values: bool = False
    tiles: tuple[TileSpec, ...] = ()
    cta: CtaSpec | None = None


@dataclass(frozen=True)
class CaptureSpec:
    mode: str = "none"
    slot: str | None = None
    profile_field: str | None = None


@dataclass(frozen=True)
class LookupSpec:
    table: str
    key_slot: str
    into: str


@dataclass(frozen=True)
class FeedbackSpec:
    item_id: str
    helpful: bool


@dataclass(frozen=True)
class TransitionSpec:
    target: str
    sets: tuple[tuple[str, str], ...] = ()
    clears: tuple[str, ...] = ()
    lookup: LookupSpec | None = None
    feedback: FeedbackSpec | None = None


@dataclass(frozen=True)
class RedirectRule:
    when: str  # "present" or "missing"
    slot: str
    target: str


@dataclass(frozen=True)
class FlowState:
    state_id: str
    template: TemplateSpec
    transitions: dict[str, TransitionSpec] = field(default_factory=dict)
    capture: CaptureSpec = CaptureSpec()
    buttons: tuple[str, ...] = ()
    fallback: str | None = None
    terminal: bool = False
    redirects: tuple[RedirectRule, ...] = ()
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FlowDefinition:
    flow_id: str
    entry_state_id: str
    states: dict[str, FlowState]
    resume: bool = False


@dataclass(frozen=True)
class FlowSet:
    entry_flow: str
    flows: dict[str, FlowDefinition]
    registry: IntentRegistry
    global_transitions: dict[str, TransitionSpec]
    tables: dict[str, dict[str, str]]
    fingerprint: str

    def entry(self) -> tuple[str, str]:
        flow = self.flows[self.entry_flow]
        return flow.flow_id, flow.entry_state_id

    def state(self, flow_id: str, state_id: str) -> FlowState:
        return self.flows[flow_id].states[state_id]


def state_key(flow_id: str, state_id: str) -> str:
    return f"{flow_id}:{state_id}"


def split_target(target: str, current_flow: str) -> tuple[str, str]:
    """Resolve a transition target to (flow_id, state_id).

    Bare names stay inside the current flow; qualified names use
    ``flow:state``. Reserved targets never reach this function.
    """
    if ":" in target:
        flow_id, _, state_id = target.partition(":")
        return flow_id, state_id
    return current_flow, target


def find_placeholders(text: str) -> list[tuple[str, str]]:
    return [(m.group(1), m.group(2)) for m in PLACEHOLDER_RE.finditer(text)]


# --- parsing ----------------------------------------------------------------


def _err(source: str, msg: str) -> FlowLoadError:
    return FlowLoadError([Diagnostic("schema", None, None, f"{source}: {msg}")])


def _parse_template(raw: object, where: str, source: str) -> TemplateSpec:
    if not isinstance(raw, dict):
        raise _err(source, f"{where}: template must be a mapping")
    kind = raw.get("kind", "default")
    if kind not in TEMPLATE_KINDS:
        raise _err(source, f"{where}: unknown template kind {kind!r}")
    speak = raw.get("speak")
    if speak is not None:
        if not isinstance(speak, list) or not all(isinstance(s, str) for s in speak):
            raise _err(source, f"{where}: speak must be a list of field names")
        speak = tuple(speak)
    tiles = []
    for t in raw.get("tiles", []) or []:
        if not isinstance(t, dict) or not all(k in t for k in ("id", "title", "text")):
            raise _err(source, f"{where}: tiles need id, title and text")
        tiles.append(TileSpec(str(t["id"]), str(t["title"]), str(t["text"])))
    cta_doc = raw.get("cta")
    cta = None
    if cta_doc is not None:
        if not isinstance(cta_doc, dict) or "label" not in cta_doc or "intent" not in cta_doc:
            raise _err(source, f"{where}: cta needs label and intent")
        cta = CtaSpec(str(cta_doc["label"]), str(cta_doc["intent"]))
    return TemplateSpec(
        kind=kind,
        header=raw.get("header"),
        body=raw.get("body"),
        html_frame=raw.get("html_frame"),
        speak=speak,
        section=raw.get("section"),
        item=raw.get("item"),
        options_from_values=bool(raw.get("options_from_values", False)),
        tiles=tuple(tiles),
        cta=cta,
    )


def _parse_transition(raw: object, where: str, source: str) -> TransitionSpec:
    if isinstance(raw, str):
        return TransitionSpec(target=raw)
    if not isinstance(raw, dict) or not isinstance(raw.get("target"), str):
        raise _err(source, f"{where}: transition needs a target")
    sets_doc = raw.get("sets", {}) or {}
    if not isinstance(sets_doc, dict):
        raise _err(source, f"{where}: sets must be a mapping")
    clears_doc = raw.get("clears", []) or []
    if not isinstance(clears_doc, list):
        raise _err(source, f"{where}: clears must be a list")
    lookup_doc = raw.get("lookup")
    lookup = None
    if lookup_doc is not None:
        if not isinstance(lookup_doc, dict) or not all(
            isinstance(lookup_doc.get(k), str) for k in ("table", "key", "into")
        ):
            raise _err(source, f"{where}: lookup needs table, key and into")
        lookup = LookupSpec(lookup_doc["table"], lookup_doc["key"], lookup_doc["into"])
    feedback_doc = raw.get("feedback")
    feedback = None
    if feedback_doc is not None:
        if not isinstance(feedback_doc, dict) or not isinstance(feedback_doc.get("item"), str):
            raise _err(source, f"{where}: feedback needs an item id")
        feedback = FeedbackSpec(feedback_doc["item"], bool(feedback_doc.get("helpful", True)))
    return TransitionSpec(
        target=raw["target"],
        sets=tuple((str(k), str(v)) for k, v in sets_doc.items()),
        clears=tuple(str(c) for c in clears_doc),
        lookup=lookup,
        feedback=feedback,
    )


def _parse_intent_def(
    intent_id: str, raw: object, where: str, source: str, state_id: str | None
) -> tuple[IntentDef, TransitionSpec]:
    if not isinstance(raw, dict):
        raise _err(source, f"{where}: intent {intent_id!r} must be a mapping")
    if intent_id.startswith("@"):
        raise _err(source, f"{where}: intent ids must not start with '@'")
    phrases_doc = raw.get("phrases")
    if not isinstance(phrases_doc, list) or not phrases_doc:
        raise _err(source, f"{where}: intent {intent_id!r} needs phrases")
    phrases = []
    for p in phrases_doc:
        if not isinstance(p, str):
            # catches YAML 1.1 surprises like a bare `yes` becoming a boolean
            raise _err(source, f"{where}: intent {intent_id!r} phrase {p!r} is not text")
        tokens = normalize(p)
        if not tokens:
            raise _err(source, f"{where}: intent {intent_id!r} has an empty phrase")
        phrases.append(tokens)
    label = raw.get("label")
    transition = _parse_transition(
        raw.get("transition", raw.get("target")), f"{where}:{intent_id}", source
    )
    intent = IntentDef(
        intent_id=intent_id,
        phrases=tuple(phrases),
        label=None if label is None else str(label),
        state_id=state_id,
    )
    return intent, transition


def parse_flow_set(doc: object, source: str = "<flows>") -> FlowSet:
    """Build a FlowSet from a parsed YAML document. Schema errors raise
    FlowLoadError immediately; structural problems are left for
    validate_flow_set so tests can observe them by name."""
    if not isinstance(doc, dict):
        raise _err(source, "top level must be a mapping")

    registry = IntentRegistry()
    global_transitions: dict[str, TransitionSpec] = {}
    intents_doc = doc.get("intents", {}) or {}
    if not isinstance(intents_doc, dict):
        raise _err(source, "intents must be a mapping")
    for intent_id, raw in intents_doc.items():
        intent, transition = _parse_intent_def(str(intent_id), raw, "intents", source, None)
        try:
            registry.add(intent)
        except RegistryError as exc:
            raise _err(source, str(exc))
        global_transitions[intent.intent_id] = transition

    flows_doc = doc.get("flows")
    if not isinstance(flows_doc, dict) or not flows_doc:
        raise _err(source, "flows mapping is required")

    flows: dict[str, FlowDefinition] = {}
    for flow_id, flow_raw in flows_doc.items():
        flow_id = str(flow_id)
        if not isinstance(flow_raw, dict):
            raise _err(source, f"flow {flow_id!r} must be a mapping")
        entry = flow_raw.get("entry")
        states_doc = flow_raw.get("states")
        if not isinstance(states_doc, dict) or not states_doc:
            raise _err(source, f"flow {flow_id!r} needs states")
        states: dict[str, FlowState] = {}
        for sid, sraw in states_doc.items():
            sid = str(sid)
            where = f"{flow_id}:{sid}"
            if not isinstance(sraw, dict):
                raise _err(source, f"state {where} must be a mapping")
            template = _parse_template(sraw.get("template", {"kind": "default"}), where, source)

            transitions: dict[str, TransitionSpec] = {}
            for iid, iraw in (sraw.get("intents", {}) or {}).items():
                intent, transition = _parse_intent_def(str(iid), iraw, where, source, where)
                try:
                    registry.add(intent)
                except RegistryError as exc:
                    raise _err(source, str(exc))
                transitions[intent.intent_id] = transition

            capture_doc = sraw.get("capture")
            capture = CaptureSpec()
            if capture_doc is not None:
                if not isinstance(capture_doc, dict):
                    raise _err(source, f"state {where}: capture must be a mapping")
                mode = capture_doc.get("mode", "none")
                if mode not in CAPTURE_MODES:
                    raise _err(source, f"state {where}: unknown capture mode {mode!r}")
                slot = capture_doc.get("slot")
                if mode != "none" and not isinstance(slot, str):
                    raise _err(source, f"state {where}: capture needs a slot")
                capture = CaptureSpec(
                    mode=mode, slot=slot, profile_field=capture_doc.get("profile_field")
                )
            if capture.mode != "none":
                captured_doc = sraw.get("on_captured")
                if captured_doc is None:
                    raise _err(source, f"state {where}: capture without on_captured")
                transitions[CAPTURED] = _parse_transition(
                    captured_doc, f"{where}:on_captured", source
                )
            if capture.mode == "checkbox" and template.kind != "checkboxes":
                raise _err(source, f"state {where}: checkbox capture needs checkboxes template")
            if template.kind == "emotions" and capture.mode != "emotion":
                raise _err(source, f"state {where}: emotions template needs emotion capture")
            if capture.profile_field is not None and capture.profile_field not in PROFILE_FIELDS:
                raise _err(
                    source, f"state {where}: unknown profile field {capture.profile_field!r}"
                )

            buttons_doc = sraw.get("buttons")
            if buttons_doc is None:
                buttons = tuple(i for i in transitions if i != CAPTURED)
            elif isinstance(buttons_doc, list):
                buttons = tuple(str(b) for b in buttons_doc)
            else:
                raise _err(source, f"state {where}: buttons must be a list")

            redirects = []
            for rraw in sraw.get("redirects", []) or []:
                if not isinstance(rraw, dict) or not isinstance(rraw.get("target"), str):
                    raise _err(source, f"state {where}: redirects need a target")
                if "if_present" in rraw:
                    redirects.append(RedirectRule("present", str(rraw["if_present"]), rraw["target"]))
                elif "if_missing" in rraw:
                    redirects.append(RedirectRule("missing", str(rraw["if_missing"]), rraw["target"]))
                else:
                    raise _err(source, f"state {where}: redirect needs if_present or if_missing")

            meta = sraw.get("meta", {}) or {}
            if not isinstance(meta, dict):
                raise _err(source, f"state {where}: meta must be a mapping")

            states[sid] = FlowState(
                state_id=sid,
                template=template,
                transitions=transitions,
                capture=capture,
                buttons=buttons,
                fallback=sraw.get("fallback"),
                terminal=bool(sraw.get("terminal", False)),
                redirects=tuple(redirects),
                meta=meta,
            )
        flows[flow_id] = FlowDefinition(
            flow_id=flow_id,
            entry_state_id="" if entry is None else str(entry),
            states=states,
            resume=bool(flow_raw.get("resume", False)),
        )

    entry_flow = doc.get("entry_flow", "main")
    if entry_flow not in flows:
        raise _err(source, f"entry_flow {entry_flow!r} is not a flow")

    tables_doc = doc.get("tables", {}) or {}
    if not isinstance(tables_doc, dict):
        raise _err(source, "tables must be a mapping")
    tables: dict[str, dict[str, str]] = {}
    for name, value in tables_doc.items():
        if not isinstance(value, dict):
            raise _err(source, f"table {name!r} must be an inline mapping once resolved")
        tables[str(name)] = {str(k): str(v) for k, v in value.items()}

    fingerprint = hashlib.sha256(
        json.dumps(doc, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()

    return FlowSet(
        entry_flow=str(entry_flow),
        flows=flows,
        registry=registry,
        global_transitions=global_transitions,
        tables=tables,
        fingerprint=fingerprint,
    )


# --- validation -------------------------------------------------------------


def _template_texts(state: FlowState) -> Iterable[str]:
    t = state.template
    for text in (t.header, t.body, t.html_frame, state.fallback):
        if text:
            yield text


def _capturable_slots(flow_set: FlowSet) -> set[str]:
    slots: set[str] = set()
    transitions: list[TransitionSpec] = list(flow_set.global_transitions.values())
    for flow in flow_set.flows.values():
        for state in flow.states.values():
            if state.capture.slot:
                slots.add(state.capture.slot)
            transitions.extend(state.transitions.values())
    for tr in transitions:
        slots.update(k for k, _ in tr.sets)
        if tr.lookup:
            slots.add(tr.lookup.into)
    return slots


def validate_flow_set(flow_set: FlowSet) -> list[Diagnostic]:
    """Static checks over a parsed flow set; returns diagnostics, never raises."""
    out: list[Diagnostic] = []
    flows = flow_set.flows
    registry = flow_set.registry

    for problem in registry.validate():
        out.append(Diagnostic("duplicate_phrase", None, None, problem))

    def target_exists(target: str, current_flow: str) -> bool:
        if target in (STAY, FALLBACK):
            return True
        flow_id, sid = split_target(target, current_flow)
        return flow_id in flows and sid in flows[flow_id].states

    # Entry states and terminal coverage.
    for flow in flows.values():
        if flow.entry_state_id not in flow.states:
            out.append(
                Diagnostic(
                    "missing_entry",
                    flow.flow_id,
                    None,
                    f"entry state {flow.entry_state_id!r} does not exist",
                )
            )
        if not any(s.terminal for s in flow.states.values()):
            out.append(
                Diagnostic("no_terminal", flow.flow_id, None, "flow has no terminal state")
            )

    # Dangling targets, buttons, placeholders.
    known_intents = set(flow_set.global_transitions)
    for intent_id, tr in flow_set.global_transitions.items():
        if ":" not in tr.target and tr.target not in (STAY, FALLBACK):
            out.append(
                Diagnostic(
                    "dangling_target",
                    None,
                    None,
                    f"global intent {intent_id!r} needs a flow-qualified target, got {tr.target!r}",
                )
            )
        elif not target_exists(tr.target, flow_set.entry_flow):
            out.append(
                Diagnostic(
                    "dangling_target",
                    None,
                    None,
                    f"global intent {intent_id!r} targets missing state {tr.target!r}",
                )
            )

    capturable = _capturable_slots(flow_set)
    defined_anywhere = set(registry.global_intents) | {
        iid for local in registry.local_intents.values() for iid in local
    }
    for flow in flows.values():
        for state in flow.states.values():
            skey = state_key(flow.flow_id, state.state_id)
            local_ids = {i for i in state.transitions if not i.startswith("@")}
            for intent_id, tr in state.transitions.items():
                if not target_exists(tr.target, flow.flow_id):
                    out.append(
                        Diagnostic(
                            "dangling_target",
                            flow.flow_id,
                            state.state_id,
                            f"transition {intent_id!r} targets missing state {tr.target!r}",
                        )
                    )
                if tr.lookup and tr.lookup.table not in flow_set.tables:
                    out.append(
                        Diagnostic(
                            "dangling_target",
                            flow.flow_id,
                            state.state_id,
                            f"lookup references missing table {tr.lookup.table!r}",
                        )
                    )
            for rule in state.redirects:
                if not target_exists(rule.target, flow.flow_id):
                    out.append(
                        Diagnostic(
                            "dangling_target",
                            flow.flow_id,
                            state.state_id,
                            f"redirect targets missing state {rule.target!r}",
                        )
                    )
            for button in state.buttons:
                if button not in known_intents and button not in local_ids:
                    kind = "unknown_intent" if button not in defined_anywhere else "bad_button"
                    out.append(
                        Diagnostic(
                            kind,
                            flow.flow_id,
                            state.state_id,
                            f"button {button!r} is not available in this state",
                        )
                    )
            if state.template.cta is not None:
                cta_intent = state.template.cta.intent
                if cta_intent not in known_intents and cta_intent not in local_ids:
                    kind = "unknown_intent" if cta_intent not in defined_anywhere else "bad_button"
                    out.append(
                        Diagnostic(
                            kind,
                            flow.flow_id,
                            state.state_id,
                            f"call to action {cta_intent!r} is not available in this state",
                        )
                    )
            for text in _template_texts(state):
                for family, name in find_placeholders(text):
                    if family == "profile" and name not in PROFILE_FIELDS:
                        out.append(
                            Diagnostic(
                                "unbound_placeholder",
                                flow.flow_id,
                                state.state_id,
                                f"unknown profile field {name!r}",
                            )
                        )
                    elif (
                        family == "slot"
                        and name not in capturable
                        and not name.startswith(ENGINE_SLOT_PREFIX)
                    ):
                        out.append(
                            Diagnostic(
                                "unbound_placeholder",
                                flow.flow_id,
                                state.state_id,
                                f"slot {name!r} is never captured or set",
                            )
                        )

    # Reachability across the whole set. Global intents are available from
    # every state, so their targets join the frontier as soon as any state
    # is reachable at all.
    reached: set[tuple[str, str]] = set()
    entry_flow = flows.get(flow_set.entry_flow)
    frontier: list[tuple[str, str]] = []
    if entry_flow is not None and entry_flow.entry_state_id in entry_flow.states:
        frontier.append((entry_flow.flow_id, entry_flow.entry_state_id))
    for tr in flow_set.global_transitions.values():
        if tr.target not in (STAY, FALLBACK):
            flow_id, sid = split_target(tr.target, flow_set.entry_flow)
            if flow_id in flows and sid in flows[flow_id].states:
                frontier.append((flow_id, sid))
    while frontier:
        node = frontier.pop()
        if node in reached:
            continue
        reached.add(node)
        flow_id, sid = node
        state = flows[flow_id].states[sid]
        targets = [tr.target for tr in state.transitions.values()]
        targets.extend(rule.target for rule in state.redirects)
        for target in targets:
            if target in (STAY, FALLBACK):
                continue
            tflow, tsid = split_target(target, flow_id)
            if tflow in flows and tsid in flows[tflow].states:
                frontier.append((tflow, tsid))
    for flow in flows.values():
        for sid in flow.states:
            if (flow.flow_id, sid) not in reached:
                out.append(
                    Diagnostic(
                        "unreachable_state",
                        flow.flow_id,
                        sid,
                        "no path from the entry state or any global intent",
                    )
                )
    return out


# --- loading ----------------------------------------------------------------


def _resolve_tables(doc: dict, read_table: "callable") -> None:
    tables_doc = doc.get("tables")
    if not isinstance(tables_doc, dict):
        return
    for name, value in list(tables_doc.items()):
        if isinstance(value, str):
            loaded = yaml.safe_load(read_table(value))
            if not isinstance(loaded, dict):
                raise _err(value, f"table file for {name!r} must hold a mapping")
            tables_doc[name] = loaded


def load_flow_set(path: str | Path) -> FlowSet:
    """Load, resolve table files relative to the flows file, and gate on
    validation: any diagnostic makes the load fail."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if isinstance(doc, dict):
        _resolve_tables(doc, lambda rel: (path.parent / rel).read_text("utf-8"))
    flow_set = parse_flow_set(doc, source=str(path))
    diagnostics = validate_flow_set(flow_set)
    if diagnostics:
        raise FlowLoadError(diagnostics)
    return flow_set


def default_flows() -> FlowSet:
    data = resources.files("wellbot.data")
    doc = yaml.safe_load(data.joinpath("flows.yaml").read_text("utf-8"))
    if isinstance(doc, dict):
        _resolve_tables(doc, lambda rel: data.joinpath(rel).read_text("utf-8"))
    flow_set = parse_flow_set(doc, source="wellbot.data/flows.yaml")
    diagnostics = validate_flow_set(flow_set)
    if diagnostics:
        raise FlowLoadError(diagnostics)
    return flow_set
