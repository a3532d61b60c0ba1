"""HTTP gateway: sessions, events, content, instruments, and push.

The gateway owns the mutable world: live sessions, user profiles, feedback
tallies, and the store. Event handling is compute-then-commit: the engine
produces the next state as a value, the store durably appends it, and only
then does the in-memory session move. A store failure therefore leaves the
session exactly where it was. One lock per session serializes writers, so
concurrent posts to one session land in some linear order.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import replace
from queue import Empty, SimpleQueue
from typing import Iterator

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .content import (
    ContentLibrary,
    FeedbackBook,
    NotEligible,
    UnknownItem,
    UnknownSection,
    default_library,
    load_content,
)
from .emotions import EmotionWheel, default_wheel, load_taxonomy
from .engine import (
    GENDERS,
    LogEntry,
    MalformedEvent,
    Session,
    UserEvent,
    UserProfile,
    advance,
    event_from_doc,
    event_to_doc,
    new_session,
    render_current,
    replay,
)
from .flows import FlowLoadError, FlowSet, default_flows, load_flow_set, validate_flow_set
from .instruments import (
    InstrumentError,
    Questionnaires,
    default_questionnaires,
    efficacy_group,
    load_questionnaires,
    seq_score,
    sus_grade,
    sus_score,
    ueq_score,
)
from .protocol import build_response, serialize
from .store import FileStore, MemoryStore, StoreError
from .therapy import TherapyScript, build_script, therapy_state

DAILY_GREETING = "Good morning, {name}! How about a short chat? I have new health tips for you."


class UnknownSession(LookupError):
    pass


class UnknownUser(LookupError):
    pass


class UnknownInstrument(LookupError):
    pass


def profile_to_doc(profile: UserProfile) -> dict:
    return {
        "user_id": profile.user_id,
        "name": profile.name,
        "gender": profile.gender,
        "values": sorted(profile.values),
    }


def profile_from_doc(doc: dict) -> UserProfile:
    return UserProfile(
        user_id=str(doc.get("user_id", "")),
        name=str(doc.get("name", "")),
        gender=str(doc.get("gender", "unspecified")),
        values=frozenset(str(v) for v in doc.get("values", [])),
    )


class NotificationHub:
    """Fan-out queues for server-push; one subscriber list per session."""

    def __init__(self):
        self._lock = threading.Lock()
        self._queues: dict[str, list[SimpleQueue]] = {}

    def subscribe(self, session_id: str) -> SimpleQueue:
        q: SimpleQueue = SimpleQueue()
        with self._lock:
            self._queues.setdefault(session_id, []).append(q)
        return q

    def unsubscribe(self, session_id: str, q: SimpleQueue) -> None:
        with self._lock:
            queues = self._queues.get(session_id, [])
            if q in queues:
                queues.remove(q)
            if not queues:
                self._queues.pop(session_id, None)

    def publish(self, session_id: str, data: bytes) -> int:
        with self._lock:
            queues = list(self._queues.get(session_id, []))
        for q in queues:
            q.put(data)
        return len(queues)

    def subscriber_sessions(self) -> list[str]:
        with self._lock:
            return [sid for sid, queues in self._queues.items() if queues]


class Gateway:
    def __init__(
        self,
        flow_set: FlowSet,
        library: ContentLibrary,
        wheel: EmotionWheel,
        questionnaires: Questionnaires,
        store,
        clock=time.time,
        id_factory=lambda: uuid.uuid4().hex,
    ):
        diagnostics = validate_flow_set(flow_set)
        if diagnostics:
            raise FlowLoadError(diagnostics)
        self.flow_set = flow_set
        self.library = library
        self.wheel = wheel
        self.questionnaires = questionnaires
        self.store = store
        self.clock = clock
        self.id_factory = id_factory
        self.script: TherapyScript | None = (
            build_script(flow_set) if "therapy" in flow_set.flows else None
        )
        self.feedback = FeedbackBook(library)
        self.hub = NotificationHub()
        self._registry_lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._profiles: dict[str, UserProfile] = {}
        self._recover(store.load_all())

    def _recover(self, snapshot) -> None:
        """Rebuild all live state from the append-only logs."""
        for user_id, doc in snapshot.profiles.items():
            self._profiles[user_id] = profile_from_doc(doc)
        for doc in snapshot.feedback:
            try:
                self.feedback.record(
                    str(doc.get("item")), bool(doc.get("helpful")), str(doc.get("session_id"))
                )
            except (UnknownItem, NotEligible):
                continue  # content fixture changed since that entry was written
        for sid, record in snapshot.sessions.items():
            header = record.header
            profile = profile_from_doc(header.get("profile", {}))
            events = []
            expected = []
            for entry in record.entries:
                events.append(event_from_doc(entry.get("event")))
                expected.append(
                    LogEntry(
                        event=events[-1],
                        state_after=(str(entry.get("flow")), str(entry.get("state"))),
                        response=str(entry.get("response", "")).encode("utf-8"),
                    )
                )
            same_fixture = header.get("flows_fingerprint") == self.flow_set.fingerprint
            session = replay(
                events,
                self.flow_set,
                self.library,
                self.wheel,
                profile,
                sid,
                expected=expected if same_fixture else None,
            )
            self._sessions[sid] = session
            self._locks[sid] = threading.Lock()

    # -- sessions ------------------------------------------------------------

    def create_session(
        self, user_id: str, name: str | None = None, gender: str | None = None
    ) -> tuple[Session, bytes]:
        if not user_id or not isinstance(user_id, str):
            raise MalformedEvent("user_id is required")
        if gender is not None and gender not in GENDERS:
            raise MalformedEvent(f"gender must be one of {GENDERS}")
        with self._registry_lock:
            profile = self._profiles.get(user_id)
            if profile is None:
                if not name:
                    raise UnknownUser(
                        f"unknown user {user_id!r}; pass a name to register them"
                    )
                profile = UserProfile(
                    user_id=user_id, name=name, gender=gender or "unspecified"
                )
                self._profiles[user_id] = profile
                self.store.save_profile(profile_to_doc(profile))
            else:
                updates = {}
                if name and name != profile.name:
                    updates["name"] = name
                if gender and gender != profile.gender:
                    updates["gender"] = gender
                if updates:
                    profile = replace(profile, **updates)
                    self._profiles[user_id] = profile
                    self.store.save_profile(profile_to_doc(profile))
            session_id = self.id_factory()
            session = new_session(session_id, profile, self.flow_set)
            self.store.create_session(
                {
                    "session_id": session_id,
                    "user_id": user_id,
                    "profile": profile_to_doc(profile),
                    "flows_fingerprint": self.flow_set.fingerprint,
                    "created_at": self.clock(),
                }
            )
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        payload = render_current(session, self.flow_set, self.library, self.wheel)
        return session, serialize(payload)

    def _session_lock(self, session_id: str) -> threading.Lock:
        lock = self._locks.get(session_id)
        if lock is None:
            raise UnknownSession(session_id)
        return lock

    def post_event(self, session_id: str, event: UserEvent) -> tuple[bytes, Session]:
        lock = self._session_lock(session_id)
        with lock:
            session = self._sessions[session_id]
            turn = advance(session, event, self.flow_set, self.library, self.wheel)
            entry = turn.session.event_log[-1]
            # Durability before visibility: a failed append commits nothing.
            self.store.append_event(
                session_id,
                {
                    "seq": len(turn.session.event_log) - 1,
                    "event": event_to_doc(event),
                    "flow": entry.state_after[0],
                    "state": entry.state_after[1],
                    "response": entry.response.decode("utf-8"),
                },
            )
            if turn.session.profile != session.profile:
                self._profiles[turn.session.profile.user_id] = turn.session.profile
                self.store.save_profile(profile_to_doc(turn.session.profile))
            for effect in turn.effects:
                if effect.kind == "feedback":
                    self.feedback.record(effect.item_id, effect.helpful, session_id)
                    self.store.append_feedback(
                        {
                            "session_id": session_id,
                            "item": effect.item_id,
                            "helpful": effect.helpful,
                            "at": event.timestamp,
                        }
                    )
            self._sessions[session_id] = turn.session
            return entry.response, turn.session

    def get_state(self, session_id: str) -> tuple[Session, bytes]:
        lock = self._session_lock(session_id)
        with lock:
            session = self._sessions[session_id]
            if session.event_log:
                return session, session.event_log[-1].response
            payload = render_current(session, self.flow_set, self.library, self.wheel)
            return session, serialize(payload)

    def session_summary(self, session: Session) -> dict:
        flow_id, state_id = session.current
        doc = {
            "session_id": session.session_id,
            "user_id": session.profile.user_id,
            "current": {"flow": flow_id, "state": state_id},
            "events": len(session.event_log),
        }
        if self.script is not None:
            progress = therapy_state(session, self.script)
            doc["therapy"] = {
                "step_index": progress.step_index,
                "completed": progress.completed,
                "declared_emotion": progress.declared_emotion,
                "chosen_value": progress.chosen_value,
            }
        return doc

    # -- instruments ----------------------------------------------------------

    def submit_instrument(self, session_id: str, kind: str, body: dict) -> dict:
        lock = self._session_lock(session_id)
        with lock:
            session = self._sessions[session_id]
        if not isinstance(body, dict):
            raise InstrumentError("request body must be an object")
        if kind == "sus":
            score = sus_score(body.get("answers", []))
            result = {"score": score, "grade": sus_grade(score)}
        elif kind == "ueq":
            result = {"scales": ueq_score(body.get("answers", []), self.questionnaires)}
        elif kind == "seq":
            result = {"means": seq_score(body.get("answers", {}), self.questionnaires)}
        elif kind == "efficacy":
            outcome = efficacy_group(
                body.get("skill", []), body.get("activity_count", 0), self.questionnaires
            )
            result = {"combined": outcome.combined, "group": outcome.group}
        else:
            raise UnknownInstrument(kind)
        self.store.append_instrument(
            {
                "session_id": session_id,
                "user_id": session.profile.user_id,
                "kind": kind,
                "at": self.clock(),
                "answers": body,
                "result": result,
            }
        )
        return result

    # -- push -----------------------------------------------------------------

    def daily_greeting(self, text: str | None = None) -> int:
        """Demo hook for the morning check-in: pushes one notification to
        every connected session. A real deployment would drive this from a
        scheduler."""
        template = text or DAILY_GREETING
        delivered = 0
        for session_id in self.hub.subscriber_sessions():
            session = self._sessions.get(session_id)
            if session is None:
                continue
            body = template.replace("{name}", session.profile.name)
            payload = build_response("default", body=body, speak=(body,), notification=True)
            delivered += self.hub.publish(session_id, serialize(payload))
        return delivered


def build_gateway(config: ServiceConfig, store=None) -> Gateway:
    flow_set = default_flows() if config.flows_path is None else load_flow_set(config.flows_path)
    library = (
        default_library() if config.content_path is None else load_content(config.content_path)
    )
    wheel = default_wheel() if config.taxonomy_path is None else load_taxonomy(config.taxonomy_path)
    questionnaires = (
        default_questionnaires()
        if config.questionnaires_path is None
        else load_questionnaires(config.questionnaires_path)
    )
    if store is None:
        store = FileStore(config.store_path) if config.store_path else MemoryStore()
    return Gateway(flow_set, library, wheel, questionnaires, store)


# --- HTTP layer --------------------------------------------------------------


class CreateSessionBody(BaseModel):
    user_id: str
    name: str | None = None
    gender: str | None = None


def _canonical(data: bytes, status_code: int = 200) -> Response:
    return Response(content=data, media_type="application/json", status_code=status_code)


def create_app(gateway: Gateway, keepalive_seconds: float = 15.0) -> FastAPI:
    app = FastAPI(title="wellbot gateway", version="1.0")
    app.state.gateway = gateway

    def handler(status: int):
        def handle(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse({"error": str(exc)}, status_code=status)

        return handle

    for exc_type in (UnknownSession, UnknownUser, UnknownSection, UnknownItem, UnknownInstrument):
        app.add_exception_handler(exc_type, handler(404))
    for exc_type in (MalformedEvent, InstrumentError, NotEligible):
        app.add_exception_handler(exc_type, handler(400))
    app.add_exception_handler(StoreError, handler(503))

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        session, response = gateway.create_session(body.user_id, body.name, body.gender)
        return {
            "session_id": session.session_id,
            "user": profile_to_doc(session.profile),
            "response": json.loads(response),
        }

    @app.post("/api/sessions/{session_id}/events")
    def post_event(session_id: str, body: dict = Body(...)) -> Response:
        if "timestamp" not in body:
            body = dict(body)
            body["timestamp"] = gateway.clock()
        event = event_from_doc(body)
        response, _ = gateway.post_event(session_id, event)
        return _canonical(response)

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session, response = gateway.get_state(session_id)
        doc = gateway.session_summary(session)
        doc["response"] = json.loads(response)
        return doc

    @app.get("/api/sessions/{session_id}/response")
    def get_response(session_id: str) -> Response:
        _, response = gateway.get_state(session_id)
        return _canonical(response)

    @app.get("/api/content/{section_id}")
    def get_section(section_id: str) -> dict:
        section = gateway.library.get_section(section_id)
        return {
            "section_id": section.section_id,
            "title": section.title,
            "items": [
                {
                    "id": item.item_id,
                    "kind": item.kind,
                    "body": item.body_text,
                    "speech": item.speech_text,
                }
                for item in section.items
            ],
        }

    @app.get("/api/feedback/{item_id}")
    def get_feedback(item_id: str) -> dict:
        gateway.library.get_item(item_id)
        tally = gateway.feedback.tally(item_id)
        return {"item": item_id, "helpful": tally.helpful, "not_helpful": tally.not_helpful}

    @app.post("/api/sessions/{session_id}/instruments/{kind}")
    def submit_instrument(session_id: str, kind: str, body: dict = Body(...)) -> dict:
        return {"kind": kind, "result": gateway.submit_instrument(session_id, kind, body)}

    @app.get("/api/notifications/{session_id}")
    def notifications(session_id: str) -> StreamingResponse:
        gateway._session_lock(session_id)  # 404 for unknown sessions
        queue = gateway.hub.subscribe(session_id)

        def stream() -> Iterator[bytes]:
            try:
                yield b": connected\n\n"
                while True:
                    try:
                        data = queue.get(timeout=keepalive_seconds)
                    except Empty:
                        yield b": keep-alive\n\n"
                        continue
                    yield b"data: " + data + b"\n\n"
            finally:
                gateway.hub.unsubscribe(session_id, queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/api/notifications/daily-greeting")
    def daily_greeting(body: dict = Body(default={})) -> dict:
        text = body.get("text") if isinstance(body, dict) else None
        return {"delivered": gateway.daily_greeting(text)}

    return app
