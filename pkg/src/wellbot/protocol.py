"""The multimodal response model and its wire document.

One ResponsePayload describes one turn across both channels: what the screen
shows (template kind plus its data), which suggestion buttons appear, and
which text segments the client should speak. Serialization is canonical JSON
(sorted keys, compact separators, UTF-8) so identical payloads always produce
identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

TEMPLATE_KINDS = ("slides", "checkboxes", "emotions", "dashboard", "default")

# Rich-template kinds and the payload field families they render.
SPEAKABLE_FIELDS = ("header", "body", "titles", "bodies", "options", "tiles")


class InvariantViolation(ValueError):
    """A payload breaks a response-model rule; message names the rule."""


class DecodeError(ValueError):
    """A wire document cannot be decoded; carries a position when known."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at byte {position})")
        self.position = position


@dataclass(frozen=True)
class Button:
    label: str
    intent: str


@dataclass(frozen=True)
class SlideBox:
    body: str
    title: str | None = None


@dataclass(frozen=True)
class CheckOption:
    tag: str
    label: str
    checked: bool = False


@dataclass(frozen=True)
class WheelCell:
    sector: str
    intensity: str
    label: str
    sector_index: int
    ring_index: int
    angle_start: float
    angle_end: float


@dataclass(frozen=True)
class Tile:
    tile_id: str
    title: str
    text: str


@dataclass(frozen=True)
class CallToAction:
    label: str
    intent: str


@dataclass(frozen=True)
class SlidesData:
    boxes: tuple[SlideBox, ...]


@dataclass(frozen=True)
class CheckboxData:
    options: tuple[CheckOption, ...]
    submit_label: str = "Done"


@dataclass(frozen=True)
class EmotionsData:
    cells: tuple[WheelCell, ...]


@dataclass(frozen=True)
class DashboardData:
    tiles: tuple[Tile, ...]
    cta: CallToAction | None = None


TemplateData = SlidesData | CheckboxData | EmotionsData | DashboardData

_DATA_KIND = {
    "slides": SlidesData,
    "checkboxes": CheckboxData,
    "emotions": EmotionsData,
    "dashboard": DashboardData,
}


@dataclass(frozen=True)
class ResponsePayload:
    template: str
    header: str | None = None
    body: str | None = None
    html_frame: str | None = None
    buttons: tuple[Button, ...] = ()
    speak: tuple[str, ...] = ()
    data: TemplateData | None = None
    notification: bool = False


def content_segments(payload: ResponsePayload) -> list[str]:
    """Visible content text in display order (excludes button labels)."""
    segments = [s for s in (payload.header, payload.body) if s]
    data = payload.data
    if isinstance(data, SlidesData):
        for box in data.boxes:
            if box.title:
                segments.append(box.title)
            segments.append(box.body)
    elif isinstance(data, CheckboxData):
        segments.extend(opt.label for opt in data.options)
    elif isinstance(data, DashboardData):
        for tile in data.tiles:
            segments.append(tile.title)
            segments.append(tile.text)
    return segments


def visible_segments(payload: ResponsePayload) -> list[str]:
    """Everything readable on screen, including labels and wheel terms."""
    segments = content_segments(payload)
    data = payload.data
    if isinstance(data, EmotionsData):
        segments.extend(cell.label for cell in data.cells)
    if isinstance(data, DashboardData) and data.cta:
        segments.append(data.cta.label)
    segments.extend(btn.label for btn in payload.buttons)
    return segments


def validate_payload(
    payload: ResponsePayload, available_intents: set[str] | None = None
) -> None:
    """Enforce the response-model invariants; raises InvariantViolation."""
    if payload.template not in TEMPLATE_KINDS:
        raise InvariantViolation(f"unknown template kind {payload.template!r}")
    expected = _DATA_KIND.get(payload.template)
    if expected is None:
        if payload.data is not None:
            raise InvariantViolation("default template carries no template data")
    elif not isinstance(payload.data, expected):
        raise InvariantViolation(
            f"{payload.template} template requires {expected.__name__} data"
        )
    visible = set(visible_segments(payload))
    for segment in payload.speak:
        if segment not in visible:
            raise InvariantViolation(
                f"spoken segment is not part of the visible text: {segment!r}"
            )
    if available_intents is not None:
        for btn in payload.buttons:
            if btn.intent not in available_intents:
                raise InvariantViolation(
                    f"button {btn.label!r} binds unavailable intent {btn.intent!r}"
                )
        if isinstance(payload.data, DashboardData) and payload.data.cta:
            if payload.data.cta.intent not in available_intents:
                raise InvariantViolation(
                    f"dashboard CTA binds unavailable intent {payload.data.cta.intent!r}"
                )


def build_response(
    template: str,
    *,
    header: str | None = None,
    body: str | None = None,
    html_frame: str | None = None,
    buttons: tuple[Button, ...] = (),
    data: TemplateData | None = None,
    speak: tuple[str, ...] | None = None,
    available_intents: set[str] | None = None,
    notification: bool = False,
) -> ResponsePayload:
    """Assemble and validate one turn.

    ``speak=None`` applies the default rule — everything shown is also said —
    by speaking all content segments. An explicit tuple marks an authored
    spoken subset and must stay within the visible text.
    """
    payload = ResponsePayload(
        template=template,
        header=header,
        body=body,
        html_frame=html_frame,
        buttons=buttons,
        speak=(),
        data=data,
        notification=notification,
    )
    if speak is None:
        speak = tuple(content_segments(payload))
    payload = ResponsePayload(
        template=template,
        header=header,
        body=body,
        html_frame=html_frame,
        buttons=buttons,
        speak=speak,
        data=data,
        notification=notification,
    )
    validate_payload(payload, available_intents)
    return payload


# --- wire codec -------------------------------------------------------------


def canonical_json(doc: object) -> bytes:
    """Deterministic JSON bytes: sorted keys, no whitespace, UTF-8."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def to_document(payload: ResponsePayload) -> dict:
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "template": payload.template,
        "header": payload.header,
        "body": payload.body,
        "html_frame": payload.html_frame,
        "buttons": [{"label": b.label, "intent": b.intent} for b in payload.buttons],
        "speak": list(payload.speak),
        "notification": payload.notification,
    }
    data = payload.data
    if isinstance(data, SlidesData):
        doc["template_data"] = {
            "boxes": [{"title": box.title, "body": box.body} for box in data.boxes]
        }
    elif isinstance(data, CheckboxData):
        doc["template_data"] = {
            "options": [
                {"tag": o.tag, "label": o.label, "checked": o.checked} for o in data.options
            ],
            "submit_label": data.submit_label,
        }
    elif isinstance(data, EmotionsData):
        doc["template_data"] = {
            "cells": [
                {
                    "sector": c.sector,
                    "intensity": c.intensity,
                    "label": c.label,
                    "sector_index": c.sector_index,
                    "ring_index": c.ring_index,
                    "angle_start": c.angle_start,
                    "angle_end": c.angle_end,
                }
                for c in data.cells
            ]
        }
    elif isinstance(data, DashboardData):
        doc["template_data"] = {
            "tiles": [{"id": t.tile_id, "title": t.title, "text": t.text} for t in data.tiles],
            "cta": None
            if data.cta is None
            else {"label": data.cta.label, "intent": data.cta.intent},
        }
    else:
        doc["template_data"] = None
    return doc


def serialize(payload: ResponsePayload) -> bytes:
    return canonical_json(to_document(payload))


def _expect(doc: dict, key: str, types: tuple[type, ...], where: str) -> object:
    if key not in doc:
        raise DecodeError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, types):
        raise DecodeError(f"{where}: field {key!r} has wrong type")
    return value


def _opt_str(doc: dict, key: str, where: str) -> str | None:
    value = _expect(doc, key, (str, type(None)), where)
    return value  # type: ignore[return-value]


def from_document(doc: object) -> ResponsePayload:
    if not isinstance(doc, dict):
        raise DecodeError("wire document must be a JSON object")
    version = _expect(doc, "schema_version", (int,), "document")
    if version != SCHEMA_VERSION:
        raise DecodeError(f"unsupported schema_version {version}")
    template = _expect(doc, "template", (str,), "document")
    if template not in TEMPLATE_KINDS:
        raise DecodeError(f"unknown template kind {template!r}")
    buttons_doc = _expect(doc, "buttons", (list,), "document")
    buttons = []
    for i, raw in enumerate(buttons_doc):
        if not isinstance(raw, dict):
            raise DecodeError(f"buttons[{i}] must be an object")
        buttons.append(
            Button(
                label=str(_expect(raw, "label", (str,), f"buttons[{i}]")),
                intent=str(_expect(raw, "intent", (str,), f"buttons[{i}]")),
            )
        )
    speak_doc = _expect(doc, "speak", (list,), "document")
    if not all(isinstance(s, str) for s in speak_doc):
        raise DecodeError("speak must be a list of strings")

    raw_data = doc.get("template_data")
    data: TemplateData | None = None
    if template == "slides":
        if not isinstance(raw_data, dict) or not isinstance(raw_data.get("boxes"), list):
            raise DecodeError("slides template_data needs a boxes list")
        data = SlidesData(
            boxes=tuple(
                SlideBox(
                    title=_opt_str(b, "title", "box"),
                    body=str(_expect(b, "body", (str,), "box")),
                )
                for b in raw_data["boxes"]
            )
        )
    elif template == "checkboxes":
        if not isinstance(raw_data, dict) or not isinstance(raw_data.get("options"), list):
            raise DecodeError("checkboxes template_data needs an options list")
        data = CheckboxData(
            options=tuple(
                CheckOption(
                    tag=str(_expect(o, "tag", (str,), "option")),
                    label=str(_expect(o, "label", (str,), "option")),
                    checked=bool(o.get("checked", False)),
                )
                for o in raw_data["options"]
            ),
            submit_label=str(raw_data.get("submit_label", "Done")),
        )
    elif template == "emotions":
        if not isinstance(raw_data, dict) or not isinstance(raw_data.get("cells"), list):
            raise DecodeError("emotions template_data needs a cells list")
        data = EmotionsData(
            cells=tuple(
                WheelCell(
                    sector=str(_expect(c, "sector", (str,), "cell")),
                    intensity=str(_expect(c, "intensity", (str,), "cell")),
                    label=str(_expect(c, "label", (str,), "cell")),
                    sector_index=int(_expect(c, "sector_index", (int,), "cell")),
                    ring_index=int(_expect(c, "ring_index", (int,), "cell")),
                    angle_start=float(_expect(c, "angle_start", (int, float), "cell")),
                    angle_end=float(_expect(c, "angle_end", (int, float), "cell")),
                )
                for c in raw_data["cells"]
            )
        )
    elif template == "dashboard":
        if not isinstance(raw_data, dict) or not isinstance(raw_data.get("tiles"), list):
            raise DecodeError("dashboard template_data needs a tiles list")
        cta_doc = raw_data.get("cta")
        cta = None
        if cta_doc is not None:
            if not isinstance(cta_doc, dict):
                raise DecodeError("dashboard cta must be an object or null")
            cta = CallToAction(
                label=str(_expect(cta_doc, "label", (str,), "cta")),
                intent=str(_expect(cta_doc, "intent", (str,), "cta")),
            )
        data = DashboardData(
            tiles=tuple(
                Tile(
                    tile_id=str(_expect(t, "id", (str,), "tile")),
                    title=str(_expect(t, "title", (str,), "tile")),
                    text=str(_expect(t, "text", (str,), "tile")),
                )
                for t in raw_data["tiles"]
            ),
            cta=cta,
        )
    elif raw_data is not None:
        raise DecodeError("default template carries no template_data")

    payload = ResponsePayload(
        template=template,
        header=_opt_str(doc, "header", "document"),
        body=_opt_str(doc, "body", "document"),
        html_frame=_opt_str(doc, "html_frame", "document"),
        buttons=tuple(buttons),
        speak=tuple(speak_doc),
        data=data,
        notification=bool(doc.get("notification", False)),
    )
    validate_payload(payload)
    return payload


def deserialize(data: bytes) -> ResponsePayload:
    try:
        doc = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise DecodeError("document is not valid UTF-8", position=exc.start) from exc
    except json.JSONDecodeError as exc:
        raise DecodeError(f"malformed JSON: {exc.msg}", position=exc.pos) from exc
    return from_document(doc)
