import json
import random

import pytest

from wellbot.protocol import (
    Button,
    CallToAction,
    CheckboxData,
    CheckOption,
    DashboardData,
    DecodeError,
    EmotionsData,
    InvariantViolation,
    ResponsePayload,
    SlideBox,
    SlidesData,
    Tile,
    WheelCell,
    build_response,
    deserialize,
    serialize,
    visible_segments,
)

WORDS = ["tea", "walk", "mask", "breath", "ręka", "ψυχή", "день", "🙂", "a b", ""]


def random_text(rng, allow_empty=False):
    n = rng.randint(0 if allow_empty else 1, 4)
    return " ".join(rng.choice(WORDS[:-3]) for _ in range(n)) or ("x" if not allow_empty else "")


def random_payload(rng):
    """Generate an arbitrary valid payload, exercising every template kind
    and both the default and authored speak rules."""
    kind = rng.choice(["slides", "checkboxes", "emotions", "dashboard", "default"])
    buttons = tuple(
        Button(label=random_text(rng), intent=f"intent_{rng.randint(0, 9)}")
        for _ in range(rng.randint(0, 3))
    )
    data = None
    if kind == "slides":
        data = SlidesData(
            boxes=tuple(
                SlideBox(
                    title=random_text(rng) if rng.random() < 0.7 else None,
                    body=random_text(rng),
                )
                for _ in range(rng.randint(1, 4))
            )
        )
    elif kind == "checkboxes":
        data = CheckboxData(
            options=tuple(
                CheckOption(tag=f"t{i}", label=random_text(rng), checked=rng.random() < 0.5)
                for i in range(rng.randint(1, 5))
            ),
            submit_label=random_text(rng),
        )
    elif kind == "emotions":
        data = EmotionsData(
            cells=tuple(
                WheelCell(
                    sector=f"s{i % 8}",
                    intensity=rng.choice(["low", "medium", "high"]),
                    label=random_text(rng),
                    sector_index=i % 8,
                    ring_index=rng.randint(0, 2),
                    angle_start=45.0 * (i % 8),
                    angle_end=45.0 * (i % 8 + 1),
                )
                for i in range(rng.randint(1, 6))
            )
        )
    elif kind == "dashboard":
        data = DashboardData(
            tiles=tuple(
                Tile(tile_id=f"tile{i}", title=random_text(rng), text=random_text(rng))
                for i in range(rng.randint(1, 3))
            ),
            cta=CallToAction(label=random_text(rng), intent="cta_intent")
            if rng.random() < 0.5
            else None,
        )
    header = random_text(rng) if rng.random() < 0.8 else None
    body = random_text(rng) if rng.random() < 0.8 else None
    draft = build_response(
        kind,
        header=header,
        body=body,
        html_frame=f"frame_{rng.randint(0, 3)}" if rng.random() < 0.3 else None,
        buttons=buttons,
        data=data,
        notification=rng.random() < 0.1,
    )
    if rng.random() < 0.5:
        visible = visible_segments(draft)
        speak = tuple(s for s in visible if rng.random() < 0.5)
        draft = build_response(
            kind,
            header=header,
            body=body,
            html_frame=draft.html_frame,
            buttons=buttons,
            data=data,
            speak=speak,
            notification=draft.notification,
        )
    return draft


def test_round_trip_identity_over_random_payloads():
    rng = random.Random(42)
    for _ in range(2000):
        payload = random_payload(rng)
        data = serialize(payload)
        back = deserialize(data)
        assert back == payload


def test_serialization_is_canonical():
    rng = random.Random(99)
    for _ in range(200):
        payload = random_payload(rng)
        assert serialize(payload) == serialize(deserialize(serialize(payload)))
    # key order of the source dict must not leak into the bytes
    a = json.loads(serialize(random_payload(random.Random(1))).decode())
    reordered = dict(reversed(list(a.items())))
    assert (
        json.dumps(reordered, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode()
        == serialize(deserialize(json.dumps(a).encode()))
    )


def test_canonical_bytes_are_utf8_not_ascii_escaped():
    payload = build_response("default", body="dzień dobry 🙂")
    raw = serialize(payload)
    assert "dzień dobry 🙂".encode("utf-8") in raw


def test_default_speak_rule_speaks_all_content():
    payload = build_response(
        "slides",
        header="H",
        body="B",
        data=SlidesData(boxes=(SlideBox(title="T1", body="B1"), SlideBox(title=None, body="B2"))),
    )
    assert payload.speak == ("H", "B", "T1", "B1", "B2")


def test_speak_must_be_subset_of_visible_text():
    with pytest.raises(InvariantViolation):
        build_response("default", body="shown", speak=("never shown",))
    # button labels are visible, so speaking them is legal
    payload = build_response(
        "default", body="b", buttons=(Button("Tap me", "x"),), speak=("Tap me",)
    )
    assert "Tap me" in visible_segments(payload)


def test_template_kind_must_match_data():
    with pytest.raises(InvariantViolation):
        build_response("slides", data=CheckboxData(options=(CheckOption("t", "l"),)))
    with pytest.raises(InvariantViolation):
        build_response("default", data=SlidesData(boxes=(SlideBox(body="x"),)))
    with pytest.raises(InvariantViolation):
        build_response("nonsense")


def test_buttons_must_bind_available_intents():
    with pytest.raises(InvariantViolation):
        build_response(
            "default",
            body="b",
            buttons=(Button("go", "missing"),),
            available_intents={"other"},
        )
    build_response(
        "default", body="b", buttons=(Button("go", "ok"),), available_intents={"ok"}
    )


def test_deserialize_rejects_malformed_documents():
    with pytest.raises(DecodeError):
        deserialize(b"not json at all")
    with pytest.raises(DecodeError):
        deserialize(b"[1,2,3]")
    with pytest.raises(DecodeError):
        deserialize(b"\xff\xfe")
    good = serialize(build_response("default", body="b"))
    doc = json.loads(good)
    doc["schema_version"] = 99
    with pytest.raises(DecodeError):
        deserialize(json.dumps(doc).encode())
    doc = json.loads(good)
    del doc["template"]
    with pytest.raises(DecodeError):
        deserialize(json.dumps(doc).encode())
    doc = json.loads(good)
    doc["speak"] = ["never visible"]
    with pytest.raises(InvariantViolation):
        deserialize(json.dumps(doc).encode())


def test_decode_error_carries_position():
    try:
        deserialize(b'{"bad json": ')
    except DecodeError as exc:
        assert exc.position is not None
    else:
        pytest.fail("expected DecodeError")


def test_notification_flag_round_trips():
    payload = build_response("default", body="morning!", notification=True)
    assert deserialize(serialize(payload)).notification is True
