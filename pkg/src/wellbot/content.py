"""Information sections, the values vocabulary, and myth-feedback tallies."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING

import yaml

if TYPE_CHECKING:
    from .engine import UserProfile

ITEM_KINDS = ("fact", "myth_correction", "tutorial_step")


class ContentError(ValueError):
    """A content fixture fails validation."""


class UnknownSection(LookupError):
    pass


class UnknownItem(LookupError):
    pass


class NotEligible(ValueError):
    """Feedback asked for an item kind that does not collect it."""


class UnknownValueTag(ValueError):
    pass


@dataclass(frozen=True)
class ContentItem:
    item_id: str
    kind: str
    body_text: str
    speech_text: str | None = None


@dataclass(frozen=True)
class Section:
    section_id: str
    title: str
    items: tuple[ContentItem, ...]


@dataclass(frozen=True)
class ValueOption:
    tag: str
    label: str


class ContentLibrary:
    def __init__(self, sections: dict[str, Section], values: tuple[ValueOption, ...]):
        self.sections = sections
        self.values = values
        self._items = {
            item.item_id: item for section in sections.values() for item in section.items
        }

    def get_section(self, section_id: str) -> Section:
        try:
            return self.sections[section_id]
        except KeyError:
            raise UnknownSection(section_id) from None

    def get_item(self, item_id: str) -> ContentItem:
        try:
            return self._items[item_id]
        except KeyError:
            raise UnknownItem(item_id) from None

    def value_labels(self) -> dict[str, str]:
        return {opt.tag: opt.label for opt in self.values}


def submit_values(
    profile: "UserProfile", chosen: tuple[str, ...], library: ContentLibrary
) -> "UserProfile":
    """Replace the profile's value set; unknown tags are rejected whole."""
    known = {opt.tag for opt in library.values}
    for tag in chosen:
        if tag not in known:
            raise UnknownValueTag(tag)
    return replace(profile, values=frozenset(chosen))


@dataclass
class FeedbackTally:
    helpful: int = 0
    not_helpful: int = 0


class FeedbackBook:
    """Per-item helpful/not-helpful counters for myth corrections.

    Thread-safe: the gateway applies feedback effects from concurrent
    sessions against one shared book.
    """

    def __init__(self, library: ContentLibrary):
        self._library = library
        self._lock = threading.Lock()
        self._tallies: dict[str, FeedbackTally] = {}
        self._entries: list[tuple[str, bool, str]] = []

    def record(self, item_id: str, helpful: bool, session_id: str) -> None:
        item = self._library.get_item(item_id)
        if item.kind != "myth_correction":
            raise NotEligible(item_id)
        with self._lock:
            tally = self._tallies.setdefault(item_id, FeedbackTally())
            if helpful:
                tally.helpful += 1
            else:
                tally.not_helpful += 1
            self._entries.append((item_id, helpful, session_id))

    def tally(self, item_id: str) -> FeedbackTally:
        with self._lock:
            current = self._tallies.get(item_id, FeedbackTally())
            return FeedbackTally(current.helpful, current.not_helpful)

    def total_entries(self) -> int:
        with self._lock:
            return len(self._entries)

    def entries(self) -> list[tuple[str, bool, str]]:
        with self._lock:
            return list(self._entries)


def parse_content(doc: object, source: str = "<content>") -> ContentLibrary:
    if not isinstance(doc, dict):
        raise ContentError(f"{source}: top level must be a mapping")
    sections_doc = doc.get("sections")
    if not isinstance(sections_doc, dict) or not sections_doc:
        raise ContentError(f"{source}: 'sections' mapping is required")
    sections: dict[str, Section] = {}
    seen_items: set[str] = set()
    for section_id, body in sections_doc.items():
        if not isinstance(body, dict):
            raise ContentError(f"{source}: section {section_id!r} must be a mapping")
        title = body.get("title")
        if not isinstance(title, str) or not title:
            raise ContentError(f"{source}: section {section_id!r} needs a title")
        items_doc = body.get("items")
        if not isinstance(items_doc, list) or not items_doc:
            raise ContentError(f"{source}: section {section_id!r} needs items")
        items = []
        for raw in items_doc:
            if not isinstance(raw, dict):
                raise ContentError(f"{source}: items of {section_id!r} must be mappings")
            item_id = raw.get("id")
            kind = raw.get("kind")
            body_text = raw.get("body")
            speech_text = raw.get("speech")
            if not isinstance(item_id, str) or not item_id:
                raise ContentError(f"{source}: item in {section_id!r} missing id")
            if item_id in seen_items:
                raise ContentError(f"{source}: duplicate item id {item_id!r}")
            seen_items.add(item_id)
            if kind not in ITEM_KINDS:
                raise ContentError(f"{source}: item {item_id!r} has unknown kind {kind!r}")
            if not isinstance(body_text, str) or not body_text:
                raise ContentError(f"{source}: item {item_id!r} needs body text")
            if speech_text is not None and not isinstance(speech_text, str):
                raise ContentError(f"{source}: item {item_id!r} speech must be text")
            items.append(
                ContentItem(
                    item_id=item_id, kind=kind, body_text=body_text, speech_text=speech_text
                )
            )
        sections[section_id] = Section(section_id=section_id, title=title, items=tuple(items))

    values_doc = doc.get("values")
    if not isinstance(values_doc, list) or not values_doc:
        raise ContentError(f"{source}: 'values' list is required")
    values = []
    seen_tags: set[str] = set()
    for raw in values_doc:
        if not isinstance(raw, dict):
            raise ContentError(f"{source}: values entries must be mappings")
        tag = raw.get("tag")
        label = raw.get("label")
        if not isinstance(tag, str) or not tag or not isinstance(label, str) or not label:
            raise ContentError(f"{source}: values entries need tag and label")
        if tag in seen_tags:
            raise ContentError(f"{source}: duplicate value tag {tag!r}")
        seen_tags.add(tag)
        values.append(ValueOption(tag=tag, label=label))
    return ContentLibrary(sections=sections, values=tuple(values))


def load_content(path: str | Path) -> ContentLibrary:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return parse_content(doc, source=str(path))


def default_library() -> ContentLibrary:
    text = resources.files("wellbot.data").joinpath("content.yaml").read_text("utf-8")
    return parse_content(yaml.safe_load(text), source="wellbot.data/content.yaml")
