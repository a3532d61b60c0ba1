"""Keyword intent matching.

A deliberately small replacement for a hosted NLU service: intents are sets
of author-written phrases, and an utterance matches an intent when one of its
phrases occurs as a contiguous token run inside the normalized utterance.
Intents are either global (available in every dialogue state) or local to one
state; local intents always beat global ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Phrase = tuple[str, ...]


class RegistryError(ValueError):
    """Raised when intent definitions violate registry invariants."""


def normalize(text: str) -> Phrase:
    """Case-fold, drop punctuation, and split into tokens.

    Every output token consists only of letters and digits, so "Main Menu!"
    becomes ("main", "menu") and "don't" becomes ("dont",).
    """
    cleaned = "".join(ch for ch in text.casefold() if ch.isalnum() or ch.isspace())
    return tuple(cleaned.split())


def contains_phrase(tokens: Phrase, phrase: Phrase) -> bool:
    """True when phrase occurs as a contiguous run inside tokens."""
    if not phrase or len(phrase) > len(tokens):
        return False
    span = len(phrase)
    return any(tokens[i : i + span] == phrase for i in range(len(tokens) - span + 1))


@dataclass(frozen=True)
class IntentDef:
    """One intent: an id, its trigger phrases, and an optional display label.

    ``state_id`` is None for global intents, otherwise the owning state.
    Phrases are stored pre-normalized.
    """

    intent_id: str
    phrases: tuple[Phrase, ...]
    label: str | None = None
    state_id: str | None = None

    @property
    def is_global(self) -> bool:
        return self.state_id is None


@dataclass(frozen=True)
class IntentMatch:
    intent_id: str
    matched_phrase: Phrase
    score: int  # phrase length in tokens, always >= 1


@dataclass
class IntentRegistry:
    """All intents of a flow set, indexed by scope."""

    global_intents: dict[str, IntentDef] = field(default_factory=dict)
    local_intents: dict[str, dict[str, IntentDef]] = field(default_factory=dict)

    def add(self, intent: IntentDef) -> None:
        scope = (
            self.global_intents
            if intent.is_global
            else self.local_intents.setdefault(intent.state_id, {})
        )
        if intent.intent_id in scope:
            raise RegistryError(
                f"intent {intent.intent_id!r} defined twice in the same scope"
            )
        scope[intent.intent_id] = intent

    def candidates(self, state_id: str | None) -> list[IntentDef]:
        """State-local intents of ``state_id`` plus all global intents."""
        local = list(self.local_intents.get(state_id, {}).values()) if state_id else []
        return local + list(self.global_intents.values())

    def lookup(self, intent_id: str, state_id: str | None) -> IntentDef | None:
        local = self.local_intents.get(state_id, {}) if state_id else {}
        return local.get(intent_id) or self.global_intents.get(intent_id)

    def validate(self) -> list[str]:
        """Check registry invariants; returns problem descriptions."""
        problems: list[str] = []
        scopes: list[tuple[str, dict[str, IntentDef]]] = [("global", self.global_intents)]
        scopes += [(f"state {sid!r}", loc) for sid, loc in self.local_intents.items()]
        for scope_name, intents in scopes:
            seen: dict[Phrase, str] = {}
            for intent in intents.values():
                if not intent.phrases:
                    problems.append(
                        f"intent {intent.intent_id!r} ({scope_name}) has no phrases"
                    )
                for phrase in intent.phrases:
                    if not phrase:
                        problems.append(
                            f"intent {intent.intent_id!r} ({scope_name}) has an empty phrase"
                        )
                        continue
                    if phrase in seen and seen[phrase] != intent.intent_id:
                        problems.append(
                            f"phrase {' '.join(phrase)!r} appears in both "
                            f"{seen[phrase]!r} and {intent.intent_id!r} ({scope_name})"
                        )
                    seen.setdefault(phrase, intent.intent_id)
        return problems


def match(utterance: str, state_id: str | None, registry: IntentRegistry) -> IntentMatch | None:
    """Match an utterance against the candidate intents of a state.

    Selection order: state-local intents beat global ones; among the same
    scope the longest matched phrase wins; remaining ties break on the
    lexicographically smallest intent id, then smallest phrase. Returns None
    when nothing matches — callers turn that into a fallback prompt.
    """
    tokens = normalize(utterance)
    if not tokens:
        return None
    best: tuple[int, int, str, Phrase] | None = None
    for intent in registry.candidates(state_id):
        local_rank = 0 if intent.is_global else 1
        for phrase in intent.phrases:
            if not contains_phrase(tokens, phrase):
                continue
            # Sort key: higher locality and score win, then smaller ids/phrases.
            key = (local_rank, len(phrase), intent.intent_id, phrase)
            if best is None:
                best = key
            elif (key[0], key[1]) > (best[0], best[1]):
                best = key
            elif (key[0], key[1]) == (best[0], best[1]) and (key[2], key[3]) < (best[2], best[3]):
                best = key
    if best is None:
        return None
    return IntentMatch(intent_id=best[2], matched_phrase=best[3], score=best[1])
