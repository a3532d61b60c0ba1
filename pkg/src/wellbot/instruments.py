"""Questionnaire scoring: SUS, UEQ, per-session ratings, internet efficacy.

The item tables live in data/questionnaires.yaml so the texts and scale
assignments are data, not code. Scoring functions validate hard: wrong
lengths and out-of-range answers raise, naming the offending item.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import yaml


class InstrumentError(ValueError):
    pass


class WrongLength(InstrumentError):
    def __init__(self, expected: int, got: int, instrument: str):
        super().__init__(f"{instrument} expects {expected} answers, got {got}")
        self.expected = expected
        self.got = got


class InvalidAnswerRange(InstrumentError):
    def __init__(self, index: int, value: object, low: int, high: int):
        super().__init__(f"answer {index + 1} is {value!r}, expected an integer {low}..{high}")
        self.index = index


class MissingDimension(InstrumentError):
    def __init__(self, name: str):
        super().__init__(f"missing dimension {name!r}")
        self.name = name


class InvalidThresholds(InstrumentError):
    pass


@dataclass(frozen=True)
class UeqItem:
    number: int  # 1-based position on the questionnaire
    left: str
    right: str
    scale: str
    positive: str  # which side carries the positive adjective


@dataclass(frozen=True)
class Questionnaires:
    sus_items: tuple[str, ...]
    ueq_items: tuple[UeqItem, ...]
    seq_dimensions: dict[str, tuple[str, ...]]
    efficacy_skill_terms: tuple[str, ...]
    efficacy_activity_cap: int
    efficacy_thresholds: tuple[float, float]


def parse_questionnaires(doc: object, source: str = "<questionnaires>") -> Questionnaires:
    if not isinstance(doc, dict):
        raise InstrumentError(f"{source}: top level must be a mapping")
    sus = doc.get("sus", {}).get("items")
    if not isinstance(sus, list) or len(sus) != 10:
        raise InstrumentError(f"{source}: sus.items must list exactly 10 statements")
    ueq_doc = doc.get("ueq", {}).get("items")
    if not isinstance(ueq_doc, list) or len(ueq_doc) != 26:
        raise InstrumentError(f"{source}: ueq.items must list exactly 26 items")
    ueq_items = []
    for i, raw in enumerate(ueq_doc, start=1):
        if not isinstance(raw, dict):
            raise InstrumentError(f"{source}: ueq item {i} must be a mapping")
        positive = raw.get("positive")
        if positive not in ("left", "right"):
            raise InstrumentError(f"{source}: ueq item {i} positive side must be left or right")
        scale = raw.get("scale")
        if not isinstance(scale, str):
            raise InstrumentError(f"{source}: ueq item {i} needs a scale")
        ueq_items.append(
            UeqItem(
                number=i,
                left=str(raw.get("left", "")),
                right=str(raw.get("right", "")),
                scale=scale,
                positive=positive,
            )
        )
    seq_doc = doc.get("seq", {}).get("dimensions")
    if not isinstance(seq_doc, dict) or not seq_doc:
        raise InstrumentError(f"{source}: seq.dimensions mapping is required")
    seq = {
        str(name): tuple(str(p) for p in pairs)
        for name, pairs in seq_doc.items()
        if isinstance(pairs, list) and pairs
    }
    if set(seq) != set(seq_doc):
        raise InstrumentError(f"{source}: every seq dimension needs at least one item")
    eff = doc.get("efficacy", {})
    terms = eff.get("skill_terms")
    if not isinstance(terms, list) or not terms:
        raise InstrumentError(f"{source}: efficacy.skill_terms is required")
    cap = eff.get("activity_cap")
    if not isinstance(cap, int) or cap <= 0:
        raise InstrumentError(f"{source}: efficacy.activity_cap must be a positive integer")
    thresholds = eff.get("thresholds")
    if (
        not isinstance(thresholds, list)
        or len(thresholds) != 2
        or not all(isinstance(t, (int, float)) for t in thresholds)
    ):
        raise InstrumentError(f"{source}: efficacy.thresholds must be two numbers")
    return Questionnaires(
        sus_items=tuple(str(s) for s in sus),
        ueq_items=tuple(ueq_items),
        seq_dimensions=seq,
        efficacy_skill_terms=tuple(str(t) for t in terms),
        efficacy_activity_cap=cap,
        efficacy_thresholds=(float(thresholds[0]), float(thresholds[1])),
    )


def load_questionnaires(path: str | Path) -> Questionnaires:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        return parse_questionnaires(yaml.safe_load(fh), source=str(path))


_DEFAULT: Questionnaires | None = None


def default_questionnaires() -> Questionnaires:
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("wellbot.data").joinpath("questionnaires.yaml").read_text("utf-8")
        _DEFAULT = parse_questionnaires(yaml.safe_load(text), "wellbot.data/questionnaires.yaml")
    return _DEFAULT


def _check_answers(
    answers: Sequence[object], count: int, low: int, high: int, instrument: str
) -> list[int]:
    if len(answers) != count:
        raise WrongLength(count, len(answers), instrument)
    out = []
    for i, a in enumerate(answers):
        # bool is an int subtype but True/False are not valid scale answers
        if not isinstance(a, int) or isinstance(a, bool) or not (low <= a <= high):
            raise InvalidAnswerRange(i, a, low, high)
        out.append(a)
    return out


def sus_score(answers: Sequence[int]) -> float:
    """Classic 0..100 usability score over 10 answers on a 1..5 scale.

    Odd-numbered statements are positive (contribute answer - 1), even ones
    negative (contribute 5 - answer); the sum is stretched by 2.5.
    """
    values = _check_answers(answers, 10, 1, 5, "SUS")
    total = 0
    for i, a in enumerate(values):
        if i % 2 == 0:  # items 1,3,5,7,9
            total += a - 1
        else:
            total += 5 - a
    return total * 2.5


def sus_grade(score: float) -> str:
    """68 or more counts as above the published average."""
    if not 0 <= score <= 100:
        raise InstrumentError(f"SUS score {score!r} outside 0..100")
    return "above_average" if score >= 68 else "below_average"


def ueq_score(
    answers: Sequence[int], definition: Questionnaires | None = None
) -> dict[str, float]:
    """Six scale means in [-3, +3] from 26 answers on a 1..7 scale.

    Each answer maps to a signed value around the neutral 4; items whose
    positive adjective sits on the left count mirrored.
    """
    q = definition or default_questionnaires()
    values = _check_answers(answers, len(q.ueq_items), 1, 7, "UEQ")
    sums: dict[str, list[int]] = {}
    for item, a in zip(q.ueq_items, values):
        v = (a - 4) if item.positive == "right" else (4 - a)
        sums.setdefault(item.scale, []).append(v)
    return {scale: sum(vs) / len(vs) for scale, vs in sums.items()}


def seq_score(
    answers: Mapping[str, Sequence[int]], definition: Questionnaires | None = None
) -> dict[str, float]:
    """Per-dimension means of 1..7 session ratings."""
    q = definition or default_questionnaires()
    out: dict[str, float] = {}
    for name, items in q.seq_dimensions.items():
        if name not in answers:
            raise MissingDimension(name)
        values = _check_answers(answers[name], len(items), 1, 7, f"session rating {name!r}")
        out[name] = sum(values) / len(values)
    return out


@dataclass(frozen=True)
class EfficacyResult:
    combined: float  # in [0, 1]
    group: str  # light | medium | heavy


def efficacy_group(
    skill_answers: Sequence[int],
    activity_count: int,
    definition: Questionnaires | None = None,
) -> EfficacyResult:
    """Blend self-rated internet skill with actual activity into a usage group.

    Skill answers (1..5 per term) normalize to [0,1]; the activity count
    saturates at the configured cap. Both halves weigh equally. Groups split
    at the two thresholds, each boundary belonging to the higher group.
    """
    q = definition or default_questionnaires()
    low, high = q.efficacy_thresholds
    if not (0 < low < high < 1):
        raise InvalidThresholds(f"thresholds must satisfy 0 < {low} < {high} < 1")
    values = _check_answers(skill_answers, len(q.efficacy_skill_terms), 1, 5, "efficacy")
    if not isinstance(activity_count, int) or isinstance(activity_count, bool) or activity_count < 0:
        raise InstrumentError(f"activity count must be a non-negative integer, got {activity_count!r}")
    skill = (sum(values) / len(values) - 1) / 4
    activity = min(activity_count / q.efficacy_activity_cap, 1.0)
    combined = (skill + activity) / 2
    if combined < low:
        group = "light"
    elif combined < high:
        group = "medium"
    else:
        group = "heavy"
    return EfficacyResult(combined=combined, group=group)
