"""Plutchik-style emotion taxonomy: 8 families x 3 intensity rings.

The wheel is pure data loaded from a line-oriented fixture file, so a
localized term table can be swapped in without code changes. Lookup covers
canonical labels and synonyms, utterance parsing scans token runs, and the
layout/hit-test pair defines the radial geometry used by the touch selector.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .intents import Phrase, normalize

SECTORS = (
    "joy",
    "trust",
    "fear",
    "surprise",
    "sadness",
    "disgust",
    "anger",
    "anticipation",
)
INTENSITIES = ("low", "medium", "high")

# Innermost ring carries the strongest terms, matching the classic figure.
RING_BY_INTENSITY = {"high": 0, "medium": 1, "low": 2}
INTENSITY_BY_RING = {ring: name for name, ring in RING_BY_INTENSITY.items()}

SECTOR_SPAN_DEG = 360.0 / len(SECTORS)


class EmotionNotFound(LookupError):
    """The label or synonym names no taxonomy entry."""


class TaxonomyError(ValueError):
    """The taxonomy fixture is malformed; message carries file line numbers."""


@dataclass(frozen=True)
class EmotionRef:
    sector: str
    intensity: str
    canonical_label: str


@dataclass(frozen=True)
class WheelPosition:
    sector_index: int  # 0..7
    ring_index: int  # 0 = innermost
    angle_start: float  # degrees, inclusive
    angle_end: float  # degrees, exclusive


@dataclass(frozen=True)
class EmotionRecord:
    """One stored self-assessment; append-only per session."""

    ref: EmotionRef
    recorded_at: str  # ISO timestamp, informational only
    source: str  # "touch" | "voice"
    session_id: str


class EmotionWheel:
    """Immutable taxonomy: cells, synonym map, and sector ordering."""

    def __init__(
        self,
        sector_order: tuple[str, ...],
        cells: dict[tuple[str, str], EmotionRef],
        synonyms: dict[Phrase, EmotionRef],
    ):
        self.sector_order = sector_order
        self.cells = cells
        self.synonyms = synonyms
        self._sector_index = {sector: i for i, sector in enumerate(sector_order)}
        # Longest phrases first so multi-word synonyms win over their prefixes.
        self._phrase_lengths = sorted({len(p) for p in synonyms}, reverse=True)

    def all_refs(self) -> list[EmotionRef]:
        return [self.cells[(s, i)] for s in self.sector_order for i in INTENSITIES]

    def cell(self, sector: str, intensity: str) -> EmotionRef:
        try:
            return self.cells[(sector, intensity)]
        except KeyError:
            raise EmotionNotFound(f"no cell ({sector}, {intensity})") from None

    def sector_index(self, sector: str) -> int:
        return self._sector_index[sector]


def lookup_emotion(label: str, wheel: EmotionWheel) -> EmotionRef:
    """Resolve a trimmed, case-folded label or synonym to its cell.

    Matching is exact over the whole label — no partial or fuzzy matching.
    """
    phrase = normalize(label)
    ref = wheel.synonyms.get(phrase)
    if ref is None:
        raise EmotionNotFound(f"unknown emotion label {label!r}")
    return ref


def parse_emotion_utterance(text: str, wheel: EmotionWheel) -> list[EmotionRef]:
    """Scan an utterance for taxonomy mentions.

    Tokens are matched against the synonym map longest-match-first, left to
    right; results are deduplicated preserving first occurrence. An empty
    result is valid.
    """
    tokens = normalize(text)
    found: list[EmotionRef] = []
    seen: set[tuple[str, str]] = set()
    i = 0
    while i < len(tokens):
        advanced = False
        for span in wheel._phrase_lengths:
            if i + span > len(tokens):
                continue
            ref = wheel.synonyms.get(tokens[i : i + span])
            if ref is not None:
                key = (ref.sector, ref.intensity)
                if key not in seen:
                    seen.add(key)
                    found.append(ref)
                i += span
                advanced = True
                break
        if not advanced:
            i += 1
    return found


def wheel_layout(ref: EmotionRef, wheel: EmotionWheel) -> WheelPosition:
    """Radial cell geometry: 45-degree sectors, intensity picks the ring."""
    idx = wheel.sector_index(ref.sector)
    return WheelPosition(
        sector_index=idx,
        ring_index=RING_BY_INTENSITY[ref.intensity],
        angle_start=SECTOR_SPAN_DEG * idx,
        angle_end=SECTOR_SPAN_DEG * (idx + 1),
    )


def hit_test(angle: float, ring_index: int, wheel: EmotionWheel) -> EmotionRef:
    """Inverse of wheel_layout for a touch point (angle in [0, 360))."""
    sector = wheel.sector_order[int(angle // SECTOR_SPAN_DEG) % len(wheel.sector_order)]
    return wheel.cell(sector, INTENSITY_BY_RING[ring_index])


def parse_taxonomy(text: str, source: str = "<taxonomy>") -> EmotionWheel:
    """Parse and validate the taxonomy fixture.

    Record kinds, one per line (blank lines and ``#`` comments ignored):

        sectors <8 family names in rendering order>
        cell <sector> <intensity> <canonical label...>
        synonym <phrase...> => <sector> <intensity>

    Raises TaxonomyError naming the offending line on any violation.
    """

    def fail(lineno: int, message: str) -> TaxonomyError:
        return TaxonomyError(f"{source}:{lineno}: {message}")

    sector_order: tuple[str, ...] | None = None
    cells: dict[tuple[str, str], EmotionRef] = {}
    labels: dict[str, tuple[str, str]] = {}
    synonym_lines: list[tuple[int, Phrase, str, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        if kind == "sectors":
            if sector_order is not None:
                raise fail(lineno, "duplicate 'sectors' record")
            names = tuple(rest.split())
            if sorted(names) != sorted(SECTORS):
                raise fail(lineno, f"sector list must be a permutation of {SECTORS}")
            sector_order = names
        elif kind == "cell":
            parts = rest.split()
            if len(parts) < 3:
                raise fail(lineno, "cell needs: <sector> <intensity> <label>")
            sector, intensity, label = parts[0], parts[1], " ".join(parts[2:])
            if sector not in SECTORS:
                raise fail(lineno, f"unknown sector {sector!r}")
            if intensity not in INTENSITIES:
                raise fail(lineno, f"unknown intensity {intensity!r}")
            if (sector, intensity) in cells:
                raise fail(lineno, f"duplicate cell ({sector}, {intensity})")
            if label in labels:
                raise fail(lineno, f"label {label!r} already used by another cell")
            cells[(sector, intensity)] = EmotionRef(sector, intensity, label)
            labels[label] = (sector, intensity)
        elif kind == "synonym":
            phrase_part, sep, target = rest.partition("=>")
            if not sep:
                raise fail(lineno, "synonym needs: <phrase> => <sector> <intensity>")
            phrase = normalize(phrase_part)
            if not phrase:
                raise fail(lineno, "synonym phrase is empty after normalization")
            target_parts = target.split()
            if len(target_parts) != 2:
                raise fail(lineno, "synonym target needs: <sector> <intensity>")
            synonym_lines.append((lineno, phrase, target_parts[0], target_parts[1]))
        else:
            raise fail(lineno, f"unknown record kind {kind!r}")

    if sector_order is None:
        raise fail(0, "missing 'sectors' record")
    missing = [
        (s, i) for s in SECTORS for i in INTENSITIES if (s, i) not in cells
    ]
    if missing:
        raise fail(0, f"missing cells: {missing}")

    synonyms: dict[Phrase, EmotionRef] = {}
    for (sector, intensity), ref in cells.items():
        synonyms[normalize(ref.canonical_label)] = ref
    for lineno, phrase, sector, intensity in synonym_lines:
        if (sector, intensity) not in cells:
            raise fail(lineno, f"synonym target names no cell ({sector}, {intensity})")
        ref = cells[(sector, intensity)]
        existing = synonyms.get(phrase)
        if existing is not None and existing != ref:
            raise fail(
                lineno,
                f"phrase {' '.join(phrase)!r} already maps to {existing.canonical_label!r}",
            )
        synonyms[phrase] = ref

    return EmotionWheel(sector_order, cells, synonyms)


def load_taxonomy(path: str) -> EmotionWheel:
    with open(path, encoding="utf-8") as fh:
        return parse_taxonomy(fh.read(), source=path)


_default_wheel: EmotionWheel | None = None


def default_wheel() -> EmotionWheel:
    """The packaged English taxonomy, loaded once."""
    global _default_wheel
    if _default_wheel is None:
        text = resources.files("wellbot.data").joinpath("emotions.txt").read_text("utf-8")
        _default_wheel = parse_taxonomy(text, source="wellbot/data/emotions.txt")
    return _default_wheel
