"""Multimodal voice-and-touch well-being companion.

A finite-state dialogue engine with authored flows, a structured emotion
self-assessment wheel, a five-step calming exercise, questionnaire scoring,
and an HTTP gateway with durable event logs.
"""

from .content import ContentLibrary, FeedbackBook, default_library, load_content
from .emotions import (
    EmotionNotFound,
    EmotionRef,
    EmotionWheel,
    default_wheel,
    hit_test,
    load_taxonomy,
    lookup_emotion,
    parse_emotion_utterance,
    wheel_layout,
)
from .engine import (
    ReplayDivergence,
    Session,
    Turn,
    UserEvent,
    UserProfile,
    advance,
    new_session,
    render_current,
    replay,
)
from .flows import Diagnostic, FlowLoadError, FlowSet, default_flows, load_flow_set, validate_flow_set
from .instruments import (
    EfficacyResult,
    efficacy_group,
    seq_score,
    sus_grade,
    sus_score,
    ueq_score,
)
from .intents import IntentMatch, IntentRegistry, match, normalize
from .protocol import ResponsePayload, deserialize, serialize
from .therapy import TherapyScript, build_script, start_therapy, therapy_state

__version__ = "0.1.0"

__all__ = [
    "ContentLibrary",
    "FeedbackBook",
    "default_library",
    "load_content",
    "EmotionNotFound",
    "EmotionRef",
    "EmotionWheel",
    "default_wheel",
    "hit_test",
    "load_taxonomy",
    "lookup_emotion",
    "parse_emotion_utterance",
    "wheel_layout",
    "ReplayDivergence",
    "Session",
    "Turn",
    "UserEvent",
    "UserProfile",
    "advance",
    "new_session",
    "render_current",
    "replay",
    "Diagnostic",
    "FlowLoadError",
    "FlowSet",
    "default_flows",
    "load_flow_set",
    "validate_flow_set",
    "EfficacyResult",
    "efficacy_group",
    "seq_score",
    "sus_grade",
    "sus_score",
    "ueq_score",
    "IntentMatch",
    "IntentRegistry",
    "match",
    "normalize",
    "ResponsePayload",
    "deserialize",
    "serialize",
    "TherapyScript",
    "build_script",
    "start_therapy",
    "therapy_state",
    "__version__",
]
