import math
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wellbot.instruments import (
    InstrumentError,
    InvalidAnswerRange,
    InvalidThresholds,
    MissingDimension,
    Questionnaires,
    UeqItem,
    WrongLength,
    default_questionnaires,
    efficacy_group,
    parse_questionnaires,
    seq_score,
    sus_grade,
    sus_score,
    ueq_score,
)

# Oracle: per-item contribution tables, written independently of the scorer.
# Statement k (1-based odd) worth 0,2.5,5,7.5,10 points for answers 1..5;
# statement k even worth the reverse.
_POS = {1: 0.0, 2: 2.5, 3: 5.0, 4: 7.5, 5: 10.0}
_NEG = {1: 10.0, 2: 7.5, 3: 5.0, 4: 2.5, 5: 0.0}


def sus_oracle(answers):
    points = 0.0
    for position, answer in enumerate(answers, start=1):
        table = _POS if position % 2 == 1 else _NEG
        points += table[answer]
    return points


def test_sus_oracle_self_check():
    assert sus_oracle([5] * 10) == 50.0
    assert sus_oracle([5, 1] * 5) == 100.0
    assert sus_oracle([1, 5] * 5) == 0.0


def test_sus_matches_oracle_on_random_sheets():
    rng = random.Random(881)
    for _ in range(10_000):
        answers = [rng.randint(1, 5) for _ in range(10)]
        assert sus_score(answers) == sus_oracle(answers)


def test_sus_all_threes_is_fifty():
    assert sus_score([3] * 10) == 50.0


def test_sus_extremes():
    assert sus_score([5, 1, 5, 1, 5, 1, 5, 1, 5, 1]) == 100.0
    assert sus_score([1, 5, 1, 5, 1, 5, 1, 5, 1, 5]) == 0.0


@given(st.lists(st.integers(min_value=1, max_value=5), min_size=10, max_size=10))
def test_sus_bounds_and_step(answers):
    score = sus_score(answers)
    assert 0.0 <= score <= 100.0
    # every sheet lands on a 2.5-point grid step
    assert score % 2.5 == 0.0


def test_sus_rejections():
    with pytest.raises(WrongLength):
        sus_score([3] * 9)
    with pytest.raises(WrongLength):
        sus_score([3] * 11)
    with pytest.raises(InvalidAnswerRange) as exc:
        sus_score([3, 3, 6, 3, 3, 3, 3, 3, 3, 3])
    assert exc.value.index == 2
    with pytest.raises(InvalidAnswerRange):
        sus_score([3, 3, 3, 3, 3, 0, 3, 3, 3, 3])
    with pytest.raises(InvalidAnswerRange):
        sus_score([3, 3, 3, 3, 3, True, 3, 3, 3, 3])
    with pytest.raises(InvalidAnswerRange):
        sus_score([3, 3, 3, 3, 3, 3.0, 3, 3, 3, 3])


def test_sus_grade_threshold():
    assert sus_grade(68.0) == "above_average"
    assert sus_grade(79.0) == "above_average"
    assert sus_grade(67.5) == "below_average"
    assert sus_grade(0) == "below_average"
    assert sus_grade(100) == "above_average"
    with pytest.raises(InstrumentError):
        sus_grade(101)
    with pytest.raises(InstrumentError):
        sus_grade(-1)


# --- UEQ ---------------------------------------------------------------------

MIRRORED = {3, 4, 5, 9, 10, 12, 17, 18, 19, 21, 23, 24, 25}


def ueq_oracle(answers, q):
    by_scale = {}
    for item, answer in zip(q.ueq_items, answers):
        signed = answer - 4
        if item.number in MIRRORED:
            signed = -signed
        by_scale.setdefault(item.scale, []).append(signed)
    return {scale: sum(vals) / len(vals) for scale, vals in by_scale.items()}


def test_ueq_fixture_shape(questionnaires):
    counts = Counter(i.scale for i in questionnaires.ueq_items)
    assert counts == {
        "attractiveness": 6,
        "perspicuity": 4,
        "efficiency": 4,
        "dependability": 4,
        "stimulation": 4,
        "novelty": 4,
    }
    assert {i.number for i in questionnaires.ueq_items if i.positive == "left"} == MIRRORED


def test_ueq_all_neutral_is_zero(questionnaires):
    scores = ueq_score([4] * 26, questionnaires)
    assert set(scores) == set(Counter(i.scale for i in questionnaires.ueq_items))
    assert all(v == 0.0 for v in scores.values())


def test_ueq_matches_oracle_on_random_sheets(questionnaires):
    rng = random.Random(42)
    for _ in range(2_000):
        answers = [rng.randint(1, 7) for _ in range(26)]
        got = ueq_score(answers, questionnaires)
        want = ueq_oracle(answers, questionnaires)
        assert set(got) == set(want)
        for scale in want:
            assert math.isclose(got[scale], want[scale])


@given(st.lists(st.integers(min_value=1, max_value=7), min_size=26, max_size=26))
def test_ueq_answer_reflection_negates_scores(answers):
    q = default_questionnaires()
    plain = ueq_score(answers, q)
    mirrored = ueq_score([8 - a for a in answers], q)
    for scale in plain:
        assert math.isclose(plain[scale], -mirrored[scale])


def test_ueq_single_item_direction(questionnaires):
    # item 1 (annoying/enjoyable) is positive-right: a 7 pulls attractiveness up
    answers = [4] * 26
    answers[0] = 7
    assert ueq_score(answers, questionnaires)["attractiveness"] == 0.5
    # item 3 (creative/dull) is positive-left: a 7 pulls novelty down
    answers = [4] * 26
    answers[2] = 7
    assert ueq_score(answers, questionnaires)["novelty"] == -0.75


def test_ueq_bounds(questionnaires):
    best = [7 if i.positive == "right" else 1 for i in questionnaires.ueq_items]
    worst = [1 if i.positive == "right" else 7 for i in questionnaires.ueq_items]
    assert all(v == 3.0 for v in ueq_score(best, questionnaires).values())
    assert all(v == -3.0 for v in ueq_score(worst, questionnaires).values())


def test_ueq_rejections(questionnaires):
    with pytest.raises(WrongLength):
        ueq_score([4] * 25, questionnaires)
    with pytest.raises(InvalidAnswerRange):
        ueq_score([4] * 25 + [8], questionnaires)
    with pytest.raises(InvalidAnswerRange):
        ueq_score([0] + [4] * 25, questionnaires)


# --- session ratings -----------------------------------------------------------


def test_seq_means(questionnaires):
    answers = {
        "depth": [7, 7, 7],
        "fluency": [1, 2, 3],
        "positivity": [4, 4, 4],
        "arousal": [2, 6, 7],
    }
    scores = seq_score(answers, questionnaires)
    assert scores["depth"] == 7.0
    assert scores["fluency"] == 2.0
    assert scores["positivity"] == 4.0
    assert scores["arousal"] == 5.0


def test_seq_extra_keys_ignored(questionnaires):
    answers = {name: [4] * 3 for name in questionnaires.seq_dimensions}
    answers["mood"] = [1]
    scores = seq_score(answers, questionnaires)
    assert set(scores) == set(questionnaires.seq_dimensions)


def test_seq_missing_dimension(questionnaires):
    answers = {name: [4] * 3 for name in questionnaires.seq_dimensions}
    del answers["arousal"]
    with pytest.raises(MissingDimension) as exc:
        seq_score(answers, questionnaires)
    assert exc.value.name == "arousal"


def test_seq_wrong_length_and_range(questionnaires):
    answers = {name: [4] * 3 for name in questionnaires.seq_dimensions}
    answers["depth"] = [4, 4]
    with pytest.raises(WrongLength):
        seq_score(answers, questionnaires)
    answers["depth"] = [4, 4, 9]
    with pytest.raises(InvalidAnswerRange):
        seq_score(answers, questionnaires)


# --- internet efficacy -----------------------------------------------------------


def test_efficacy_combined_formula(questionnaires):
    # skill mean 3 -> 0.5 skill half; 10 activities of cap 20 -> 0.5 activity half
    result = efficacy_group([3] * 5, 10, questionnaires)
    assert result.combined == 0.5
    assert result.group == "medium"


def test_efficacy_extremes(questionnaires):
    bottom = efficacy_group([1] * 5, 0, questionnaires)
    assert bottom.combined == 0.0
    assert bottom.group == "light"
    top = efficacy_group([5] * 5, 20, questionnaires)
    assert top.combined == 1.0
    assert top.group == "heavy"


def test_efficacy_activity_saturates_at_cap(questionnaires):
    at_cap = efficacy_group([3] * 5, 20, questionnaires)
    beyond = efficacy_group([3] * 5, 2_000, questionnaires)
    assert at_cap.combined == beyond.combined == 0.75


def test_efficacy_boundaries_belong_to_higher_group():
    q = parse_questionnaires(make_doc(thresholds=[0.25, 0.75]))
    # skill mean 3 -> 0.5/2 = 0.25 combined with zero activity
    assert efficacy_group([3] * 5, 0, q).group == "medium"
    assert efficacy_group([5] * 5, 10, q).combined == 0.75
    assert efficacy_group([5] * 5, 10, q).group == "heavy"
    just_under = efficacy_group([5] * 5, 9, q)
    assert just_under.combined < 0.75
    assert just_under.group == "medium"


@given(
    st.lists(st.integers(min_value=1, max_value=5), min_size=5, max_size=5),
    st.lists(st.integers(min_value=1, max_value=5), min_size=5, max_size=5),
    st.integers(min_value=0, max_value=40),
    st.integers(min_value=0, max_value=40),
)
def test_efficacy_monotone(skill_a, skill_b, count_a, count_b):
    q = default_questionnaires()
    if all(x <= y for x, y in zip(skill_a, skill_b)) and count_a <= count_b:
        a = efficacy_group(skill_a, count_a, q).combined
        b = efficacy_group(skill_b, count_b, q).combined
        assert a <= b


def test_efficacy_rejections(questionnaires):
    with pytest.raises(WrongLength):
        efficacy_group([3] * 4, 5, questionnaires)
    with pytest.raises(InvalidAnswerRange):
        efficacy_group([3, 3, 3, 3, 6], 5, questionnaires)
    with pytest.raises(InstrumentError):
        efficacy_group([3] * 5, -1, questionnaires)
    with pytest.raises(InstrumentError):
        efficacy_group([3] * 5, True, questionnaires)
    bad = parse_questionnaires(make_doc(thresholds=[0.9, 0.2]))
    with pytest.raises(InvalidThresholds):
        efficacy_group([3] * 5, 5, bad)


# --- fixture parsing ---------------------------------------------------------------


def make_doc(thresholds=None):
    ueq = []
    scales = ["attractiveness"] * 6 + ["perspicuity", "efficiency", "dependability", "stimulation", "novelty"] * 4
    for n in range(1, 27):
        ueq.append(
            {
                "left": f"l{n}",
                "right": f"r{n}",
                "scale": scales[n - 1],
                "positive": "left" if n in MIRRORED else "right",
            }
        )
    return {
        "sus": {"items": [f"statement {n}" for n in range(1, 11)]},
        "ueq": {"items": ueq},
        "seq": {"dimensions": {"depth": ["a"], "fluency": ["b"]}},
        "efficacy": {
            "skill_terms": ["a", "b", "c", "d", "e"],
            "activity_cap": 20,
            "thresholds": thresholds or [0.34, 0.67],
        },
    }


def test_parse_round_trip():
    q = parse_questionnaires(make_doc())
    assert isinstance(q, Questionnaires)
    assert len(q.sus_items) == 10
    assert q.ueq_items[0] == UeqItem(number=1, left="l1", right="r1", scale="attractiveness", positive="right")
    assert q.efficacy_thresholds == (0.34, 0.67)


@pytest.mark.parametrize(
    "breakage, message",
    [
        (lambda d: d["sus"]["items"].pop(), "exactly 10"),
        (lambda d: d["ueq"]["items"].pop(), "exactly 26"),
        (lambda d: d["ueq"]["items"][0].update(positive="middle"), "left or right"),
        (lambda d: d["ueq"]["items"][0].pop("scale"), "needs a scale"),
        (lambda d: d["seq"].update(dimensions={}), "dimensions mapping"),
        (lambda d: d["seq"]["dimensions"].update(depth=[]), "at least one item"),
        (lambda d: d["efficacy"].pop("skill_terms"), "skill_terms"),
        (lambda d: d["efficacy"].update(activity_cap=0), "positive integer"),
        (lambda d: d["efficacy"].update(thresholds=[0.5]), "two numbers"),
    ],
)
def test_parse_rejections(breakage, message):
    doc = make_doc()
    breakage(doc)
    with pytest.raises(InstrumentError, match=message):
        parse_questionnaires(doc)


def test_default_questionnaires_cached():
    assert default_questionnaires() is default_questionnaires()
