import json

import pytest
from factcheck import check_qa

from convqa import (
    Fact,
    FactKind,
    Label,
    QaKind,
    corrupt,
    generate_set,
    parse_scene_graph,
    split_dataset,
)
from convqa.errors import InvalidRatios
from convqa.qa_gen import generate_from_jsonl


def attribute_fact(subject="cup", attr="white", image_id="img0"):
    return Fact(image_id, FactKind.ATTRIBUTE, subject=subject, predicate=attr)


def test_attribute_set_matches_running_example(lex):
    cset = generate_set(attribute_fact(), lex)
    assert [(qa.question, qa.answer) for qa in cset.qas] == [
        ("is the cup white?", "yes"),
        ("is the cup black?", "no"),
        ("what color is the cup?", "white"),
    ]
    assert all(qa.source_fact_id == cset.fact.fact_id for qa in cset.qas)


def test_attribute_without_lexicon_entries_is_absent(lex):
    assert generate_set(attribute_fact(attr="delicious"), lex) is None


def test_existence_fact_alone_is_absent(lex):
    assert generate_set(Fact("img0", FactKind.EXISTENCE, subject="cup"), lex) is None


def test_relation_set(lex):
    fact = Fact("img0", FactKind.RELATION, subject="man", predicate="on", object="court")
    cset = generate_set(fact, lex)
    questions = {qa.question: qa.answer for qa in cset.qas}
    assert questions["is the man on the court?"] == "yes"
    assert questions["is the man under the court?"] == "no"
    assert questions["what is on the court?"] == "man"


def test_no_duplicate_questions_within_sets(sets50):
    for cset in sets50:
        questions = [qa.question for qa in cset.qas]
        assert len(questions) == len(set(questions))
        assert len(questions) >= 2


def test_generated_qas_pass_brute_force_checker(records50, sets50):
    by_image = {r["image_id"]: r for r in records50}
    assert len(sets50) > 50
    for cset in sets50:
        for qa in cset.qas:
            assert check_qa(by_image[cset.image_id], qa.question, qa.answer), (
                cset.image_id,
                qa.question,
                qa.answer,
            )


def test_generate_dataset_order_and_determinism(graphs50, sets50, lex, filter_cfg):
    from convqa import generate_dataset

    again = generate_dataset(graphs50.values(), lex, filter_cfg)
    assert [s.to_json_dict() for s in again] == [s.to_json_dict() for s in sets50]
    keys = [(s.image_id, s.fact.fact_id) for s in sets50]
    assert keys == sorted(keys)


def test_generate_from_jsonl_error_channel(records50, lex, filter_cfg):
    lines = [json.dumps(records50[0]), "{not json", json.dumps(records50[1])]
    errors = []
    sets = generate_from_jsonl(lines, lex, filter_cfg, on_error=lambda n, e: errors.append(n))
    assert errors == [2]
    assert {s.image_id for s in sets} == {records50[0]["image_id"], records50[1]["image_id"]}


@pytest.fixture
def cup_graph():
    return parse_scene_graph(
        json.dumps(
            {
                "image_id": "img0",
                "width": 640,
                "height": 480,
                "objects": [
                    {"object_id": "o1", "name": "cup", "attributes": ["white"], "x": 0, "y": 0, "w": 200, "h": 200},
                    {"object_id": "o2", "name": "table", "attributes": [], "x": 0, "y": 0, "w": 300, "h": 300},
                ],
                "relations": [],
            }
        )
    )


def test_corrupt_labels(lex, cup_graph):
    cset = generate_set(attribute_fact(), lex)
    pairs = corrupt(cset, cup_graph, lex, seed=1)
    by_label = {}
    for p in pairs:
        by_label.setdefault(p.label, []).append(p)

    flipped = [p for p in by_label[Label.INCONSISTENT] if p.candidate.question == "is the cup white?"]
    assert flipped and all(p.candidate.answer == "no" for p in flipped)
    assert all("the table" in p.candidate.question for p in by_label[Label.UNRELATED])
    # Consistent pairs are verbatim members of the set.
    set_qas = {(qa.question, qa.answer) for qa in cset.qas}
    for p in by_label[Label.CONSISTENT]:
        assert (p.candidate.question, p.candidate.answer) in set_qas
        assert p.candidate.question != p.source.question


def test_corrupt_single_object_graph_omits_unrelated(lex):
    g = parse_scene_graph(
        json.dumps(
            {
                "image_id": "img0",
                "width": 640,
                "height": 480,
                "objects": [
                    {"object_id": "o1", "name": "cup", "attributes": ["white"], "x": 0, "y": 0, "w": 200, "h": 200}
                ],
                "relations": [],
            }
        )
    )
    pairs = corrupt(generate_set(attribute_fact(), lex), g, lex, seed=1)
    labels = {p.label for p in pairs}
    assert Label.UNRELATED not in labels
    assert {Label.CONSISTENT, Label.INCONSISTENT} <= labels


def test_corrupt_deterministic(lex, cup_graph):
    cset = generate_set(attribute_fact(), lex)
    a = [p.to_json_dict() for p in corrupt(cset, cup_graph, lex, seed=42)]
    b = [p.to_json_dict() for p in corrupt(cset, cup_graph, lex, seed=42)]
    assert a == b


def test_corrupt_consistent_pairs_pass_brute_force(records50, graphs50, sets50, lex):
    by_image = {r["image_id"]: r for r in records50}
    for cset in sets50[:40]:
        for pair in corrupt(cset, graphs50[cset.image_id], lex, seed=0):
            if pair.label is Label.CONSISTENT:
                assert check_qa(by_image[cset.image_id], pair.candidate.question, pair.candidate.answer)


def test_split_ratios(sets50):
    # ~100 sets over 50 images; partition by image with no leakage.
    train, val, test = split_dataset(sets50, (0.68, 0.14, 0.18))
    images = lambda chunk: {s.image_id for s in chunk}
    assert not (images(train) & images(val))
    assert not (images(train) & images(test))
    assert not (images(val) & images(test))
    n_images = len({s.image_id for s in sets50})
    assert abs(len(images(train)) - 0.68 * n_images) <= 0.25 * n_images
    assert len(train) + len(val) + len(test) == len(sets50)


def test_split_all_train(sets50):
    train, val, test = split_dataset(sets50, (1.0, 0.0, 0.0))
    assert len(train) == len(sets50) and not val and not test


def test_split_invalid_ratios(sets50):
    with pytest.raises(InvalidRatios):
        split_dataset(sets50, (0.5, 0.2, 0.2))


def test_split_deterministic(sets50):
    a = split_dataset(sets50, (0.68, 0.14, 0.18))
    b = split_dataset(list(reversed(sets50)), (0.68, 0.14, 0.18))
    assert {s.set_id for s in a[0]} == {s.set_id for s in b[0]}


def test_yesno_answers_are_yes_or_no(sets50):
    for cset in sets50:
        for qa in cset.qas:
            if qa.kind is QaKind.YESNO:
                assert qa.answer in ("yes", "no")
            assert qa.question.endswith("?")
