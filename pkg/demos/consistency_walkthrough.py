"""Walkthrough: one scene graph, end to end.

Builds a tiny scene graph by hand, generates its consistent QA sets, scores a
deliberately sloppy answerer, and runs one teacher round to show which
entailed questions get admitted as training data. Run with:

    python3 demos/consistency_walkthrough.py
"""

from convqa import (
    BoundingBox,
    CtmConfig,
    FilterConfig,
    ObjectNode,
    Relation,
    SceneGraph,
    TabularAnswerer,
    ctm_round,
    default_lexicon,
    evaluate,
    extract_facts,
    generate_set,
)
from convqa.metrics import Prediction

lex = default_lexicon()

graph = SceneGraph(
    image_id="demo0",
    width=640,
    height=480,
    objects=(
        ObjectNode("o1", "cat", ("black",), BoundingBox(10, 10, 300, 300)),
        ObjectNode("o2", "table", ("large",), BoundingBox(0, 200, 600, 280)),
    ),
    relations=(Relation("o1", "on", "o2"),),
)

sets = [
    cset
    for fact in extract_facts(graph, FilterConfig(0.05, 0, None))
    if (cset := generate_set(fact, lex)) is not None
]

print(f"{len(sets)} consistent sets from one graph:\n")
for cset in sets:
    for qa in cset.qas:
        print(f"  {qa.question:40s} {qa.answer}")
    print()

# A learner that memorized only the affirmative questions. It is right on
# everything it knows, but the consistency metrics punish the gaps.
learner = TabularAnswerer()
for cset in sets:
    qa = cset.qas[0]
    learner.learn(qa.question, qa.answer, cset.image_id)

preds = []
for cset in sets:
    for i, qa in enumerate(cset.qas):
        ans = learner.answer(qa.question, cset.image_id)
        preds.append(Prediction(cset.set_id, i, ans.text, ans.confidence))

report = evaluate(sets, preds)
print(report.render())

# One teacher round: entailed questions the learner already answers with
# confidence pass the consistency gate and come back as training examples.
examples, stats = ctm_round(sets, learner, CtmConfig(k=5), lex)
print(f"\nteacher round: {stats.emitted} admitted, "
      f"{stats.low_confidence} below the confidence gate, "
      f"{stats.inconsistent} inconsistent")
for ex in examples[:5]:
    print(f"  admitted: {ex.question:40s} {ex.answer}")
