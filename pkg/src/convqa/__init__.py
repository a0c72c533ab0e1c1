"""Consistent-VQA toolkit: QA generation from scene graphs, consistency
metrics, and the consistency-teacher augmentation loop."""

from .checker import CheckerConfig, Verdict, classify, gated_classify
from .ctm import (
    Answer,
    AugmentedExample,
    CtmConfig,
    InvertingAnswerer,
    OracleAnswerer,
    TabularAnswerer,
    ctm_round,
    make_oracle_answerer,
    run_ctm,
)
from .entailment import EntailedQuestion, RuleBasedGenerator, generate_entailed
from .lexicon import Lexicon, default_lexicon, load_lexicon, surface_forms
from .metrics import MetricsReport, MissingPolicy, Prediction, compare_reports, evaluate, normalize_answer
from .qa_gen import (
    ConsistentSet,
    Label,
    LabeledPair,
    QAPair,
    QaKind,
    corrupt,
    generate_dataset,
    generate_set,
    split_dataset,
)
from .scene_graph import (
    BoundingBox,
    Fact,
    FactKind,
    FilterConfig,
    ObjectNode,
    Relation,
    SceneGraph,
    extract_facts,
    filter_salient,
    parse_scene_graph,
)

__version__ = "0.1.0"
