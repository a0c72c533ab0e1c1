import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import make_corpus  # noqa: E402

from convqa import FilterConfig, default_lexicon, generate_dataset, parse_scene_graph


@pytest.fixture(scope="session")
def lex():
    return default_lexicon()


@pytest.fixture(scope="session")
def records50():
    return make_corpus(50)


@pytest.fixture(scope="session")
def graphs50(records50):
    return {r["image_id"]: parse_scene_graph(json.dumps(r)) for r in records50}


@pytest.fixture(scope="session")
def filter_cfg():
    return FilterConfig(min_area_fraction=0.05, min_name_count=0, name_counts=None)


@pytest.fixture(scope="session")
def sets50(graphs50, lex, filter_cfg):
    return generate_dataset(graphs50.values(), lex, filter_cfg)
