import json
from pathlib import Path

import pytest
from corpus import corpus_jsonl, make_corpus

from convqa.cli import main


@pytest.fixture
def workspace(tmp_path):
    graphs = tmp_path / "graphs.jsonl"
    graphs.write_text(corpus_jsonl(make_corpus(12)))
    return tmp_path, graphs


def run(args):
    return main([str(a) for a in args])


def test_generate_happy_path(workspace):
    tmp, graphs = workspace
    out = tmp / "sets.jsonl"
    assert run(["generate", "--graphs", graphs, "--out", out]) == 0
    sets = [json.loads(l) for l in out.read_text().splitlines()]
    assert sets and all(len(s["qas"]) >= 2 for s in sets)
    manifest = json.loads(Path(f"{out}.manifest.json").read_text())
    assert manifest["subcommand"] == "generate"
    assert str(graphs) in manifest["inputs"]


def test_generate_skips_bad_records(workspace, capsys):
    tmp, graphs = workspace
    graphs.write_text(graphs.read_text() + "{broken\n")
    out = tmp / "sets.jsonl"
    assert run(["generate", "--graphs", graphs, "--out", out]) == 0
    assert "bad records skipped" not in capsys.readouterr().err


def test_missing_input_is_validation_error(tmp_path):
    assert run(["generate", "--graphs", tmp_path / "nope.jsonl", "--out", tmp_path / "o"]) == 1


def test_split_and_invalid_ratios(workspace):
    tmp, graphs = workspace
    sets = tmp / "sets.jsonl"
    run(["generate", "--graphs", graphs, "--out", sets])
    assert run(["split", "--sets", sets, "--out-prefix", tmp / "sp"]) == 0
    counts = [len((tmp / f"sp.{name}.jsonl").read_text().splitlines()) for name in ("train", "val", "test")]
    assert sum(counts) == len(sets.read_text().splitlines())
    assert run(["split", "--sets", sets, "--ratios", "0.5,0.2,0.2", "--out-prefix", tmp / "bad"]) == 1


def test_corrupt_and_check(workspace):
    tmp, graphs = workspace
    sets = tmp / "sets.jsonl"
    run(["generate", "--graphs", graphs, "--out", sets])
    pairs = tmp / "pairs.jsonl"
    assert run(["corrupt", "--sets", sets, "--graphs", graphs, "--out", pairs]) == 0
    verdicts = tmp / "verdicts.jsonl"
    confusion = tmp / "confusion.tsv"
    assert run(["check", "--pairs", pairs, "--out", verdicts, "--confusion", confusion]) == 0
    rows = [json.loads(l) for l in verdicts.read_text().splitlines()]
    assert rows and all("gold_label" in r for r in rows)
    assert confusion.read_text().startswith("gold\\pred")


def test_eval_matches_library(workspace, capsys):
    from convqa import ConsistentSet, Prediction, evaluate

    tmp, graphs = workspace
    sets_path = tmp / "sets.jsonl"
    run(["generate", "--graphs", graphs, "--out", sets_path])
    gold = [ConsistentSet.from_json_dict(json.loads(l)) for l in sets_path.read_text().splitlines()]
    preds = []
    for cset in gold:
        for i, qa in enumerate(cset.qas):
            preds.append({"set_id": cset.set_id, "qa_index": i, "answer": qa.answer if i else "wrong"})
    preds_path = tmp / "preds.jsonl"
    preds_path.write_text("\n".join(json.dumps(p) for p in preds))

    assert run(["eval", "--gold", sets_path, "--preds", preds_path, "--json-out", tmp / "report.json"]) == 0
    report = json.loads((tmp / "report.json").read_text())
    expected = evaluate(gold, [Prediction.from_json_dict(p) for p in preds])
    assert report["perf_con"] == pytest.approx(expected.perf_con)
    assert report["top1"] == pytest.approx(expected.top1)
    out = capsys.readouterr().out
    assert "Perf-Con" in out


def test_ctm_subcommand_matches_library(workspace):
    from convqa import CtmConfig, parse_scene_graph, run_ctm
    from convqa.ctm import make_oracle_answerer
    from convqa.lexicon import default_lexicon
    from convqa.qa_gen import ConsistentSet

    tmp, graphs = workspace
    sets_path = tmp / "sets.jsonl"
    run(["generate", "--graphs", graphs, "--out", sets_path])
    out = tmp / "aug.jsonl"
    report_path = tmp / "report.json"
    assert (
        run(
            [
                "ctm",
                "--sets",
                sets_path,
                "--graphs",
                graphs,
                "--answerer",
                "oracle",
                "--rounds",
                2,
                "--k",
                5,
                "--out",
                out,
                "--report",
                report_path,
            ]
        )
        == 0
    )
    emitted = [json.loads(l) for l in out.read_text().splitlines()]

    lex = default_lexicon()
    gold = [ConsistentSet.from_json_dict(json.loads(l)) for l in sets_path.read_text().splitlines()]
    graph_index = {}
    for line in graphs.read_text().splitlines():
        g = parse_scene_graph(line)
        graph_index[g.image_id] = g
    expected, _ = run_ctm(gold, make_oracle_answerer(graph_index, lex), CtmConfig(k=5, rounds=2), lex)
    assert emitted == [e.to_json_dict() for e in expected]
    report = json.loads(report_path.read_text())
    assert len(report["rounds"]) == 2


def test_lexicon_lint(capsys):
    assert run(["lexicon-lint"]) == 0
    assert "0 warning(s)" in capsys.readouterr().out


def primary_outputs(tmp):
    return sorted(p for p in tmp.rglob("*.jsonl") if not p.name.endswith("manifest.json"))


def run_pipeline(tmp, graphs, jobs=1):
    out_dir = tmp
    sets = out_dir / "sets.jsonl"
    run(["generate", "--graphs", graphs, "--out", sets, "--jobs", jobs, "--seed", 7])
    run(["split", "--sets", sets, "--out-prefix", out_dir / "sp", "--seed", 7])
    run(["corrupt", "--sets", sets, "--graphs", graphs, "--seed", 7, "--out", out_dir / "pairs.jsonl"])
    run(
        [
            "ctm",
            "--sets",
            sets,
            "--graphs",
            graphs,
            "--answerer",
            "oracle",
            "--rounds",
            1,
            "--seed",
            7,
            "--out",
            out_dir / "aug.jsonl",
        ]
    )
    return {p.relative_to(out_dir): p.read_bytes() for p in primary_outputs(out_dir)}


def test_pipeline_determinism_across_runs_and_jobs(tmp_path):
    graphs_text = corpus_jsonl(make_corpus(12))
    results = []
    for name, jobs in (("a", 1), ("b", 1), ("c", 4)):
        d = tmp_path / name
        d.mkdir()
        graphs = d / "graphs.jsonl"
        graphs.write_text(graphs_text)
        results.append(run_pipeline(d, graphs, jobs))
    assert results[0] == results[1] == results[2]
