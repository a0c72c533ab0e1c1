"""Command-line entry point: generate, corrupt, split, check, ctm, eval,
serve, lexicon-lint.

Every writing subcommand drops a `<output>.manifest.json` beside its primary
output recording the config, the seed, and sha256 digests of the inputs; the
timestamp lives in its own field so primary outputs stay byte-identical
across reruns.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import checker as checker_mod
from . import ctm as ctm_mod
from . import metrics as metrics_mod
from . import qa_gen
from .errors import ConvqaError
from .lexicon import default_lexicon, lint_lexicon, load_lexicon
from .scene_graph import FilterConfig, iter_scene_graphs, load_frequency_table

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _load_lexicon_arg(path: str | None):
    if path is None:
        path = os.environ.get("CONVQA_LEXICON")
    if path is None:
        return default_lexicon(), "<packaged>"
    return load_lexicon(Path(path).read_bytes()), path


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(out_path: str, subcommand: str, config: dict, inputs: list[str]) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs if Path(p).is_file()},
        "timestamp": time.time(),
    }
    Path(f"{out_path}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_jsonl(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _read_sets(path: str) -> list[qa_gen.ConsistentSet]:
    sets = []
    for line in Path(path).read_text("utf-8").splitlines():
        if line.strip():
            sets.append(qa_gen.ConsistentSet.from_json_dict(json.loads(line)))
    return sets


def _read_graphs(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return {g.image_id: g for g in iter_scene_graphs(fh)}


@click.group()
def cli():
    """Consistent-VQA toolkit."""


@cli.command()
@click.option("--graphs", required=True, type=click.Path(exists=True), help="Scene-graph JSONL.")
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True), default=None)
@click.option("--freq-table", type=click.Path(exists=True), default=None, help="name<TAB>count TSV.")
@click.option("--min-area-fraction", type=float, default=0.05, show_default=True)
@click.option("--min-name-count", type=int, default=2, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def generate(graphs, lexicon_path, freq_table, min_area_fraction, min_name_count, out, jobs, seed):
    """Generate consistent QA sets from scene graphs."""
    lex, lex_name = _load_lexicon_arg(lexicon_path)
    counts = None
    if freq_table is not None:
        with open(freq_table, "r", encoding="utf-8") as fh:
            counts = load_frequency_table(fh)
    cfg = FilterConfig(min_area_fraction, min_name_count, counts)

    with open(graphs, "r", encoding="utf-8") as fh:
        parsed = []
        errors = 0
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                from .scene_graph import parse_scene_graph

                parsed.append(parse_scene_graph(line))
            except ConvqaError as exc:
                errors += 1
                click.echo(f"error: line {lineno}: {exc}", err=True)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_graph = pool.map(lambda g: qa_gen.generate_sets_for_graph(g, lex, cfg), parsed)
        sets = [s for chunk in per_graph for s in chunk]
        sets.sort(key=lambda s: (s.image_id, s.fact.fact_id))
    else:
        sets = qa_gen.generate_dataset(parsed, lex, cfg)

    _write_jsonl(out, (s.to_json_dict() for s in sets))
    _write_manifest(
        out,
        "generate",
        {
            "lexicon": lex_name,
            "min_area_fraction": min_area_fraction,
            "min_name_count": min_name_count,
            "jobs": jobs,
            "seed": seed,
            "format_version": qa_gen.DATASET_FORMAT_VERSION,
            "record_errors": errors,
        },
        [graphs] + ([freq_table] if freq_table else []),
    )
    click.echo(f"wrote {len(sets)} sets to {out} ({errors} bad records skipped)")


@cli.command()
@click.option("--sets", "sets_path", required=True, type=click.Path(exists=True))
@click.option("--graphs", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def corrupt(sets_path, graphs, lexicon_path, seed, out):
    """Synthesize labeled consistent/inconsistent/unrelated pairs."""
    lex, lex_name = _load_lexicon_arg(lexicon_path)
    graph_index = _read_graphs(graphs)
    pairs = []
    for cset in _read_sets(sets_path):
        graph = graph_index.get(cset.image_id)
        if graph is None:
            raise ConvqaError(f"no scene graph for image {cset.image_id}")
        pairs.extend(qa_gen.corrupt(cset, graph, lex, seed))
    _write_jsonl(out, (p.to_json_dict() for p in pairs))
    _write_manifest(out, "corrupt", {"lexicon": lex_name, "seed": seed}, [sets_path, graphs])
    click.echo(f"wrote {len(pairs)} labeled pairs to {out}")


@cli.command()
@click.option("--sets", "sets_path", required=True, type=click.Path(exists=True))
@click.option("--ratios", default="0.68,0.14,0.18", show_default=True, help="train,val,test")
@click.option("--out-prefix", required=True, type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
def split(sets_path, ratios, out_prefix, seed):
    """Split sets into train/val/test by image."""
    try:
        parts = tuple(float(r) for r in ratios.split(","))
        if len(parts) != 3:
            raise ValueError
    except ValueError:
        raise click.UsageError(f"--ratios must be three comma-separated numbers, got {ratios!r}")
    sets = _read_sets(sets_path)
    train, val, test = qa_gen.split_dataset(sets, parts)  # type: ignore[arg-type]
    for name, chunk in (("train", train), ("val", val), ("test", test)):
        path = f"{out_prefix}.{name}.jsonl"
        _write_jsonl(path, (s.to_json_dict() for s in chunk))
    _write_manifest(f"{out_prefix}.train.jsonl", "split", {"ratios": list(parts), "seed": seed}, [sets_path])
    click.echo(f"split {len(sets)} sets into {len(train)}/{len(val)}/{len(test)}")


@cli.command()
@click.option("--pairs", required=True, type=click.Path(exists=True), help="LabeledPair JSONL.")
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True), default=None)
@click.option("--threshold", type=float, default=0.9, show_default=True)
@click.option("--out", required=True, type=click.Path(), help="Verdict JSONL output.")
@click.option("--confusion", type=click.Path(), default=None, help="Confusion-matrix TSV output.")
def check(pairs, lexicon_path, threshold, out, confusion):
    """Classify labeled pairs and report a confusion matrix."""
    lex, lex_name = _load_lexicon_arg(lexicon_path)
    records = [json.loads(line) for line in Path(pairs).read_text("utf-8").splitlines() if line.strip()]
    verdicts = checker_mod.check_labeled_pairs(records, lex, checker_mod.CheckerConfig(threshold))
    _write_jsonl(out, verdicts)
    matrix = checker_mod.confusion_matrix_tsv(verdicts)
    if confusion is not None:
        Path(confusion).write_text(matrix)
    else:
        click.echo(matrix, nl=False)
    _write_manifest(out, "check", {"lexicon": lex_name, "threshold": threshold}, [pairs])


@cli.command()
@click.option("--sets", "sets_path", required=True, type=click.Path(exists=True))
@click.option("--graphs", required=True, type=click.Path(exists=True), help="For the oracle answerer.")
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True), default=None)
@click.option(
    "--answerer",
    type=click.Choice(["oracle", "inverting", "tabular"]),
    default="tabular",
    show_default=True,
)
@click.option("--rounds", type=int, default=3, show_default=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--answer-threshold", type=float, default=0.7, show_default=True)
@click.option("--checker-threshold", type=float, default=0.9, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--eval-sets", "eval_path", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path(), help="AugmentedExample JSONL.")
@click.option("--report", "report_path", type=click.Path(), default=None, help="TrainingReport JSON.")
def ctm(sets_path, graphs, lexicon_path, answerer, rounds, k, answer_threshold, checker_threshold, seed, eval_path, out, report_path):
    """Run the consistency-teacher augmentation loop."""
    lex, lex_name = _load_lexicon_arg(lexicon_path)
    sets = _read_sets(sets_path)
    graph_index = _read_graphs(graphs)
    oracle = ctm_mod.make_oracle_answerer(graph_index, lex)
    if answerer == "oracle":
        agent = oracle
    elif answerer == "inverting":
        agent = ctm_mod.InvertingAnswerer(oracle)
    else:
        agent = ctm_mod.TabularAnswerer.seeded_with_sets(sets)
    cfg = ctm_mod.CtmConfig(
        answer_confidence_threshold=answer_threshold,
        checker=checker_mod.CheckerConfig(checker_threshold),
        k=k,
        rounds=rounds,
        seed=seed,
    )
    eval_sets = _read_sets(eval_path) if eval_path else ()
    examples, report = ctm_mod.run_ctm(sets, agent, cfg, lex, eval_sets)
    _write_jsonl(out, (e.to_json_dict() for e in examples))
    if report_path is not None:
        Path(report_path).write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    _write_manifest(
        out,
        "ctm",
        {
            "lexicon": lex_name,
            "answerer": answerer,
            "rounds": rounds,
            "k": k,
            "answer_threshold": answer_threshold,
            "checker_threshold": checker_threshold,
            "seed": seed,
        },
        [sets_path, graphs] + ([eval_path] if eval_path else []),
    )
    last_stats = report.rounds[-1][0]
    click.echo(f"emitted {len(examples)} augmented examples over {rounds} rounds; last round: {last_stats.to_json_dict()}")


@cli.command("eval")
@click.option("--gold", required=True, type=click.Path(exists=True))
@click.option("--preds", required=True, type=click.Path(exists=True))
@click.option(
    "--missing",
    type=click.Choice(["count_wrong", "error"]),
    default="count_wrong",
    show_default=True,
)
@click.option("--json-out", type=click.Path(), default=None)
def eval_cmd(gold, preds, missing, json_out):
    """Score a predictions file against gold sets."""
    gold_sets = _read_sets(gold)
    predictions = [
        metrics_mod.Prediction.from_json_dict(json.loads(line))
        for line in Path(preds).read_text("utf-8").splitlines()
        if line.strip()
    ]
    report = metrics_mod.evaluate(gold_sets, predictions, metrics_mod.MissingPolicy(missing))
    click.echo(report.render())
    if json_out is not None:
        Path(json_out).write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
        _write_manifest(json_out, "eval", {"missing": missing}, [gold, preds])


@cli.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--verdicts", required=True, type=click.Path())
@click.option("--images", type=click.Path(), default=None)
@click.option("--ui-dir", type=click.Path(), default=None)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--reviewers-required", type=int, default=3, show_default=True)
def serve(dataset, verdicts, images, ui_dir, port, reviewers_required):
    """Run the human-review HTTP service."""
    import uvicorn

    from .review_service import ReviewStore, create_app

    store = ReviewStore(_read_sets(dataset), verdicts, reviewers_required)
    if ui_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(store, images, ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


@cli.command("lexicon-lint")
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True), default=None)
def lexicon_lint(lexicon_path):
    """Report antonym asymmetries in a lexicon file."""
    lex, lex_name = _load_lexicon_arg(lexicon_path)
    warnings = lint_lexicon(lex)
    for warning in warnings:
        click.echo(f"warning: {warning}")
    click.echo(f"{lex_name}: {len(warnings)} warning(s)")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Abort:
        return EXIT_VALIDATION
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return EXIT_VALIDATION
    except ConvqaError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
