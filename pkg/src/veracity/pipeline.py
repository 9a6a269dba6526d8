"""End-to-end orchestration: stats, predictions, voting, post-processing,
reports. Every artifact is written atomically and tagged with the config
hash, and nothing here depends on wall-clock time, so a rerun with the
same inputs is byte-identical.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from . import baseline
from .attribute_stats import AttributeKind, build_table, save_table
from .config import RunConfig, config_hash, require_paths
from .corpus import Dataset, Label, gold_labels_by_id, load_dataset, sniff_has_labels
from .ensemble import (
    EnsembleResult,
    PredictionMatrix,
    load_predictions,
    matrix_from_vectors,
    restrict_to,
    vote_all,
    write_ensemble_tsv,
)
from .errors import UsageError
from .evaluation import EvalReport, evaluate
from .fileio import atomic_write_text
from .heuristic import (
    DecisionInput,
    HeuristicDecision,
    decide_inputs,
    prepare_inputs,
    write_decisions_tsv,
)
from .preprocess import UrlExpansionCache, load_cache


@dataclass
class PipelineResult:
    """Everything a pipeline run produced, for callers and tests."""

    ensemble_results: list[EnsembleResult]
    decisions: list[HeuristicDecision]
    pre_report: EvalReport | None
    post_report: EvalReport | None
    output_files: list[Path]
    config_digest: str


def _load_cache_or_empty(cfg: RunConfig) -> UrlExpansionCache:
    if cfg.cache_path is None:
        return UrlExpansionCache()
    return load_cache(cfg.cache_path)


def build_matrix(cfg: RunConfig, train: Dataset, target: Dataset, out_dir: Path, digest: str):
    """External prediction files when configured, else the built-in model."""
    written: list[Path] = []
    if cfg.prediction_paths:
        matrix = load_predictions(cfg.prediction_paths, cfg.prediction_names or None)
        # files may cover a superset of the target split; trim to it
        return restrict_to(matrix, target.ids()), written
    model = baseline.train(train, cfg.clean_policy, cfg.alpha)
    model_path = out_dir / "baseline_model.json"
    baseline.save_model(model, model_path, config_hash=digest)
    written.append(model_path)
    vectors = baseline.predict_dataset(model, target)
    predictions_path = out_dir / "baseline_predictions.tsv"
    baseline.write_predictions(vectors, predictions_path, header_comment=f"config: {digest}")
    written.append(predictions_path)
    return matrix_from_vectors({model.model_name: vectors}), written


def _decided_by_counts(decisions: list[HeuristicDecision]) -> Counter:
    return Counter(decision.decided_by.value for decision in decisions)


def _report_text(
    digest: str,
    n_items: int,
    scheme: str,
    pre: EvalReport | None,
    post: EvalReport | None,
    decisions: list[HeuristicDecision],
) -> str:
    lines = [f"# config: {digest}", f"items: {n_items}", f"ensemble scheme: {scheme}"]
    counts = _decided_by_counts(decisions)
    lines.append(
        "decided_by: "
        + " ".join(f"{key}={counts.get(key, 0)}" for key in ("username_rule", "domain_rule", "ensemble"))
    )
    if pre is None or post is None:
        lines.append("metrics: (target split unlabeled; no evaluation)")
        return "\n".join(lines) + "\n"
    return (
        "\n".join(lines)
        + "\n\n"
        + pre.format_text("ensemble only:")
        + "\n"
        + post.format_text("ensemble + heuristic post-processing:")
    )


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """Run the whole flow described by a config; returns the artifacts.

    The heuristic always consumes soft-voting probabilities; the
    configured scheme governs the standalone ensemble output and its
    "ensemble only" metrics.
    """
    require_paths(cfg, "train", "test")
    digest = config_hash(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    train = load_dataset(cfg.train_path, has_labels=True, delimiter=cfg.delimiter)
    test_labeled = sniff_has_labels(cfg.test_path, cfg.delimiter)
    test = load_dataset(cfg.test_path, test_labeled, delimiter=cfg.delimiter)
    cache = _load_cache_or_empty(cfg)

    username_table = build_table(train, AttributeKind.USERNAME, cache)
    domain_table = build_table(train, AttributeKind.DOMAIN, cache)
    for table, name in ((username_table, "username_stats.tsv"), (domain_table, "domain_stats.tsv")):
        table_path = out_dir / name
        save_table(table, table_path, header_comment=f"config: {digest}")
        written.append(table_path)

    matrix, matrix_files = build_matrix(cfg, train, test, out_dir, digest)
    written.extend(matrix_files)

    ensemble_results = vote_all(matrix, cfg.scheme)
    ensemble_path = out_dir / "ensemble.tsv"
    write_ensemble_tsv(ensemble_results, ensemble_path, header_comment=f"config: {digest}")
    written.append(ensemble_path)

    inputs = prepare_inputs(test, matrix, username_table, domain_table, cache)
    decisions = decide_inputs(inputs, cfg.heuristic)
    decisions_path = out_dir / "decisions.tsv"
    write_decisions_tsv(decisions, decisions_path, header_comment=f"config: {digest}")
    written.append(decisions_path)

    pre_report = post_report = None
    if test_labeled:
        gold_by_id = gold_labels_by_id(test)
        ordered_ids = [result.item_id for result in ensemble_results]
        gold = [gold_by_id[item_id] for item_id in ordered_ids]
        pre_report = evaluate(gold, [result.label for result in ensemble_results])
        post_report = evaluate(gold, [decision.label for decision in decisions])
        report_json = {
            "config_hash": digest,
            "n_items": len(test),
            "scheme": cfg.scheme.value,
            "threshold": cfg.heuristic.threshold,
            "priority": [kind.value for kind in cfg.heuristic.priority],
            "use_threshold": cfg.heuristic.use_threshold,
            "decided_by": dict(_decided_by_counts(decisions)),
            "ensemble_only": pre_report.as_dict(),
            "post_processed": post_report.as_dict(),
        }
        json_path = out_dir / "report.json"
        atomic_write_text(json_path, json.dumps(report_json, indent=2, sort_keys=True) + "\n")
        written.append(json_path)

    report_path = out_dir / "report.txt"
    atomic_write_text(
        report_path,
        _report_text(digest, len(test), cfg.scheme.value, pre_report, post_report, decisions),
    )
    written.append(report_path)

    return PipelineResult(
        ensemble_results=ensemble_results,
        decisions=decisions,
        pre_report=pre_report,
        post_report=post_report,
        output_files=written,
        config_digest=digest,
    )


def ablation_contexts(
    cfg: RunConfig,
) -> tuple[list[DecisionInput], list[Label], list[DecisionInput], list[Label], str]:
    """Load the splits and build decision inputs for the ablation grid.

    Both validation and test must be labeled. External prediction files,
    when configured, must cover the union of the two splits' ids;
    otherwise the baseline is trained once and applied to both. Nothing
    is written to disk here.
    """
    require_paths(cfg, "train", "validation", "test")
    digest = config_hash(cfg)
    train = load_dataset(cfg.train_path, has_labels=True, delimiter=cfg.delimiter)
    cache = _load_cache_or_empty(cfg)
    username_table = build_table(train, AttributeKind.USERNAME, cache)
    domain_table = build_table(train, AttributeKind.DOMAIN, cache)

    external: PredictionMatrix | None = None
    model = None
    if cfg.prediction_paths:
        external = load_predictions(cfg.prediction_paths, cfg.prediction_names or None)
    else:
        model = baseline.train(train, cfg.clean_policy, cfg.alpha)

    contexts = []
    for split_name, path in (("validation", cfg.validation_path), ("test", cfg.test_path)):
        if not sniff_has_labels(path, cfg.delimiter):
            raise UsageError(f"the {split_name} split must be labeled for an ablation run")
        split = load_dataset(path, has_labels=True, delimiter=cfg.delimiter)
        if external is not None:
            matrix = external
        else:
            matrix = matrix_from_vectors(
                {model.model_name: baseline.predict_dataset(model, split)}
            )
        inputs = prepare_inputs(split, matrix, username_table, domain_table, cache)
        gold_by_id = gold_labels_by_id(split)
        gold = [gold_by_id[entry.item_id] for entry in inputs]
        contexts.append((inputs, gold))
    (val_inputs, val_gold), (test_inputs, test_gold) = contexts
    return val_inputs, val_gold, test_inputs, test_gold, digest
