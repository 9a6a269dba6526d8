"""Command-line entry point.

Subcommands cover each stage (stats, train-baseline, predict, ensemble,
postprocess, evaluate) plus the orchestrated `pipeline` and `ablate`
runs and the clearly separated, network-using `expand-urls` cache
builder. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

from . import baseline, urlexpand
from .attribute_stats import AttributeKind, build_table, load_table, save_table
from .config import RunConfig, load_config
from .corpus import Label, gold_labels_by_id, load_dataset, sniff_has_labels, summarize
from .ensemble import VotingScheme, load_predictions, vote_all, write_ensemble_tsv
from .errors import BadRecord, DataError, PipelineError, UsageError
from .evaluation import (
    DEFAULT_THRESHOLD_GRID,
    ablation_to_json,
    evaluate,
    format_ablation_text,
    run_ablation,
    tune_threshold,
)
from .fileio import atomic_write_text, data_lines
from .heuristic import DEFAULT_PRIORITY, HeuristicConfig, decide_batch, write_decisions_tsv
from .pipeline import ablation_contexts, run_pipeline
from .preprocess import UrlExpansionCache, extract_attributes, load_cache


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise UsageError(message)


def _require_file(path: Path | str | None, what: str) -> Path:
    if path is None:
        raise UsageError(f"missing required {what} path")
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{what} file not found: {path}")
    return path


def _args_digest(*parts: object) -> str:
    return hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).hexdigest()[:16]


def _load_cache_arg(args) -> UrlExpansionCache:
    if getattr(args, "cache", None) is None:
        return UrlExpansionCache()
    return load_cache(_require_file(args.cache, "cache"))


def _parse_priority_arg(value: str) -> tuple[AttributeKind, ...]:
    names = [part.strip().lower() for part in value.split(",") if part.strip()]
    try:
        return tuple(AttributeKind(name) for name in names)
    except ValueError:
        raise UsageError(f"--priority takes names from username/domain, got {value!r}") from None


def _heuristic_from_args(args, base: HeuristicConfig | None = None) -> HeuristicConfig:
    cfg = base or HeuristicConfig()
    threshold = cfg.threshold if args.threshold is None else args.threshold
    priority = cfg.priority if args.priority is None else _parse_priority_arg(args.priority)
    use_threshold = cfg.use_threshold
    if args.no_threshold:
        use_threshold = False
    try:
        return HeuristicConfig(threshold, priority, use_threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_heuristic_flags(sub) -> None:
    sub.add_argument("--threshold", type=float, default=None, help="override rule threshold")
    sub.add_argument(
        "--priority",
        default=None,
        help="attribute priority order, e.g. 'username,domain' or 'domain'",
    )
    sub.add_argument(
        "--no-threshold",
        action="store_true",
        help="drop the threshold conjunct; attribute majority alone decides",
    )


def cmd_stats(args) -> int:
    train_path = _require_file(args.train, "training data")
    cache = _load_cache_arg(args)
    delimiter = "," if args.csv else "\t"
    dataset = load_dataset(train_path, has_labels=True, delimiter=delimiter)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = _args_digest("stats", train_path.name, args.cache, args.dedup_per_item)
    counts = {}
    for kind, name in (
        (AttributeKind.USERNAME, "username_stats.tsv"),
        (AttributeKind.DOMAIN, "domain_stats.tsv"),
    ):
        table = build_table(dataset, kind, cache, per_item_dedup=args.dedup_per_item)
        save_table(table, out_dir / name, header_comment=f"config: {digest}")
        counts[kind] = len(table)
    summary = summarize(dataset, cache)
    print(f"items: {summary.item_count}")
    print(f"unique usernames: {counts[AttributeKind.USERNAME]}")
    print(f"unique domains: {counts[AttributeKind.DOMAIN]}")
    if summary.real_fraction is not None:
        print(f"real fraction: {summary.real_fraction:.4f}")
        print(f"fake fraction: {summary.fake_fraction:.4f}")
    if args.summary_json:
        atomic_write_text(
            Path(args.summary_json),
            json.dumps(summary.as_dict(), indent=2, sort_keys=True) + "\n",
        )
    return 0


def cmd_train_baseline(args) -> int:
    train_path = _require_file(args.train, "training data")
    dataset = load_dataset(train_path, has_labels=True)
    model = baseline.train(dataset, alpha=args.alpha, model_name=args.name)
    baseline.save_model(
        model, args.out, config_hash=_args_digest("train", train_path.name, args.alpha, args.name)
    )
    print(f"trained {model.model_name}: vocabulary {len(model.vocabulary)} tokens")
    return 0


def cmd_predict(args) -> int:
    model = baseline.load_model(_require_file(args.model, "model"))
    data_path = _require_file(args.data, "data")
    dataset = load_dataset(data_path, sniff_has_labels(data_path))
    vectors = baseline.predict_dataset(model, dataset)
    baseline.write_predictions(
        vectors, args.out, header_comment=f"config: {_args_digest('predict', data_path.name, args.model)}"
    )
    print(f"wrote {len(vectors)} predictions to {args.out}")
    return 0


def cmd_ensemble(args) -> int:
    for pred in args.predictions:
        _require_file(pred, "prediction")
    names = [part.strip() for part in args.names.split(",")] if args.names else None
    matrix = load_predictions(args.predictions, names)
    results = vote_all(matrix, VotingScheme(args.scheme))
    digest = _args_digest("ensemble", args.scheme, *(Path(p).name for p in args.predictions))
    write_ensemble_tsv(results, args.out, header_comment=f"config: {digest}")
    print(f"wrote {len(results)} {args.scheme}-voted results to {args.out}")
    return 0


def cmd_postprocess(args) -> int:
    data_path = _require_file(args.data, "data")
    dataset = load_dataset(data_path, sniff_has_labels(data_path))
    for pred in args.predictions:
        _require_file(pred, "prediction")
    matrix = load_predictions(args.predictions)
    username_table = load_table(_require_file(args.username_table, "username table"), AttributeKind.USERNAME)
    domain_table = load_table(_require_file(args.domain_table, "domain table"), AttributeKind.DOMAIN)
    cache = _load_cache_arg(args)
    cfg = _heuristic_from_args(args)
    decisions = decide_batch(dataset, matrix, username_table, domain_table, cache, cfg)
    digest = _args_digest(
        "postprocess", data_path.name, cfg.threshold, cfg.use_threshold,
        ",".join(k.value for k in cfg.priority),
    )
    write_decisions_tsv(decisions, args.out, header_comment=f"config: {digest}")
    print(f"wrote {len(decisions)} decisions to {args.out}")
    return 0


def _read_label_column(path: Path) -> dict[int, Label]:
    """Read id -> label from any of our TSV outputs that carry both."""
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(data_lines(handle), delimiter="\t")
        try:
            header = [cell.strip().lower() for cell in next(reader)]
        except StopIteration:
            raise BadRecord("file is empty", source=path.name) from None
        try:
            id_col = header.index("id")
            label_col = header.index("label")
        except ValueError:
            raise BadRecord(
                f"no id/label columns in header {header!r}", source=path.name
            ) from None
        labels: dict[int, Label] = {}
        for row in reader:
            item_id = int(row[id_col])
            labels[item_id] = Label.parse(row[label_col], item_id)
    return labels


def cmd_evaluate(args) -> int:
    gold_path = _require_file(args.gold, "gold data")
    pred_path = _require_file(args.pred, "prediction")
    gold_dataset = load_dataset(gold_path, has_labels=True, delimiter="," if args.csv else "\t")
    gold_by_id = gold_labels_by_id(gold_dataset)
    predicted = _read_label_column(pred_path)
    missing = sorted(set(gold_by_id) - set(predicted))
    if missing:
        raise DataError(f"predictions missing ids, e.g. {missing[:5]}")
    ordered_ids = sorted(gold_by_id)
    report = evaluate(
        [gold_by_id[i] for i in ordered_ids],
        [predicted[i] for i in ordered_ids],
        average=args.average,
    )
    print(report.format_text(f"{pred_path.name} vs {gold_path.name}"), end="")
    if args.json_out:
        atomic_write_text(Path(args.json_out), json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_pipeline(args) -> int:
    cfg = _config_with_overrides(args)
    result = run_pipeline(cfg)
    for path in result.output_files:
        print(f"wrote {path}")
    if result.post_report is not None:
        print(result.pre_report.format_text("ensemble only:"), end="")
        print(result.post_report.format_text("ensemble + heuristic:"), end="")
    return 0


def _config_with_overrides(args) -> RunConfig:
    cfg = load_config(_require_file(args.config, "config"))
    if getattr(args, "out_dir", None):
        cfg.output_dir = Path(args.out_dir)
    if getattr(args, "scheme", None):
        cfg.scheme = VotingScheme(args.scheme)
    cfg.heuristic = _heuristic_from_args(args, cfg.heuristic)
    return cfg


def _parse_orderings(values: list[str] | None) -> list[tuple[AttributeKind, ...]]:
    if not values:
        return [
            (AttributeKind.USERNAME,),
            (AttributeKind.DOMAIN,),
            (AttributeKind.DOMAIN, AttributeKind.USERNAME),
            DEFAULT_PRIORITY,
        ]
    return [_parse_priority_arg(value) for value in values]


def cmd_ablate(args) -> int:
    cfg = _config_with_overrides(args)
    val_inputs, val_gold, test_inputs, test_gold, digest = ablation_contexts(cfg)
    extra: dict = {"config_hash": digest, "threshold": cfg.heuristic.threshold}
    if args.tune_threshold:
        tuned = tune_threshold(val_inputs, val_gold, DEFAULT_THRESHOLD_GRID, cfg.heuristic)
        extra["tuned_threshold"] = tuned
        extra["tuning_grid"] = list(DEFAULT_THRESHOLD_GRID)
        threshold = tuned
    else:
        threshold = cfg.heuristic.threshold
    rows = run_ablation(
        val_inputs, val_gold, test_inputs, test_gold, _parse_orderings(args.ordering), threshold
    )
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text = f"# config: {digest}\n# threshold: {threshold!r}\n" + format_ablation_text(rows)
    atomic_write_text(out_dir / "ablation.txt", text)
    atomic_write_text(out_dir / "ablation.json", ablation_to_json(rows, extra))
    print(text, end="")
    print(f"wrote {out_dir / 'ablation.txt'}")
    print(f"wrote {out_dir / 'ablation.json'}")
    return 0


def cmd_expand_urls(args) -> int:
    urls: list[str] = []
    if args.urls_file:
        urls_path = _require_file(args.urls_file, "urls list")
        with urls_path.open("r", encoding="utf-8") as handle:
            urls.extend(line.strip() for line in data_lines(handle))
    if args.data:
        data_path = _require_file(args.data, "data")
        dataset = load_dataset(data_path, sniff_has_labels(data_path))
        for item in dataset:
            urls.extend(extract_attributes(item.text).urls)
    if not urls:
        raise UsageError("nothing to expand: pass --urls-file and/or --data")
    resolved, failed = urlexpand.build_cache(urls, args.out, timeout=args.timeout)
    print(f"resolved {resolved} urls ({failed} failed) -> {args.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="veracity",
        description="Fake-news classification pipeline: ensemble voting over "
        "per-model prediction vectors with attribute-based post-processing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="build attribute statistics tables from training data")
    p.add_argument("--train", required=True, help="labeled training TSV")
    p.add_argument("--cache", default=None, help="URL expansion cache TSV")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--csv", action="store_true", help="read comma-separated data")
    p.add_argument(
        "--dedup-per-item",
        action="store_true",
        help="count each attribute at most once per item",
    )
    p.add_argument("--summary-json", default=None, help="also write the summary as JSON")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train-baseline", help="train the built-in bag-of-words classifier")
    p.add_argument("--train", required=True)
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--alpha", type=float, default=1.0, help="additive smoothing strength")
    p.add_argument("--name", default=baseline.DEFAULT_MODEL_NAME)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("predict", help="emit prediction vectors for a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("ensemble", help="vote over per-model prediction files")
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--names", default=None, help="comma-separated model names")
    p.add_argument("--scheme", choices=["soft", "hard"], default="soft")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("postprocess", help="apply the attribute heuristic to ensemble input")
    p.add_argument("--data", required=True)
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--username-table", required=True)
    p.add_argument("--domain-table", required=True)
    p.add_argument("--cache", default=None)
    p.add_argument("--out", required=True)
    _add_heuristic_flags(p)
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--scheme", choices=["soft", "hard"], default=None)
    _add_heuristic_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("evaluate", help="score a prediction file against gold labels")
    p.add_argument("--gold", required=True, help="labeled dataset TSV")
    p.add_argument("--pred", required=True, help="any output TSV with id and label columns")
    p.add_argument("--average", choices=["weighted", "macro"], default="weighted")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="run the priority/threshold ablation grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--scheme", choices=["soft", "hard"], default=None)
    p.add_argument(
        "--ordering",
        action="append",
        default=None,
        help="priority ordering to evaluate (repeatable); default is the full grid",
    )
    p.add_argument("--tune-threshold", action="store_true", help="tune on validation first")
    _add_heuristic_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser(
        "expand-urls",
        help="NETWORK: follow redirects to build the URL expansion cache",
    )
    p.add_argument("--urls-file", default=None, help="one URL per line")
    p.add_argument("--data", default=None, help="dataset to harvest URLs from")
    p.add_argument("--out", required=True)
    p.add_argument("--timeout", type=float, default=10.0)
    p.set_defaults(func=cmd_expand_urls)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
