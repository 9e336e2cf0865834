"""Command-line pipeline: stats, train, predict, import, ensemble,
search-weights, subsets, evaluate.

Every command validates the full experiment config before writing
anything, and appends what it read and wrote (with content hashes) to the
run manifest.  Exit status: 0 success, 1 runtime/data failure, 2
usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import DatasetSplit, Label, compute_stats, load_split
from .ensemble import (
    EnsembleConfig,
    WeightVector,
    ensemble_predict,
    render_subset_table,
    search_weights,
    subset_ensembles,
    subset_table_csv,
)
from .errors import ConfigError, DataError
from .experiment import ExperimentConfig, RunManifest, load_config
from .metrics import evaluate, render_eval_report, render_results_table
from .predictions import (
    PredictionRecord,
    assemble_matrix,
    export_predictions,
    import_predictions,
)
from .trainer import load_model, predict_split, save_model, train


def _load_split_for(config: ExperimentConfig, split_name: str) -> DatasetSplit:
    return load_split(
        config.split_path(split_name),
        format=config.data.format,
        schema=config.data.schema,
        name=split_name,
    )


def _reference_ids(config: ExperimentConfig) -> set[str]:
    return {m.model_id for m in config.reference_models}


def _predictions_path(config: ExperimentConfig, model_id: str, split_name: str) -> Path:
    """Where a model's predictions for a split live.

    Reference models write under the output directory; external models
    point at the files named in the config.
    """
    if model_id in _reference_ids(config):
        return config.out_dir / "preds" / f"{model_id}-{split_name}.jsonl"
    for m in config.external_models:
        if m.model_id == model_id:
            if split_name not in m.predictions:
                raise ConfigError(
                    f"external model {model_id!r} has no predictions configured for "
                    f"split {split_name!r}"
                )
            return m.predictions[split_name]
    raise ConfigError(f"unknown model {model_id!r}")


def _gather_matrix(config: ExperimentConfig, split_name: str, split: DatasetSplit):
    """Import every configured model's predictions and assemble the grid."""
    paths = {}
    for model_id in config.model_ids:
        p = _predictions_path(config, model_id, split_name)
        if not p.exists():
            raise FileNotFoundError(
                f"predictions for model {model_id!r} on split {split_name!r} not found: {p}"
            )
        paths[model_id] = p
    records: list[PredictionRecord] = []
    for model_id, p in paths.items():
        for record in import_predictions(p, split):
            if record.model_id != model_id:
                raise DataError(
                    f"{p}: record model_id {record.model_id!r} does not match "
                    f"configured model {model_id!r}"
                )
            records.append(record)
    return assemble_matrix(records, config.model_ids, split), paths


def _write_text(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(content)


def cmd_stats(config: ExperimentConfig, args: argparse.Namespace) -> int:
    splits = {name: _load_split_for(config, name) for name in sorted(config.data.paths)}
    payload = {}
    for name, split in splits.items():
        stats = compute_stats(split)
        payload[name] = {
            "count": stats.count,
            "per_class_counts": {str(int(k)): v for k, v in stats.per_class_counts.items()},
            "per_class_fractions": {str(int(k)): v for k, v in stats.per_class_fractions.items()},
            "max_word_count": stats.max_word_count,
        }
        print(f"split {name}: {stats.count} examples, max {stats.max_word_count} words")
        for lab, n in stats.per_class_counts.items():
            frac = stats.per_class_fractions[lab]
            print(f"  class {int(lab)} ({lab.name.lower()}): {n} ({frac:.1%})")
    out_path = config.out_dir / "stats.json"
    _write_text(out_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    RunManifest(config.out_dir).record(
        "stats",
        config,
        inputs={name: config.split_path(name) for name in splits},
        outputs={"stats": out_path},
    )
    print(f"wrote {out_path}")
    return 0


def cmd_train(config: ExperimentConfig, args: argparse.Namespace) -> int:
    model_cfg = config.reference_model(args.model)
    train_split = _load_split_for(config, "train")
    dev_split = None
    if "dev" in config.data.paths:
        dev_split = _load_split_for(config, "dev")

    params, log = train(train_split, config.featurizer, model_cfg.train, dev_split=dev_split)

    model_path = config.out_dir / "models" / f"{args.model}.bin"
    model_path.parent.mkdir(parents=True, exist_ok=True)
    save_model(params, config.featurizer, model_path, model_id=args.model)
    log_path = config.out_dir / "logs" / f"{args.model}-train.jsonl"
    _write_text(log_path, log.to_jsonl())

    inputs = {"train": config.split_path("train")}
    if dev_split is not None:
        inputs["dev"] = config.split_path("dev")
    RunManifest(config.out_dir).record(
        "train", config, inputs=inputs, outputs={"model": model_path, "log": log_path}
    )
    last = log.epochs[-1]
    dev_note = f", dev macro F1 {last.dev_macro_f1:.4f}" if last.dev_macro_f1 is not None else ""
    print(f"trained {args.model}: {len(log.epochs)} epochs, final mean loss "
          f"{last.mean_loss:.4f}{dev_note}")
    print(f"wrote {model_path}")
    return 0


def cmd_predict(config: ExperimentConfig, args: argparse.Namespace) -> int:
    config.reference_model(args.model)
    model_path = config.out_dir / "models" / f"{args.model}.bin"
    if not model_path.exists():
        raise FileNotFoundError(f"model artifact not found (run train first): {model_path}")
    split = _load_split_for(config, args.split)
    params, featurizer_config, stored_id = load_model(model_path)
    if stored_id != args.model:
        raise DataError(f"{model_path}: artifact is for model {stored_id!r}, not {args.model!r}")
    records = predict_split(params, split, featurizer_config, model_id=args.model)
    out_path = config.out_dir / "preds" / f"{args.model}-{args.split}.jsonl"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    export_predictions(records, out_path)
    RunManifest(config.out_dir).record(
        "predict",
        config,
        inputs={"model": model_path, "split": config.split_path(args.split)},
        outputs={"predictions": out_path},
    )
    print(f"wrote {len(records)} predictions to {out_path}")
    return 0


def cmd_import(config: ExperimentConfig, args: argparse.Namespace) -> int:
    split = _load_split_for(config, args.split)
    records = import_predictions(args.path, split)
    models = sorted({r.model_id for r in records})
    print(f"{args.path}: {len(records)} valid records for {len(models)} model(s): "
          f"{', '.join(models)}")
    return 0


def _load_weights_file(path: Path) -> WeightVector:
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    if isinstance(obj, dict) and "best_weights" in obj:
        obj = obj["best_weights"]
    if not isinstance(obj, dict):
        raise DataError(f"{path}: expected a model->weight object")
    return WeightVector({str(k): float(v) for k, v in obj.items()})


def cmd_ensemble(config: ExperimentConfig, args: argparse.Namespace) -> int:
    mode = args.mode or config.ensemble.mode
    split = _load_split_for(config, args.split)
    matrix, pred_paths = _gather_matrix(config, args.split, split)

    weights = None
    inputs: dict[str, str | Path] = dict(pred_paths)
    inputs["split"] = config.split_path(args.split)
    if mode == "weighted":
        weights_path = Path(args.weights) if args.weights else config.out_dir / "weights.json"
        if not weights_path.exists():
            raise FileNotFoundError(
                f"weights file not found (pass --weights or run search-weights): {weights_path}"
            )
        weights = _load_weights_file(weights_path)
        inputs["weights"] = weights_path

    vote_config = EnsembleConfig(mode=mode, priority_order=config.ensemble.priority_order)
    result = ensemble_predict(matrix, vote_config, weights)

    out_base = config.out_dir / "ensemble"
    labels_path = out_base / f"{args.split}-{mode}-labels.jsonl"
    labels_path.parent.mkdir(parents=True, exist_ok=True)
    export_predictions(
        [
            PredictionRecord(example_id=eid, model_id=f"ensemble-{mode}", label=lab)
            for eid, lab in zip(matrix.example_ids, result.labels)
        ],
        labels_path,
    )
    outputs: dict[str, str | Path] = {"labels": labels_path}
    print(f"wrote {labels_path}")

    if split.labeled:
        gold = [int(g) for g in split.gold_labels()]
        rows = []
        for model_id in matrix.model_ids:
            f1 = evaluate([int(v) for v in matrix.row(model_id)], gold).macro_f1
            rows.append((model_id, "single", f1))
        report = evaluate([int(v) for v in result.labels], gold)
        rows.append(("ensemble", f"{mode} voting", report.macro_f1))
        table = render_results_table(rows)
        detail = render_eval_report(report, title=f"ensemble ({mode}) on {args.split}")
        print(table)
        print(detail)
        report_json = {
            "split": args.split,
            "mode": mode,
            "per_model_macro_f1": {m: f1 for m, _, f1 in rows[:-1]},
            "ensemble": report.to_dict(),
        }
        json_path = out_base / f"{args.split}-{mode}-report.json"
        _write_text(json_path, json.dumps(report_json, indent=2, sort_keys=True) + "\n")
        text_path = out_base / f"{args.split}-{mode}-report.txt"
        _write_text(text_path, table + "\n\n" + detail + "\n")
        outputs["report_json"] = json_path
        outputs["report_txt"] = text_path

    RunManifest(config.out_dir).record("ensemble", config, inputs=inputs, outputs=outputs)
    return 0


def cmd_search_weights(config: ExperimentConfig, args: argparse.Namespace) -> int:
    split = _load_split_for(config, "dev")
    if not split.labeled:
        raise DataError("weight search requires gold labels on the dev split")
    matrix, pred_paths = _gather_matrix(config, "dev", split)
    result = search_weights(
        matrix,
        split.gold_labels(),
        grid_step=config.grid_step,
        priority_order=config.ensemble.priority_order,
    )
    out_path = config.out_dir / "weights.json"
    _write_text(out_path, json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")
    inputs: dict[str, str | Path] = dict(pred_paths)
    inputs["dev"] = config.split_path("dev")
    RunManifest(config.out_dir).record(
        "search-weights", config, inputs=inputs, outputs={"weights": out_path}
    )
    print(
        f"searched {result.evaluations} grid points at step {result.grid_step}: "
        f"best dev macro F1 {result.best_dev_macro_f1:.4f}"
    )
    for model_id, w in sorted(result.best_weights.weights.items()):
        print(f"  {model_id}: {w:.4f}")
    print(f"wrote {out_path}")
    return 0


def cmd_subsets(config: ExperimentConfig, args: argparse.Namespace) -> int:
    split = _load_split_for(config, args.split)
    if not split.labeled:
        raise DataError(f"subset exploration requires gold labels on split {args.split!r}")
    matrix, pred_paths = _gather_matrix(config, args.split, split)
    results = subset_ensembles(
        matrix, split.gold_labels(), priority_order=config.ensemble.priority_order
    )
    csv_path = config.out_dir / f"subsets-{args.split}.csv"
    _write_text(csv_path, subset_table_csv(results))
    table = render_subset_table(results)
    txt_path = config.out_dir / f"subsets-{args.split}.txt"
    _write_text(txt_path, table + "\n")
    print(table)
    inputs: dict[str, str | Path] = dict(pred_paths)
    inputs["split"] = config.split_path(args.split)
    RunManifest(config.out_dir).record(
        "subsets", config, inputs=inputs, outputs={"csv": csv_path, "txt": txt_path}
    )
    print(f"wrote {csv_path}")
    return 0


def cmd_evaluate(config: ExperimentConfig, args: argparse.Namespace) -> int:
    split = _load_split_for(config, args.split)
    if not split.labeled:
        raise DataError(f"evaluate requires gold labels on split {args.split!r}")
    pred_path = Path(args.pred)
    if not pred_path.exists():
        raise FileNotFoundError(f"predictions file not found: {pred_path}")
    records = import_predictions(pred_path, split)
    model_ids = sorted({r.model_id for r in records})
    gold = [int(g) for g in split.gold_labels()]

    rows = []
    reports = {}
    for model_id in model_ids:
        matrix = assemble_matrix(records, [model_id], split)
        report = evaluate([int(v) for v in matrix.labels[0]], gold)
        rows.append((model_id, "single", report.macro_f1))
        reports[model_id] = report.to_dict()
        print(render_eval_report(report, title=f"{model_id} on {args.split}"))
    print(render_results_table(rows))

    out_path = config.out_dir / "eval" / f"{pred_path.stem}-{args.split}-report.json"
    _write_text(out_path, json.dumps(
        {"split": args.split, "models": reports}, indent=2, sort_keys=True) + "\n")
    RunManifest(config.out_dir).record(
        "evaluate",
        config,
        inputs={"predictions": pred_path, "split": config.split_path(args.split)},
        outputs={"report": out_path},
    )
    print(f"wrote {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyvote",
        description="Train, combine, and score three-class text classifiers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config file (TOML)")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="global seed override")
        return p

    add("stats", "summarize the configured dataset splits")
    p = add("train", "train a reference model")
    p.add_argument("--model", required=True, help="reference model id")
    p = add("predict", "write a trained model's predictions for a split")
    p.add_argument("--model", required=True)
    p.add_argument("--split", required=True, choices=["train", "dev", "test"])
    p = add("import", "validate an external predictions file against a split")
    p.add_argument("--path", required=True)
    p.add_argument("--split", required=True, choices=["train", "dev", "test"])
    p = add("ensemble", "combine all configured models' predictions by voting")
    p.add_argument("--split", required=True, choices=["train", "dev", "test"])
    p.add_argument("--mode", choices=["hard", "weighted"], default=None)
    p.add_argument("--weights", default=None, help="weights JSON (weighted mode)")
    add("search-weights", "grid-search voting weights on the dev split")
    p = add("subsets", "score every model subset under hard voting")
    p.add_argument("--split", required=True, choices=["train", "dev", "test"])
    p = add("evaluate", "score a predictions file against a labeled split")
    p.add_argument("--pred", required=True)
    p.add_argument("--split", required=True, choices=["train", "dev", "test"])
    return parser


_COMMANDS = {
    "stats": cmd_stats,
    "train": cmd_train,
    "predict": cmd_predict,
    "import": cmd_import,
    "ensemble": cmd_ensemble,
    "search-weights": cmd_search_weights,
    "subsets": cmd_subsets,
    "evaluate": cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, out_override=args.out, seed_override=args.seed)
        return _COMMANDS[args.command](config, args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
