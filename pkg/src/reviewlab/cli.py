"""Command-line pipeline: analyze | label | train | evaluate | predict.

Every invocation creates a fresh numbered run directory under --out
(never overwriting a prior run) and writes the fully materialized
configuration into it. Settings resolve as flags over config file over
defaults; rerunning a command from a materialized config reproduces
every artifact byte for byte in single-threaded mode.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
import traceback
from pathlib import Path

from .analytics import full_report
from .checkpoint import ModelBundle, load_checkpoint, save_checkpoint
from .dataset import filter_for_classification, parse_csv, split_60_20_20, write_csv, write_issues
from .errors import InputError
from .metrics import majority_baseline, roc_auc, write_confusion_csv, write_report_json, write_roc_csv
from .sentiment import BUILTIN_LEXICON, SENTIMENT_CLASSES, auto_label_dataset, load_lexicon
from .tensor import SeededRng
from .textprep import (
    clean_text,
    encode_pad,
    load_glove,
    load_vocab,
    random_embeddings,
    save_vocab,
    tokenize,
)
from .training import (
    LabeledSplit,
    TrainConfig,
    build_training_data,
    evaluate,
    predict,
    predict_probabilities,
    task_labels,
    train,
    write_history_csv,
)

__all__ = ["main"]

_INT_KEYS = frozenset(
    {"seed", "batch_size", "cell_size", "epochs", "seq_len", "vocab_size",
     "min_freq", "embedding_dim"}
)
_FLOAT_KEYS = frozenset({"dropout_rate", "learning_rate", "grad_clip"})
_PATH_KEYS = frozenset(
    {"data", "out", "lexicon", "embeddings", "checkpoint", "vocab"}
)
_STR_KEYS = _PATH_KEYS | {"task", "text"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS

_TRAIN_FIELDS = (
    "batch_size", "cell_size", "dropout_rate", "epochs", "learning_rate",
    "seq_len", "vocab_size", "min_freq", "embedding_dim", "seed", "task",
    "grad_clip",
)


def _defaults() -> dict:
    cfg = dict.fromkeys(_ALL_KEYS)
    cfg.update(TrainConfig().as_dict())
    cfg["out"] = "runs"
    return cfg


def _parse_config_file(path) -> dict:
    """Read `key = value` lines; blank lines and # comments are skipped."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise InputError(f"{path}: line {line_num}: expected key=value, got {stripped!r}")
            key, _, value = stripped.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _ALL_KEYS:
                raise InputError(f"{path}: line {line_num}: unknown key {key!r}")
            if value == "":
                entries[key] = None
                continue
            try:
                if key in _INT_KEYS:
                    entries[key] = int(value)
                elif key in _FLOAT_KEYS:
                    entries[key] = float(value)
                else:
                    entries[key] = value
            except ValueError as exc:
                raise InputError(f"{path}: line {line_num}: {exc}") from exc
    return entries


def _resolve(args) -> tuple[dict, set]:
    """Merge defaults, config file, and flags; track explicitly set keys."""
    cfg = _defaults()
    provided = set()
    if getattr(args, "config", None):
        file_entries = _parse_config_file(args.config)
        cfg.update(file_entries)
        provided.update(file_entries)
    for key in _ALL_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
            provided.add(key)
    if cfg["task"] not in ("recommendation", "sentiment"):
        raise InputError(
            f"unknown task {cfg['task']!r}, expected recommendation or sentiment"
        )
    return cfg, provided


def _new_run_dir(out, command: str) -> Path:
    base = Path(out)
    base.mkdir(parents=True, exist_ok=True)
    pattern = re.compile(rf"{re.escape(command)}-(\d{{4}})")
    taken = [
        int(m.group(1))
        for p in base.iterdir()
        if (m := pattern.fullmatch(p.name))
    ]
    run_dir = base / f"{command}-{max(taken, default=0) + 1:04d}"
    run_dir.mkdir()
    return run_dir


def _write_materialized_config(run_dir: Path, command: str, cfg: dict) -> None:
    lines = [f"# command: {command}"]
    lines.extend(
        f"{key}={'' if cfg[key] is None else cfg[key]}" for key in sorted(cfg)
    )
    (run_dir / "config.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_table_csv(path, table) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.header)
        writer.writerows(table.rows)


def _require(cfg: dict, key: str, command: str):
    if cfg[key] is None:
        raise InputError(f"{command} requires --{key}")
    return cfg[key]


def _load_lexicon(cfg: dict):
    return load_lexicon(cfg["lexicon"]) if cfg["lexicon"] else BUILTIN_LEXICON


def _train_config(cfg: dict) -> TrainConfig:
    try:
        return TrainConfig(**{field: cfg[field] for field in _TRAIN_FIELDS})
    except ValueError as exc:
        raise InputError(f"invalid configuration: {exc}") from exc


def _parse_records(cfg: dict, command: str, run_dir: Path):
    records, issues = parse_csv(_require(cfg, "data", command))
    if issues:
        write_issues(issues, run_dir / "issues.txt")
    return records


def _cmd_analyze(cfg: dict, provided: set, run_dir: Path) -> None:
    records = _parse_records(cfg, "analyze", run_dir)
    report = full_report(records)
    combined = {}
    for name in sorted(report):
        table = report[name]
        _write_table_csv(run_dir / f"{name}.csv", table)
        combined[name] = {
            "header": list(table.header),
            "rows": [list(row) for row in table.rows],
        }
    _write_json(run_dir / "analysis.json", combined)
    print(f"wrote {len(report)} tables to {run_dir}")


def _cmd_label(cfg: dict, provided: set, run_dir: Path) -> None:
    records = _parse_records(cfg, "label", run_dir)
    labels, counts = auto_label_dataset(records, _load_lexicon(cfg))
    write_csv(records, run_dir / "labeled.csv", sentiment=labels)
    with open(run_dir / "sentiment_by_recommendation.csv", "w",
              encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["recommended", *SENTIMENT_CLASSES])
        for state in (False, True):
            writer.writerow(
                [int(state), *(counts.get((state, label), 0) for label in SENTIMENT_CLASSES)]
            )
    print(f"labeled {len(records)} rows into {run_dir}")


def _build_embeddings(cfg: dict, vocab, config: TrainConfig):
    rng = SeededRng(config.seed + 1)
    if cfg["embeddings"]:
        emb = load_glove(cfg["embeddings"], vocab, rng)
        if emb.dim != config.embedding_dim:
            raise InputError(
                f"embedding file dimension {emb.dim} does not match "
                f"embedding_dim {config.embedding_dim}"
            )
        return emb
    return random_embeddings(len(vocab), config.embedding_dim, rng)


def _cmd_train(cfg: dict, provided: set, run_dir: Path) -> None:
    config = _train_config(cfg)
    records = _parse_records(cfg, "train", run_dir)
    prep = build_training_data(records, config, _load_lexicon(cfg))
    embeddings = _build_embeddings(cfg, prep.vocab, config)
    result = train(config, prep.data, embeddings)
    bundle = ModelBundle(
        task=config.task,
        class_names=config.class_names,
        seq_len=config.seq_len,
        vocab_fingerprint=prep.vocab.fingerprint(),
        model=result.model,
        embeddings=result.embeddings,
    )
    save_checkpoint(bundle, run_dir / "model.ckpt")
    save_vocab(prep.vocab, run_dir / "vocab.tsv")
    write_history_csv(result.history, run_dir / "history.csv")
    n_train, n_val, n_test = len(prep.data.train), len(prep.data.validation), len(prep.test)
    summary = {
        "task": config.task,
        "dropped_records": prep.dropped,
        "split_sizes": {"train": n_train, "validation": n_val, "test": n_test},
        "vocab_size": len(prep.vocab),
        "epochs_run": len(result.history),
    }
    if result.history:
        last = result.history[-1]
        summary["final_epoch"] = {
            "train_loss": last.train_loss,
            "val_loss": last.val_loss,
            "val_acc": last.val_acc,
        }
    _write_json(run_dir / "train_summary.json", summary)
    print(f"trained {config.task} model into {run_dir}")


def _load_bundle(cfg: dict, provided: set, command: str):
    ckpt_path = Path(_require(cfg, "checkpoint", command))
    vocab_path = Path(cfg["vocab"]) if cfg["vocab"] else ckpt_path.with_name("vocab.tsv")
    vocab = load_vocab(vocab_path)
    bundle = load_checkpoint(ckpt_path, vocab=vocab)
    if "task" in provided and cfg["task"] != bundle.task:
        raise InputError(
            f"checkpoint was trained for task {bundle.task!r}, not {cfg['task']!r}"
        )
    return bundle, vocab


def _cmd_evaluate(cfg: dict, provided: set, run_dir: Path) -> None:
    bundle, vocab = _load_bundle(cfg, provided, "evaluate")
    records = _parse_records(cfg, "evaluate", run_dir)
    kept, _ = filter_for_classification(records)
    split = split_60_20_20(kept, cfg["seed"])
    labels, _ = task_labels(kept, bundle.task, _load_lexicon(cfg))
    test = LabeledSplit(
        sequences=tuple(
            encode_pad(
                tokenize(clean_text(kept[i].review_text)), vocab, bundle.seq_len
            ).indices
            for i in split.test
        ),
        labels=tuple(labels[i] for i in split.test),
    )
    report = evaluate(
        bundle.model, bundle.embeddings, test, cfg["batch_size"], bundle.class_names
    )
    extra = {}
    if bundle.task == "recommendation":
        rows = predict_probabilities(
            bundle.model, bundle.embeddings, test.sequences, cfg["batch_size"]
        )
        try:
            curve = roc_auc(list(test.labels), [row[1] for row in rows])
        except InputError:
            extra["roc_auc"] = None
        else:
            extra["roc_auc"] = curve.auc
            write_roc_csv(curve, run_dir / "roc.csv")
    write_report_json(report, run_dir / "metrics.json", extra=extra)
    write_confusion_csv(report, run_dir / "confusion.csv")
    baseline = majority_baseline(
        [labels[i] for i in split.train], list(test.labels),
        bundle.n_classes, bundle.class_names,
    )
    write_report_json(baseline, run_dir / "baseline.json")
    print(f"test accuracy {report.accuracy:.6f} (metrics in {run_dir})")


def _cmd_predict(cfg: dict, provided: set, run_dir: Path) -> None:
    bundle, vocab = _load_bundle(cfg, provided, "predict")
    text = _require(cfg, "text", "predict")
    result = predict(bundle, vocab, text)
    line = json.dumps(
        {
            "label": result.label,
            "label_index": result.label_index,
            "probabilities": result.probabilities,
            "empty_input": result.empty_input,
        },
        sort_keys=True,
    )
    (run_dir / "prediction.json").write_text(line + "\n", encoding="utf-8")
    print(line)


_HANDLERS = {
    "analyze": _cmd_analyze,
    "label": _cmd_label,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
}


def _add_common(sub, *flags):
    sub.add_argument("--out", help="output root for run directories (default: runs)")
    sub.add_argument("--config", help="key=value configuration file")
    if "data" in flags:
        sub.add_argument("--data", help="review dataset CSV")
    if "seed" in flags:
        sub.add_argument("--seed", type=int, help="RNG seed for split/init/shuffle")
    if "task" in flags:
        sub.add_argument("--task", choices=("recommendation", "sentiment"),
                         help="classification target")
    if "lexicon" in flags:
        sub.add_argument("--lexicon", help="token<TAB>valence sentiment lexicon file")
    if "embeddings" in flags:
        sub.add_argument("--embeddings", help="word-vector text file (space separated)")
    if "checkpoint" in flags:
        sub.add_argument("--checkpoint", help="trained model checkpoint")
    if "vocab" in flags:
        sub.add_argument("--vocab", help="vocabulary TSV (default: next to checkpoint)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reviewlab",
        description="Review analytics, sentiment labeling, and BiLSTM classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("analyze", help="write the analytics table battery"),
                "data")
    _add_common(sub.add_parser("label", help="auto-label sentiment via the lexicon"),
                "data", "lexicon")
    _add_common(sub.add_parser("train", help="train a classifier on the 60/20/20 split"),
                "data", "seed", "task", "lexicon", "embeddings")
    _add_common(sub.add_parser("evaluate", help="score a checkpoint on the test split"),
                "data", "seed", "task", "lexicon", "checkpoint", "vocab")
    predict_parser = sub.add_parser("predict", help="label one text with a checkpoint")
    _add_common(predict_parser, "checkpoint", "vocab")
    predict_parser.add_argument("--text", help="raw review text to classify")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        cfg, provided = _resolve(args)
        run_dir = _new_run_dir(cfg["out"], args.command)
        _write_materialized_config(run_dir, args.command, cfg)
        _HANDLERS[args.command](cfg, provided, run_dir)
        return 0
    except (InputError, FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
