"""Command line interface: gen, train, predict, eval, ablate.

Exit codes are a stable scripting contract: 0 success, 1 validation
error, 2 I/O error.  Every randomized step takes an explicit seed and
all commands are deterministic for fixed seeds and inputs.  Settings may
come from an optional JSON config file; flags override it.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import baselines as bl
from . import evaluation as ev
from .abstraction import AbstractionConfig
from .corpus import load_corpus, read_log_lines, split
from .errors import ValidationError
from .generator import default_spec, generate_synthetic, spec_from_dict
from .model import load_model, save_model
from .predictor import flag_lines, predict_lines
from .table import build

_CONFIG_KEYS = (
    "tree_depth",
    "similarity_threshold",
    "max_children",
    "test_fraction",
    "seed",
    "k_neighbors",
    "rg_trials",
    "jobs",
)

_DEFAULTS = {
    "tree_depth": 4,
    "similarity_threshold": 0.4,
    "max_children": 100,
    "test_fraction": 0.1,
    "seed": 0,
    "k_neighbors": 5,
    "rg_trials": 100,
    "jobs": 1,
}


class _Parser(argparse.ArgumentParser):
    # Usage errors are validation errors (exit 1); argparse's default
    # exit code of 2 is reserved for I/O failures.
    def error(self, message):
        raise ValidationError(message)


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path}: invalid JSON ({exc})") from None
    if not isinstance(payload, dict):
        raise ValidationError(f"config file {path}: expected a JSON object")
    unknown = sorted(set(payload) - set(_CONFIG_KEYS))
    if unknown:
        raise ValidationError(f"config file {path}: unknown keys {', '.join(unknown)}")
    return payload


def _setting(args, file_config: dict, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in file_config:
        return file_config[key]
    return _DEFAULTS[key]


def _abstraction_config(args, file_config: dict) -> AbstractionConfig:
    return AbstractionConfig(
        tree_depth=int(_setting(args, file_config, "tree_depth")),
        similarity_threshold=float(_setting(args, file_config, "similarity_threshold")),
        max_children=int(_setting(args, file_config, "max_children")),
    )


def _add_abstraction_flags(parser):
    parser.add_argument("--tree-depth", dest="tree_depth", type=int, default=None)
    parser.add_argument(
        "--sim-threshold", dest="similarity_threshold", type=float, default=None
    )
    parser.add_argument("--max-children", dest="max_children", type=int, default=None)


# -- gen -------------------------------------------------------------------


def _cmd_gen(args) -> int:
    if args.spec is not None:
        spec_path = Path(args.spec)
        if not spec_path.exists():
            raise FileNotFoundError(f"spec file not found: {spec_path}")
        spec = spec_from_dict(json.loads(spec_path.read_text(encoding="utf-8")))
    else:
        spec = default_spec(seed=0)
    if args.seed is not None:
        from dataclasses import replace

        spec = replace(spec, seed=args.seed)
    spec.validate()
    manifest = generate_synthetic(spec, args.out)
    total_failed = sum(spec.cause_counts)
    print(f"wrote {spec.passed_count} passed and {total_failed} failed logs to {args.out}")
    print(f"manifest: {manifest}")
    return 0


# -- train -----------------------------------------------------------------


def _cmd_train(args) -> int:
    file_config = _load_config_file(args.config)
    config = _abstraction_config(args, file_config)
    corpus = load_corpus(args.corpus, args.labels)
    miner, table = build(corpus, config)
    save_model(args.out, miner, table)
    print(f"model: {args.out}")
    print(f"templates: {len(miner.templates)}")
    print(f"table: {len(table.rows)} events x {table.k} causes")
    for j in range(table.k):
        print(f"  {table.taxonomy.display(j)}: {table.n_per_cause[j]} train logs")
    return 0


# -- predict ---------------------------------------------------------------


def _render_prediction(log_id, table, prediction, flagged) -> str:
    lines = [
        "ncc-report v1",
        f"log\t{log_id}",
        f"cause\t{prediction.cause}\t{table.taxonomy.display(prediction.cause)}",
        "scores\t" + "\t".join(repr(s) for s in prediction.scores),
        f"fallback\t{'true' if prediction.fallback_used else 'false'}",
    ]
    lines.extend(
        f"flag\t{f.line_number}\t{f.score!r}\t{f.event_id}\t{f.template}" for f in flagged
    )
    return "\n".join(lines)


def _prediction_record(log_id, table, prediction, flagged) -> dict:
    return {
        "log_id": log_id,
        "cause": prediction.cause,
        "cause_name": table.taxonomy.names[prediction.cause],
        "scores": list(prediction.scores),
        "fallback": prediction.fallback_used,
        "flagged_lines": [
            {
                "line": f.line_number,
                "score": f.score,
                "event_id": f.event_id,
                "template": f.template,
            }
            for f in flagged
        ],
    }


def _cmd_predict(args) -> int:
    file_config = _load_config_file(args.config)
    miner, table = load_model(args.model)
    target = Path(args.path)
    if target.is_dir():
        files = sorted(target.glob("*.log"))
    elif target.exists():
        files = [target]
    else:
        raise FileNotFoundError(f"log path not found: {target}")

    def run_one(path: Path):
        prediction, events = predict_lines(miner, table, read_log_lines(path), path.stem)
        flagged = flag_lines(prediction, events, miner)
        return path.stem, prediction, flagged

    jobs = int(_setting(args, file_config, "jobs"))
    if jobs > 1 and len(files) > 1:
        # The frozen miner and table are immutable; per-log work is
        # independent, so threads need no coordination.
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, files))
    else:
        results = [run_one(path) for path in files]

    results.sort(key=lambda item: item[0])
    for log_id, prediction, flagged in results:
        if args.json:
            print(json.dumps(_prediction_record(log_id, table, prediction, flagged)))
        else:
            print(_render_prediction(log_id, table, prediction, flagged))
            print()
    return 0


# -- eval ------------------------------------------------------------------


def _cmd_eval(args) -> int:
    file_config = _load_config_file(args.config)
    miner, table = load_model(args.model)
    test_corpus = load_corpus(args.corpus, args.labels, table.taxonomy)
    if not test_corpus.failed:
        raise ValidationError(f"test corpus {args.corpus} has no failed logs to evaluate")
    test_logs = sorted(test_corpus.failed, key=lambda log: log.log_id)
    truth = [log.cause for log in test_logs]

    requested = []
    if args.baselines:
        requested = [name.strip() for name in args.baselines.split(",") if name.strip()]
        unknown = sorted(set(requested) - {"rg", "mcc", "cam", "lff"})
        if unknown:
            raise ValidationError(f"unknown baselines: {', '.join(unknown)}")
    needs_train = {"cam", "lff"} & set(requested)
    if needs_train and args.train_dir is None:
        raise ValidationError(
            f"--train-dir is required for baselines: {', '.join(sorted(needs_train))}"
        )

    predictions = []
    for log in test_logs:
        prediction, _ = predict_lines(miner, table, log.lines, log.log_id)
        predictions.append(prediction.cause)
    reports = {"ncchecker": ev.evaluate(truth, predictions, table.taxonomy)}

    k_neighbors = int(_setting(args, file_config, "k_neighbors"))
    rg_trials = int(_setting(args, file_config, "rg_trials"))
    seed = int(_setting(args, file_config, "seed"))

    train_corpus = None
    if needs_train:
        train_corpus = load_corpus(args.train_dir, args.train_labels, table.taxonomy)
    for name in requested:
        if name == "rg":
            result = bl.rg_predict_from_counts(
                table.n_per_cause, truth, rg_trials, seed, table.taxonomy
            )
            reports["rg"] = result.median_report
        elif name == "mcc":
            majority = bl.majority_from_counts(table.n_per_cause)
            reports["mcc"] = ev.evaluate(truth, [majority] * len(truth), table.taxonomy)
        elif name == "cam":
            index = bl.cam_train(train_corpus.failed, k_neighbors)
            cam_preds = [bl.cam_predict(index, log.lines) for log in test_logs]
            reports["cam"] = ev.evaluate(truth, cam_preds, table.taxonomy)
        elif name == "lff":
            train_logs = sorted(train_corpus.failed, key=lambda log: log.log_id)
            sequences = [miner.parse_log(log.lines, log.log_id) for log in train_logs]
            index = bl.lff_train(
                sequences,
                [log.cause for log in train_logs],
                [log.log_id for log in train_logs],
                frozenset(table.rows),
                k_neighbors,
            )
            lff_preds = [
                bl.lff_predict(index, miner.parse_log(log.lines, log.log_id))
                for log in test_logs
            ]
            reports["lff"] = ev.evaluate(truth, lff_preds, table.taxonomy)

    if args.json:
        records = []
        for name, report in reports.items():
            records.extend(ev.report_records(report, name))
        for record in records:
            print(json.dumps(record))
        return 0

    print(ev.render_comparison(reports))
    for name, report in reports.items():
        print()
        print(f"== {name} ==")
        print(ev.render_report(report))
    return 0


# -- ablate ------------------------------------------------------------------


def _cmd_ablate(args) -> int:
    file_config = _load_config_file(args.config)
    config = _abstraction_config(args, file_config)
    test_fraction = float(_setting(args, file_config, "test_fraction"))
    seed = int(_setting(args, file_config, "seed"))

    corpus = load_corpus(args.corpus, args.labels)
    train_corpus, test_corpus = split(corpus, test_fraction, seed)
    if not test_corpus.failed:
        raise ValidationError("split produced an empty test set; corpus is too small")

    tables = {}
    reports = {}
    for variant in ev.ABLATION_VARIANTS:
        miner, table = ev.build_variant(train_corpus, variant, config)
        tables[variant] = table
        truth = []
        predictions = []
        for log in sorted(test_corpus.failed, key=lambda log: log.log_id):
            prediction, _ = predict_lines(miner, table, log.lines, log.log_id)
            truth.append(log.cause)
            predictions.append(prediction.cause)
        reports[variant] = ev.evaluate(truth, predictions, corpus.taxonomy)

    for line in ev.ablation_identities(tables["full"], tables["drop1"], tables["drop3"]):
        print(f"check: {line}")
    print()
    print(ev.render_comparison(reports))
    for variant in ev.ABLATION_VARIANTS:
        print()
        print(f"== {variant} ==")
        print(ev.render_report(reports[variant]))
    return 0


# -- wiring ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ncchecker",
        description="Predict the root cause of failed test runs from their logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic corpus with planted markers")
    gen.add_argument("spec", nargs="?", default=None, help="JSON synthetic spec file")
    gen.add_argument("--out", required=True, help="output corpus directory")
    gen.add_argument("--seed", type=int, default=None, help="override the spec seed")
    gen.set_defaults(func=_cmd_gen)

    train = sub.add_parser("train", help="mine templates and build the lookup table")
    train.add_argument("corpus", help="corpus directory (passed/, failed/, labels.csv)")
    train.add_argument("--labels", default=None, help="labels CSV (default: corpus/labels.csv)")
    train.add_argument("--out", required=True, help="model file to write")
    train.add_argument("--config", default=None, help="optional JSON config file")
    _add_abstraction_flags(train)
    train.set_defaults(func=_cmd_train)

    predict = sub.add_parser("predict", help="predict causes for a log file or directory")
    predict.add_argument("model", help="model file from train")
    predict.add_argument("path", help="log file or directory of *.log files")
    predict.add_argument("--jobs", type=int, default=None, help="parallel workers")
    predict.add_argument("--json", action="store_true", help="machine-readable records")
    predict.add_argument("--config", default=None, help="optional JSON config file")
    predict.set_defaults(func=_cmd_predict)

    evaluate = sub.add_parser("eval", help="evaluate the model and baselines on a test corpus")
    evaluate.add_argument("model", help="model file from train")
    evaluate.add_argument("corpus", help="test corpus directory")
    evaluate.add_argument("--labels", default=None)
    evaluate.add_argument(
        "--baselines", default="", help="comma list from: rg,mcc,cam,lff"
    )
    evaluate.add_argument("--train-dir", default=None, help="training corpus (cam/lff only)")
    evaluate.add_argument("--train-labels", default=None)
    evaluate.add_argument("--rg-trials", dest="rg_trials", type=int, default=None)
    evaluate.add_argument("--k-neighbors", dest="k_neighbors", type=int, default=None)
    evaluate.add_argument("--seed", type=int, default=None)
    evaluate.add_argument("--json", action="store_true")
    evaluate.add_argument("--config", default=None)
    evaluate.set_defaults(func=_cmd_eval)

    ablate = sub.add_parser("ablate", help="run full, drop1, drop2, drop3 on one split")
    ablate.add_argument("corpus", help="corpus directory")
    ablate.add_argument("--labels", default=None)
    ablate.add_argument("--test-fraction", dest="test_fraction", type=float, default=None)
    ablate.add_argument("--seed", type=int, default=None)
    ablate.add_argument("--config", default=None)
    _add_abstraction_flags(ablate)
    ablate.set_defaults(func=_cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
