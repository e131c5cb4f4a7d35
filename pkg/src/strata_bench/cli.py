"""Command-line interface.

Subcommands: parse, preprocess, sample, train, eval, grid, synth, mix, report.
Every subcommand accepts --seed (falling back to the STRATA_BENCH_SEED
environment variable, then 0) and writes output files atomically. Module
errors exit 1 with a diagnostic on stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import preprocess as pp
from .classifiers import (
    knn_predict_dataset,
    load_model,
    predict_bayes_dataset,
    predict_tree_dataset,
    save_model,
    train_decision_tree,
    train_knn,
    train_naive_bayes,
)
from .configfile import get_float, get_int, get_list, parse_config
from .dataset import Dataset, load_dataset, save_dataset
from .dictionary import load_dictionary
from .errors import ConfigError, EvaluationError, StrataBenchError
from .evaluate import (
    GridConfig,
    accuracy,
    report_from_results_csv,
    results_csv,
    run_grid,
    summary_csv,
)
from .fileio import write_text_atomic
from .figures import render_figures
from .parsing import DEFAULT_BATCH_SIZE, parse_records
from .report import emit_report
from .sampling import SamplingPlan, sample
from .synth import default_profile, generate, mix, parse_spec

ENV_SEED = "STRATA_BENCH_SEED"


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer, got {env!r}") from None
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strata-bench",
        description="Benchmark harness for sampling strategies on imbalanced prognosis data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${ENV_SEED} or 0)")
        return p

    p = add("parse", "parse fixed-width records into a dataset CSV")
    p.add_argument("--dict", required=True, dest="dictionary", help="data dictionary file")
    p.add_argument("--in", required=True, dest="input", help="fixed-width record file")
    p.add_argument("--out", required=True, help="output dataset CSV (schema sidecar written next to it)")
    p.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)

    p = add("preprocess", "derive labels and filter attributes")
    p.add_argument("--in", required=True, dest="input")
    p.add_argument("--out", required=True)
    p.add_argument("--label", default=None, help="label column for the information-gain filter")
    p.add_argument("--config", default=None, help="preprocess config file")
    p.add_argument("--report", default=None, help="filter report CSV (default: <out>.filter.csv)")

    p = add("sample", "draw a sample with one of the three strategies")
    p.add_argument("--in", required=True, dest="input")
    p.add_argument("--out", required=True)
    p.add_argument("--label", default=None)
    p.add_argument("--strategy", required=True, choices=["random", "stratified", "balanced"])
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--minority-ratio", type=float, default=0.01)
    p.add_argument("--with-replacement", action="store_true")

    p = add("train", "train a classifier and persist the model")
    p.add_argument("--in", required=True, dest="input")
    p.add_argument("--out", required=True)
    p.add_argument("--label", default=None)
    p.add_argument("--classifier", required=True, choices=["tree", "bayes", "knn"])
    p.add_argument("--min-leaf", type=int, default=2)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--k", type=int, default=10)

    p = add("eval", "score a saved model against a labeled dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--in", required=True, dest="input")
    p.add_argument("--label", default=None)
    p.add_argument("--out", default=None, help="optional predictions CSV")

    p = add("grid", "run the experiment grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")

    p = add("synth", "generate a synthetic imbalanced dataset")
    p.add_argument("--spec", default=None, help="synthesis spec (default: built-in benchmark profile)")
    p.add_argument("--out", required=True)

    p = add("mix", "pool rows from two datasets into a mixed set")
    p.add_argument("--in", required=True, dest="inputs", action="append", help="give twice: first and second dataset")
    p.add_argument("--n-a", required=True, type=int)
    p.add_argument("--n-b", required=True, type=int)
    p.add_argument("--out", required=True)

    p = add("report", "re-emit report documents from a results CSV")
    p.add_argument("--in", required=True, dest="input", help="results CSV from the grid command")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["markdown", "csv"], default="markdown")
    p.add_argument("--no-figures", action="store_true")

    return parser


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _cmd_parse(args) -> int:
    dictionary = load_dictionary(_read_text(args.dictionary))
    with open(args.input, "r", encoding="utf-8") as fh:
        ds, report = parse_records(fh, dictionary, args.batch_size)
    save_dataset(ds, args.out)
    print(report.summary())
    for err in report.rejected[:20]:
        print(f"rejected line {err.index}: {err.message}", file=sys.stderr)
    if len(report.rejected) > 20:
        print(f"... {len(report.rejected) - 20} more rejected lines", file=sys.stderr)
    return 0


def _apply_derivations(ds: Dataset, doc) -> Dataset:
    for section in doc.sections:
        if section.kind != "derive":
            raise ConfigError(f"unknown section [{section.kind} {section.name}]")
        v = section.values
        if section.name == "survival":
            ds = _derive_survival(ds, v)
        elif section.name == "metastasis":
            ds = _derive_metastasis(ds, v)
        else:
            raise ConfigError(f"unknown derivation {section.name!r}")
    return ds


def _derive_survival(ds: Dataset, v: dict[str, str]) -> Dataset:
    threshold = get_int(v, "threshold_months", pp.DEFAULT_SURVIVAL_THRESHOLD_MONTHS)
    studied = v.get("studied")
    if studied is None:
        raise ConfigError("[derive survival] requires studied = <cancer category>")
    vital_col = v.get("vital_column", "vital_status")
    cod_col = v.get("cod_column", "cod")
    out_col = v.get("out", "survival")
    months_col = v.get("months_column")
    yymm_col = v.get("yymm_column")
    if (months_col is None) == (yymm_col is None):
        raise ConfigError("[derive survival] requires exactly one of months_column or yymm_column")
    labels: list[str | None] = []
    for i in range(ds.n_rows):
        if months_col is not None:
            raw_months = ds.cell(i, months_col)
            months = None if raw_months is None else int(raw_months)
        else:
            raw = ds.cell(i, yymm_col)
            months = None if raw is None else pp.recode_survival_months(str(raw))
        vital = ds.cell(i, vital_col)
        if months is None or vital is None:
            labels.append(None)
            continue
        labels.append(
            pp.derive_survival_label(months, str(vital), ds.cell(i, cod_col), studied, threshold)
        )
    from .dataset import NOMINAL, Column

    ds = ds.with_column(Column(out_col, NOMINAL, (pp.SURVIVED, pp.NOT_SURVIVED, pp.EXCLUDED)), labels)
    if v.get("drop_excluded", "true").strip().lower() in ("true", "1", "yes", "on"):
        keep = [i for i in range(ds.n_rows) if ds.cell(i, out_col) != pp.EXCLUDED]
        ds = ds.take(np.asarray(keep, dtype=np.int64))
    return ds


def _derive_metastasis(ds: Dataset, v: dict[str, str]) -> Dataset:
    mapping_path = v.get("mapping")
    if mapping_path is None:
        raise ConfigError("[derive metastasis] requires mapping = <csv path>")
    mapping = pp.StagingMapping.from_csv(_read_text(mapping_path))
    era_column = v.get("era_column", "year")
    eod_columns = [c.strip() for c in v.get("eod_columns", "").split(",") if c.strip()]
    cs_columns = [c.strip() for c in v.get("cs_columns", "").split(",") if c.strip()]
    era_split = get_int(v, "era_split", 2004)
    out_col = v.get("out", "metastasis")
    labels = []
    involved = [era_column] + eod_columns + cs_columns
    for i in range(ds.n_rows):
        row = {name: ds.cell(i, name) for name in involved if ds.has_column(name)}
        labels.append(
            pp.derive_metastasis_label(row, eod_columns, cs_columns, era_column, mapping, era_split)
        )
    from .dataset import NOMINAL, Column

    return ds.with_column(Column(out_col, NOMINAL), labels)


def _cmd_preprocess(args) -> int:
    ds = load_dataset(args.input)
    doc = parse_config(_read_text(args.config)) if args.config else parse_config("")
    v = doc.values
    ds = _apply_derivations(ds, doc)
    label = args.label or v.get("label") or ds.label

    reports = []
    ds, rep = pp.remove_missing(
        ds,
        get_float(v, "missing_threshold", pp.DEFAULT_MISSING_THRESHOLD),
        v.get("row_policy", "drop_any_missing"),
    )
    reports.append(rep)
    ds, rep = pp.correlation_filter(ds, get_float(v, "correlation_threshold", pp.DEFAULT_CORRELATION_THRESHOLD))
    reports.append(rep)
    if label is not None and ds.has_column(label):
        ds = ds.with_label(label)
        ds, rep = pp.information_gain_filter(
            ds, label, get_float(v, "min_gain", pp.DEFAULT_MIN_GAIN), get_int(v, "numeric_bins", pp.DEFAULT_NUMERIC_BINS)
        )
        reports.append(rep)
    save_dataset(ds, args.out)

    merged = pp.FilterReport()
    for rep in reports:
        merged.removed_by_missing.extend(rep.removed_by_missing)
        merged.removed_by_correlation.extend(rep.removed_by_correlation)
        merged.removed_by_infogain.extend(rep.removed_by_infogain)
        merged.rows_removed += rep.rows_removed
    report_path = args.report or args.out + ".filter.csv"
    write_text_atomic(report_path, merged.to_csv())
    print(f"{ds.n_rows} rows x {ds.n_cols} columns after preprocessing; report: {report_path}")
    return 0


def _cmd_sample(args) -> int:
    ds = load_dataset(args.input)
    label = args.label or ds.label
    plan = SamplingPlan(
        strategy=args.strategy,
        n=args.n,
        seed=_resolve_seed(args.seed),
        minority_ratio=args.minority_ratio,
        with_replacement=args.with_replacement,
    )
    out = sample(ds, label, plan)
    save_dataset(out, args.out)
    print(f"{out.n_rows} rows -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    ds = load_dataset(args.input)
    label = args.label or ds.label
    if label is None:
        raise ConfigError("no label column: pass --label or set one in the dataset schema")
    ds = ds.with_label(label)
    if args.classifier == "tree":
        model = train_decision_tree(ds, min_leaf=args.min_leaf, max_depth=args.max_depth)
    elif args.classifier == "bayes":
        model = train_naive_bayes(ds, alpha=args.alpha)
    else:
        model = train_knn(ds, k=args.k, training_ref=os.path.abspath(args.input))
    save_model(model, args.out)
    print(f"{args.classifier} model -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    ds = load_dataset(args.input)
    label = args.label or ds.label
    if label is None:
        raise ConfigError("no label column: pass --label or set one in the dataset schema")
    from .classifiers import DecisionTreeModel, NaiveBayesModel

    if isinstance(model, DecisionTreeModel):
        predictions = predict_tree_dataset(model, ds)
    elif isinstance(model, NaiveBayesModel):
        predictions = predict_bayes_dataset(model, ds)
    else:
        predictions = knn_predict_dataset(model, ds)
    truth = [ds.cell(i, label) for i in range(ds.n_rows)]
    scored = [(p, t) for p, t in zip(predictions, truth) if t is not None]
    if not scored:
        raise EvaluationError("dataset has no labeled rows to score")
    acc = accuracy([p for p, _ in scored], [t for _, t in scored])
    if args.out:
        lines = ["row,prediction,truth"]
        lines += [f"{i},{p},{'' if t is None else t}" for i, (p, t) in enumerate(zip(predictions, truth))]
        write_text_atomic(args.out, "\n".join(lines) + "\n")
    print(f"accuracy={acc!r} ({len(scored)} rows)")
    return 0


def _cmd_grid(args) -> int:
    import dataclasses

    config_text = _read_text(args.config)
    config = GridConfig.from_text(config_text)
    # seed precedence: --seed flag, then the config file, then env, then 0
    config_has_seed = "seed" in parse_config(config_text).values
    if args.seed is not None or not config_has_seed:
        config = dataclasses.replace(config, seed=_resolve_seed(args.seed))
    datasets = {}
    for path in config.datasets:
        stem = os.path.splitext(os.path.basename(path))[0]
        if stem in datasets:
            raise ConfigError(f"duplicate dataset id {stem!r}; rename one input file")
        datasets[stem] = load_dataset(path)
    report = run_grid(config, datasets, jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    write_text_atomic(os.path.join(args.out, "results.csv"), results_csv(report))
    write_text_atomic(os.path.join(args.out, "summary.csv"), summary_csv(report))
    write_text_atomic(os.path.join(args.out, "report.md"), emit_report(report, "markdown"))
    figure_paths: list[str] = []
    if not args.no_figures and report.cells:
        figure_paths = render_figures(report, args.out)
    print(
        f"{len(report.cells)} cells computed, {len(report.skipped)} skipped -> {args.out} "
        f"({len(figure_paths)} figures)"
    )
    return 0


def _cmd_synth(args) -> int:
    spec = parse_spec(_read_text(args.spec)) if args.spec else default_profile()
    ds = generate(spec, _resolve_seed(args.seed))
    save_dataset(ds, args.out)
    print(f"{ds.n_rows} rows x {ds.n_cols} columns -> {args.out}")
    return 0


def _cmd_mix(args) -> int:
    if len(args.inputs) != 2:
        raise ConfigError("mix requires exactly two --in datasets")
    path_a, path_b = args.inputs
    name_a = os.path.splitext(os.path.basename(path_a))[0]
    name_b = os.path.splitext(os.path.basename(path_b))[0]
    if name_a == name_b:
        name_a, name_b = name_a + "-1", name_b + "-2"
    ds = mix(
        load_dataset(path_a),
        load_dataset(path_b),
        args.n_a,
        args.n_b,
        _resolve_seed(args.seed),
        source_names=(name_a, name_b),
    )
    save_dataset(ds, args.out)
    print(f"{ds.n_rows} rows ({name_a}: {args.n_a}, {name_b}: {args.n_b}) -> {args.out}")
    return 0


def _cmd_report(args) -> int:
    report = report_from_results_csv(_read_text(args.input))
    write_text_atomic(args.out, emit_report(report, args.format))
    figure_paths: list[str] = []
    if not args.no_figures and report.cells:
        figure_paths = render_figures(report, os.path.dirname(os.path.abspath(args.out)))
    print(f"report -> {args.out} ({len(figure_paths)} figures)")
    return 0


_COMMANDS = {
    "parse": _cmd_parse,
    "preprocess": _cmd_preprocess,
    "sample": _cmd_sample,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "grid": _cmd_grid,
    "synth": _cmd_synth,
    "mix": _cmd_mix,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StrataBenchError as exc:
        print(f"strata-bench {args.command}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"strata-bench {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
