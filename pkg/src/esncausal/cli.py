"""Command-line interface.

Subcommands: contaminate, impute, discover, evaluate, pipeline (and a
``simulate`` helper that writes a synthetic VAR dataset with its truth).
Exit codes: 0 success, 2 usage/argument error, 3 data/format error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import gpr
from .data import contaminate, load_csv, read_removed, write_csv, write_removed
from .errors import ArgumentError, EsnCausalError, FormatError
from .esn import EsnConfig
from .gc import CausalMatrix
from .metrics import evaluate, read_truth_csv, write_roc_csv
from .pipeline import (
    METHODS,
    config_block,
    discover,
    impute_series,
    load_config,
    parse_methods,
)
from .synthetic import linear_var1


def _existing(path, what="input file") -> Path:
    p = Path(path)
    if not p.is_file():
        raise ArgumentError(f"{what} not found: {p}")
    return p


def _pct_label(fraction: float) -> str:
    pct = round(fraction * 100, 6)
    return f"{int(pct)}pct" if pct == int(pct) else f"{pct:g}pct"


def _write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _esn_config(args, cfg: dict) -> EsnConfig:
    return EsnConfig.from_dict(
        config_block(cfg, "esn"),
        reservoir_size=args.reservoir_size,
        leak_rate=args.leak_rate,
        spectral_radius=args.spectral_radius,
        input_scaling=args.input_scaling,
        connectivity=args.connectivity,
        ridge=args.ridge,
        washout=args.washout,
        seed=getattr(args, "reservoir_seed", None),
    )


def _method_options(args, cfg: dict) -> dict:
    mv = config_block(cfg, "mvgc")
    sl = config_block(cfg, "slarac")
    pick = lambda flag, block, key, default: flag if flag is not None else block.get(key, default)
    return dict(
        var_order=int(pick(args.var_order, mv, "var_order", 2)),
        max_lag=int(pick(args.max_lag, sl, "max_lag", 5)),
        n_subsamples=int(pick(args.subsamples, sl, "subsamples", 100)),
        slarac_seed=int(pick(args.slarac_seed, sl, "seed", 0)),
    )


def cmd_contaminate(args) -> int:
    src = _existing(args.input)
    series = load_csv(src, args.missing_token)
    out, removed = contaminate(series, args.fraction, args.seed)
    out_path = Path(args.out) if args.out else src.with_name(f"{src.stem}_{_pct_label(args.fraction)}.csv")
    removed_path = Path(args.removed) if args.removed else out_path.with_name("removed.csv")
    write_csv(out, out_path)
    write_removed(removed, removed_path)
    print(f"removed={len(removed)} out={out_path} removed_cells={removed_path}")
    return 0


def cmd_impute(args) -> int:
    src = _existing(args.input)
    cfg = load_config(args.config)
    grid = gpr.grid_from_config(config_block(cfg, "gpr"))
    series = load_csv(src, args.missing_token)
    removed = read_removed(_existing(args.removed, "removed-cells file")) if args.removed else None
    result = impute_series(series, grid, removed, n_jobs=args.jobs)
    out = Path(args.out)
    write_csv(result.filled, out)
    hyper = Path(args.hyper_out) if args.hyper_out else out.with_name(out.stem + "_gpr.json")
    _write_text(hyper, gpr.hyperparameters_json(result.chosen))
    if result.rmse is not None:
        print(f"rmse={result.rmse:.6g} mean_fill_rmse={result.mean_fill_rmse:.6g}")
    return 0


def _write_matrix(cm: CausalMatrix, csv_path, json_path=None) -> None:
    csv_path = Path(csv_path)
    cm.write_csv(csv_path)
    _write_text(json_path or csv_path.with_suffix(".json"), cm.to_json())


def cmd_discover(args) -> int:
    src = _existing(args.input)
    cfg = load_config(args.config)
    series = load_csv(src, args.missing_token)
    cm = discover(
        series,
        args.method,
        esn_config=_esn_config(args, cfg),
        normalize=args.normalize,
        n_jobs=args.jobs,
        **_method_options(args, cfg),
    )
    _write_matrix(cm, args.out, args.json)
    return 0


def _evaluate_to_files(cm, truth_path, threshold, include_diagonal, report_path, roc_path):
    names, truth = read_truth_csv(_existing(truth_path, "truth file"))
    if tuple(names) != tuple(cm.names):
        raise FormatError(f"truth names {names} do not match prediction names {list(cm.names)}")
    report, curve = evaluate(cm, truth, threshold, include_diagonal)
    _write_text(report_path, report.to_json())
    write_roc_csv(curve, roc_path)
    return report


def cmd_evaluate(args) -> int:
    pred_path = _existing(args.pred, "prediction file")
    cm = CausalMatrix.read_csv(pred_path)
    threshold = None if args.best_f1 else args.threshold
    report = _evaluate_to_files(
        cm,
        args.truth,
        threshold,
        not args.skip_diagonal,
        args.out or pred_path.with_name(pred_path.stem + "_report.json"),
        args.roc or pred_path.with_name(pred_path.stem + "_roc.csv"),
    )
    print(f"mcc={report.mcc:.3f} auc={report.auc:.3f}")
    print(
        f"tp={report.tp} fp={report.fp} tn={report.tn} fn={report.fn} "
        f"threshold={report.threshold:.6g}"
    )
    return 0


def _summary_text(rows, header) -> str:
    widths = [max(len(str(r[k])) for r in [dict(zip(header, header))] + rows) for k in header]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths)).rstrip()]
    for r in rows:
        lines.append("  ".join(str(r[h]).ljust(w) for h, w in zip(header, widths)).rstrip())
    return "\n".join(lines) + "\n"


def cmd_pipeline(args) -> int:
    methods = parse_methods(args.methods)
    src = _existing(args.input)
    if args.truth:
        _existing(args.truth, "truth file")
    cfg = load_config(args.config)
    grid = gpr.grid_from_config(config_block(cfg, "gpr"))
    esn_cfg = _esn_config(args, cfg)
    opts = _method_options(args, cfg)
    include_diagonal = not args.skip_diagonal

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    series = load_csv(src, args.missing_token)
    contaminated, removed = contaminate(series, args.fraction, args.seed)
    write_csv(contaminated, out_dir / "contaminated.csv")
    write_removed(removed, out_dir / "removed.csv")

    result = impute_series(contaminated, grid, removed, n_jobs=args.jobs)
    write_csv(result.filled, out_dir / "filled.csv")
    _write_text(out_dir / "gpr_hyperparameters.json", gpr.hyperparameters_json(result.chosen))

    header = ["method", "mcc", "auc", "threshold", "tp", "fp", "tn", "fn",
              "fraction", "contamination_seed", "method_seed"]
    rows = []
    for method in methods:
        cm = discover(result.filled, method, esn_config=esn_cfg, normalize=args.normalize,
                      n_jobs=args.jobs, **opts)
        _write_matrix(cm, out_dir / f"strengths_{method}.csv")
        seed = {"esn": esn_cfg.seed, "slarac": opts["slarac_seed"]}.get(method, "")
        row = dict.fromkeys(header, "")
        row.update(method=method, fraction=f"{args.fraction:g}", contamination_seed=args.seed,
                   method_seed=seed)
        if args.truth:
            rep = _evaluate_to_files(cm, args.truth, args.threshold, include_diagonal,
                                     out_dir / f"report_{method}.json", out_dir / f"roc_{method}.csv")
            row.update(mcc=f"{rep.mcc:.4f}", auc=f"{rep.auc:.4f}", threshold=f"{rep.threshold:.6g}",
                       tp=rep.tp, fp=rep.fp, tn=rep.tn, fn=rep.fn)
        rows.append(row)

    with (out_dir / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    text = _summary_text(rows, header)
    _write_text(out_dir / "summary.txt", text)
    sys.stdout.write(text)
    if result.rmse is not None:
        print(f"imputation rmse={result.rmse:.6g} mean_fill_rmse={result.mean_fill_rmse:.6g}")
    return 0


def cmd_simulate(args) -> int:
    system = linear_var1(args.vars, args.edges, args.steps, args.seed, args.graph_seed)
    write_csv(system.series, args.out)
    with Path(args.truth_out).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(system.series.names)
        w.writerows(system.truth.tolist())
    return 0


def _add_esn_flags(p):
    g = p.add_argument_group("echo state network (override the config's esn block)")
    g.add_argument("--reservoir-size", type=int)
    g.add_argument("--leak-rate", type=float)
    g.add_argument("--spectral-radius", type=float)
    g.add_argument("--input-scaling", type=float)
    g.add_argument("--connectivity", type=float)
    g.add_argument("--ridge", type=float)
    g.add_argument("--washout", type=int)
    g.add_argument("--reservoir-seed", type=int)


def _add_method_flags(p):
    g = p.add_argument_group("baselines")
    g.add_argument("--var-order", type=int, help="MVGC VAR order (default 2)")
    g.add_argument("--max-lag", type=int, help="SLARAC maximum lag (default 5)")
    g.add_argument("--subsamples", type=int, help="SLARAC subsample count (default 100)")
    g.add_argument("--slarac-seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esncausal",
        description="Granger-causal discovery on gappy time series (GP filling + echo state networks).",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("contaminate", help="hide a random fraction of observed cells")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--removed", help="removed-cells CSV (default: removed.csv beside --out)")
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--missing-token")
    p.set_defaults(func=cmd_contaminate)

    p = sub.add_parser("impute", help="fill missing cells by GP regression")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON with a gpr block (or a bare gpr block)")
    p.add_argument("--removed", help="removed-cells CSV; prints RMSE over those cells")
    p.add_argument("--hyper-out", help="selected kernels JSON (default: <out>_gpr.json)")
    p.add_argument("--missing-token")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("discover", help="compute a causal strength matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="strengths CSV")
    p.add_argument("--json", help="strengths JSON (default: --out with .json suffix)")
    p.add_argument("--method", choices=METHODS, default="esn")
    p.add_argument("--config")
    p.add_argument("--normalize", action="store_true", help="rescale strengths to [0, 1]")
    p.add_argument("--missing-token")
    p.add_argument("--jobs", type=int, default=1)
    _add_esn_flags(p)
    _add_method_flags(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("evaluate", help="score strengths against a ground-truth adjacency")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--skip-diagonal", action="store_true")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--threshold", type=float)
    g.add_argument("--best-f1", action="store_true", help="(default when --threshold is absent)")
    p.add_argument("--out", help="report JSON (default: <pred>_report.json)")
    p.add_argument("--roc", help="ROC CSV (default: <pred>_roc.csv)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="contaminate, impute, discover and evaluate in one go")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--truth")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0, help="contamination seed")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--config")
    p.add_argument("--skip-diagonal", action="store_true")
    p.add_argument("--threshold", type=float, help="fixed threshold (default: best F1)")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--missing-token")
    p.add_argument("--jobs", type=int, default=1)
    _add_esn_flags(p)
    _add_method_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("simulate", help="write a synthetic VAR(1) dataset and its true graph")
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", required=True)
    p.add_argument("--vars", type=int, default=5)
    p.add_argument("--edges", type=int, default=5)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--graph-seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except EsnCausalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
