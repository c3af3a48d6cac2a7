"""Command-line entry point.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .ci import FisherZOracle
from .experiments import (
    DataError,
    ExperimentConfig,
    parse_proportions,
    read_samples_csv,
    run_cluster_experiment,
    run_real_data,
    run_shd_experiment,
    run_synthetic_trials,
    run_varying_experiment,
    run_verify,
)
from .fci import fci
from .graph_core import graph_to_json
from .mixture import component_mags, union_graph
from .sem import random_mixture_sem, sample
from .svg import line_plot

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


# flag name -> ExperimentConfig field
_FLAG_FIELDS = {
    "k": "k",
    "nodes": "n_nodes",
    "samples": "n_samples",
    "alphas": "alphas",
    "trials": "n_trials",
    "seed": "master_seed",
    "proportions": "proportions",
    "oracle": "oracle",
    "jobs": "jobs",
    "out": "out_dir",
    "setting": "setting",
    "k_tilde": "k_tilde",
    "cluster_alpha": "cluster_alpha",
    "scale": "verify_scale",
    "inject_bug": "inject_bug",
    "subsamples": "n_subsamples",
    "threshold": "threshold",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file of ExperimentConfig fields; flags override it")
    p.add_argument("--k", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--proportions", help="uniform or dirichlet:<concentration>")
    p.add_argument("--oracle", choices=("exact", "fisher"))
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mixdag", description="Causal discovery from mixtures of DAGs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="draw a mixture sem and write its spec, union MAG and samples")
    _common(p)

    p = sub.add_parser("fci", help="run FCI on a samples CSV and print the PAG as JSON")
    _common(p)
    p.add_argument("csv", type=Path)

    p = sub.add_parser("verify", help="run the brute-force property suites")
    _common(p)
    p.add_argument("--scale", type=float, help="multiplier on suite budgets")
    p.add_argument("--inject-bug", dest="inject_bug", action="store_true", default=None)

    p = sub.add_parser("exp", help="synthetic experiments")
    p.add_argument("kind", choices=("shd", "varying", "cluster"))
    _common(p)
    p.add_argument("--setting", choices=("no-descendants", "descendants"))
    p.add_argument("--k-tilde", dest="k_tilde", type=_ints)
    p.add_argument("--cluster-alpha", dest="cluster_alpha", type=float)
    p.add_argument("--plot", action="store_true", help="also write an SVG line plot")

    p = sub.add_parser("real", help="stability-selected FCI and bidirected ranking on a samples CSV")
    _common(p)
    p.add_argument("csv", type=Path)
    p.add_argument("--subsamples", type=int)
    p.add_argument("--threshold", type=float)
    return parser


def load_config(args, kind: str) -> ExperimentConfig:
    base: dict = {}
    if args.config is not None:
        try:
            base = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(base, dict):
            raise UsageError("config file must hold a JSON object")
    for flag, fname in _FLAG_FIELDS.items():
        val = getattr(args, flag, None)
        if val is not None:
            base[fname] = val
    base["kind"] = kind
    try:
        return ExperimentConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out_dir, name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)
    print(d / name)


def cmd_gen(args) -> int:
    cfg = load_config(args, "shd")
    rng = np.random.default_rng(cfg.master_seed)
    sem = random_mixture_sem(cfg.k, cfg.n_nodes, rng)
    union = union_graph(component_mags(sem.spec))
    _emit(sem.spec.to_json(indent=1), cfg.out_dir, "spec.json")
    _emit(graph_to_json(union, indent=1), cfg.out_dir, "union_mag.json")
    if cfg.oracle == "fisher":
        data, labels = sample(sem, cfg.n_samples, parse_proportions(cfg.proportions, cfg.k, rng), rng)
        header = ",".join(f"x{i + 1}" for i in range(cfg.n_nodes)) + ",component"
        lines = [header] + [",".join(f"{x:.6f}" for x in row) + f",{lab}" for row, lab in zip(data, labels)]
        if cfg.out_dir is not None:
            _emit("\n".join(lines) + "\n", cfg.out_dir, "samples.csv")
    return EXIT_OK


def cmd_fci(args) -> int:
    cfg = load_config(args, "real-data")
    data, names = read_samples_csv(args.csv)
    if "component" in names:
        keep = [i for i, n in enumerate(names) if n != "component"]
        data, names = data[:, keep], [names[i] for i in keep]
    if data.shape[1] < 2:
        raise DataError("need at least two columns")
    pag = fci(FisherZOracle(data, cfg.alphas[0]), data.shape[1], labels=names)
    _emit(graph_to_json(pag, indent=1), cfg.out_dir, "pag.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args, "verify")
    reports, ok = run_verify(cfg)
    for r in reports:
        print(r.line())
    if cfg.out_dir is not None:
        _emit(json.dumps([r.to_dict() for r in reports], indent=1, default=str), cfg.out_dir, "verify_report.json")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_exp(args) -> int:
    cfg = load_config(args, args.kind)
    if args.kind == "cluster":
        out = run_cluster_experiment(cfg)
        x, series = "k_tilde", ("v_measure_varying", "v_measure_all")
    else:
        rows = run_synthetic_trials(cfg)
        runner = run_shd_experiment if args.kind == "shd" else run_varying_experiment
        out = runner(cfg, rows)
        x = "alpha"
        series = ("normalized_shd",) if args.kind == "shd" else ("tpr", "fpr", "adjacency_tpr")
    if cfg.out_dir is None:
        sys.stdout.write(out.summary_csv)
        return EXIT_OK
    for p in out.write(cfg.out_dir, args.kind):
        print(p)
    if args.plot:
        xs = [r[x] for r in out.records]
        svg = line_plot(xs, {s: [r[s] for r in out.records] for s in series}, title=args.kind, xlabel=x, log_x=x == "alpha")
        path = Path(cfg.out_dir) / f"{args.kind}.svg"
        path.write_text(svg)
        print(path)
    return EXIT_OK


def cmd_real(args) -> int:
    cfg = load_config(args, "real-data")
    out = run_real_data(args.csv, cfg)
    if cfg.out_dir is None:
        sys.stdout.write(out.ranking_csv)
    else:
        for p in out.write(cfg.out_dir):
            print(p)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "fci": cmd_fci, "verify": cmd_verify, "exp": cmd_exp, "real": cmd_real}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mixdag: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"mixdag: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
