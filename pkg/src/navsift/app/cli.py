"""Command line entry point for the pipeline.

Subcommands map one-to-one onto pipeline stages:

    synth        generate seeded synthetic logs + labels
    ingest       parse, aggregate, and privacy-floor a referrer log
    build-graph  threshold monthly records into navigation graphs
    features     extract per-month feature matrices
    train        fit one classifier on a train month
    evaluate     cross-validate all algorithms, emit the metrics CSV
    deploy       select candidates, score all months, save the run
    serve        HTTP review service over an artifact root

Every failure exits nonzero after printing one machine-readable line:
`error: {"code": ..., "message": ...}`.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from navsift import errors
from navsift.deploy import (
    DeploymentStrategy,
    run_deployment,
    save_run,
)
from navsift.features import extract_matrix, write_matrix_csv
from navsift.graph import build_graph, load_graphs, write_graph_csv
from navsift.ingest import (
    aggregate_month,
    apply_privacy_floor,
    load_aliases,
    parse_log,
    write_records_csv,
)
from navsift.labels import CategoryRegistry, LabelStore
from navsift.ml import (
    ALGORITHMS,
    ModelConfig,
    cross_validate,
    load_model,
    metrics_rows,
    save_model,
    train,
    training_targets,
)
from navsift.synth import (
    SynthConfig,
    generate,
    write_labels_csv,
    write_logs_csv,
    write_truth_csv,
)

STRATEGY_ALIASES = {
    "one-hop": "one_hop_egonet",
    "one_hop": "one_hop_egonet",
    "one_hop_egonet": "one_hop_egonet",
    "two-hop": "two_hop_egonet",
    "two_hop": "two_hop_egonet",
    "two_hop_egonet": "two_hop_egonet",
    "sampled": "sampled_traffic",
    "sampled_traffic": "sampled_traffic",
}


def _registry(path: str | None) -> CategoryRegistry:
    return CategoryRegistry.from_csv(path) if path else CategoryRegistry.default()


def _load_store(path: str) -> LabelStore:
    p = Path(path)
    if p.is_dir():
        return LabelStore.open(p)
    return LabelStore.load_labels([p])


def _labeled_matrices(graphs, store, registry, mode):
    domains = sorted(store.labeled_domains())
    return {
        month: extract_matrix(graph, store, registry, domains, mode=mode, missing="zero")
        for month, graph in sorted(graphs.items())
    }


# -- subcommands ---------------------------------------------------------------


def cmd_synth(args) -> int:
    config = SynthConfig.from_json(args.config)
    if args.seed is not None:
        config = SynthConfig(**{**config.__dict__, "seed": args.seed})
    result = generate(config)
    out = Path(args.out)
    write_logs_csv(result, out / "logs.csv")
    write_labels_csv(result, out / "labels.csv")
    write_truth_csv(result, out / "truth.csv")
    config.to_json(out / "synth_config.json")
    n_records = sum(len(v) for v in result.records_by_month.values())
    print(
        f"synth: {len(result.truth)} domains, {len(result.labels)} labeled, "
        f"{n_records} records over months {result.months[0]}..{result.months[-1]} -> {out}"
    )
    return 0


def cmd_ingest(args) -> int:
    aliases = load_aliases(args.aliases) if args.aliases else None
    parsed = parse_log(args.logs, fmt=args.format, aliases=aliases)
    floored = apply_privacy_floor(parsed.records, floor=args.privacy_floor, counting=args.counting)
    by_month = aggregate_month(floored)
    out = Path(args.out)
    flat = [r for month in sorted(by_month) for r in by_month[month]]
    if not flat:
        raise errors.EmptyInputError("no records survive the privacy floor")
    write_records_csv(flat, out)
    months = ",".join(sorted(by_month))
    print(
        f"ingest: {parsed.total_rows} rows, {parsed.malformed} malformed, "
        f"{len(flat)} aggregated records over {months} -> {out}"
    )
    return 0


def cmd_build_graph(args) -> int:
    parsed = parse_log(args.records, fmt="csv")
    by_month = aggregate_month(parsed.records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for month, records in sorted(by_month.items()):
        graph = build_graph(records, edge_threshold=args.edge_threshold)
        write_graph_csv(graph, out / f"{month}.csv")
        print(f"build-graph: {month} nodes={len(graph)} edges={graph.n_edges} -> {out / (month + '.csv')}")
    return 0


def cmd_features(args) -> int:
    graphs = load_graphs(args.graphs)
    store = _load_store(args.labels)
    registry = _registry(args.registry)
    if args.domains == "labeled":
        domains = sorted(store.labeled_domains())
    elif args.domains == "all":
        pool = set()
        for graph in graphs.values():
            pool |= graph.nodes
        domains = sorted(pool - registry.all_hosts())
    else:
        with open(args.domains.lstrip("@"), encoding="utf-8") as fh:
            domains = sorted({line.strip() for line in fh if line.strip()})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for month, graph in sorted(graphs.items()):
        matrix = extract_matrix(graph, store, registry, domains, mode=args.mode, missing="zero")
        write_matrix_csv(matrix, out / f"{month}.csv")
        print(f"features: {month} rows={len(matrix.domains)} missing={len(matrix.missing)} -> {out / (month + '.csv')}")
    return 0


def _model_config(args) -> ModelConfig:
    return ModelConfig(
        algorithm=args.algorithm,
        mode=args.mode,
        seed=args.seed,
        knn_k=args.knn_k,
        logreg_c=args.logreg_c,
        rf_n_trees=args.rf_trees,
        rf_max_depth=args.rf_depth,
        gbt_rounds=args.gbt_rounds,
        gbt_max_depth=args.gbt_depth,
        gbt_learning_rate=args.gbt_lr,
    )


def cmd_train(args) -> int:
    graphs = load_graphs(args.graphs)
    if args.train_month not in graphs:
        raise ValueError(f"train month {args.train_month!r} not among graphs {sorted(graphs)}")
    store = _load_store(args.labels)
    registry = _registry(args.registry)
    matrix = _labeled_matrices({args.train_month: graphs[args.train_month]}, store, registry, args.mode)[
        args.train_month
    ]
    y = training_targets(store, args.mode)
    model = train(_model_config(args), matrix, y)
    save_model(model, args.out)
    print(f"train: {args.algorithm} {args.mode} on {args.train_month} rows={len(matrix.domains)} -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    graphs = load_graphs(args.graphs)
    store = _load_store(args.labels)
    registry = _registry(args.registry)
    matrices = _labeled_matrices(graphs, store, registry, args.mode)
    y = training_targets(store, args.mode)
    algorithms = args.algorithms.split(",") if args.algorithms else list(ALGORITHMS)
    results = {}
    for algorithm in algorithms:
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
        config = ModelConfig(algorithm=algorithm, mode=args.mode, seed=args.seed)
        results[algorithm] = cross_validate(config, matrices, y, args.train_month, n_folds=args.folds)
    rows = metrics_rows(results)
    writer = csv.writer(sys.stdout)
    writer.writerows(rows)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(rows)
    return 0


def cmd_deploy(args) -> int:
    graphs = load_graphs(args.graphs)
    store = _load_store(args.labels)
    registry = _registry(args.registry)
    model = load_model(args.model)
    strategy = DeploymentStrategy(
        kind=STRATEGY_ALIASES.get(args.strategy, args.strategy),
        sample_size=args.sample_size,
        traffic_floor=args.traffic_floor,
        seed=args.seed,
        seed_class=args.seed_class,
    )
    run = run_deployment(
        graphs,
        model,
        store,
        registry,
        strategy,
        target_class=args.target_class,
        run_id=args.run_id,
        created_at=args.created_at,
    )
    run_dir = save_run(run, Path(args.out) / run.run_id)
    writer = csv.writer(sys.stdout)
    writer.writerow(["month", "all", "positive"])
    summary = run.summary()
    for month in run.months:
        counts = summary["counts"][month]
        writer.writerow([month, counts["all"], counts["positive"]])
    print(f"flagged in all months: {len(run.positives)}")
    print(f"deploy: run {run.run_id} -> {run_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from navsift.app.config import PipelineConfig
    from navsift.app.service import create_app

    root = args.root
    port = args.port
    if args.config:
        config = PipelineConfig.from_json(args.config)
        root = root or str(config.root)
        port = port or config.port
    if not root:
        raise ValueError("serve needs --root or --config")
    app = create_app(root)
    uvicorn.run(app, host=args.host, port=port or 8749, log_level="warning")
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="navsift", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic logs and labels")
    p.add_argument("--config", required=True, help="SynthConfig JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse and floor a referrer log")
    p.add_argument("--logs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default=None)
    p.add_argument("--aliases", default=None, help="CSV of from_host,to_host rewrites")
    p.add_argument("--privacy-floor", type=int, default=3000)
    p.add_argument("--counting", choices=("total", "inbound"), default="total")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-graph", help="threshold records into monthly graphs")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--edge-threshold", type=int, default=3000)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("features", help="extract per-month feature matrices")
    p.add_argument("--graphs", required=True, help="directory of <month>.csv graphs")
    p.add_argument("--labels", required=True, help="labels CSV or label-store directory")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("binary", "multiclass"), default="binary")
    p.add_argument("--registry", default=None)
    p.add_argument("--domains", default="labeled", help='"labeled", "all", or @file of domains')
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="fit one classifier on a train month")
    p.add_argument("--graphs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--train-month", required=True)
    p.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--mode", choices=("binary", "multiclass"), default="binary")
    p.add_argument("--registry", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--logreg-c", type=float, default=1.0)
    p.add_argument("--rf-trees", type=int, default=100)
    p.add_argument("--rf-depth", type=int, default=20)
    p.add_argument("--gbt-rounds", type=int, default=200)
    p.add_argument("--gbt-depth", type=int, default=6)
    p.add_argument("--gbt-lr", type=float, default=0.1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validate algorithms, print metrics CSV")
    p.add_argument("--graphs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--train-month", required=True)
    p.add_argument("--out", default=None, help="also write the CSV here")
    p.add_argument("--mode", choices=("binary", "multiclass"), default="binary")
    p.add_argument("--registry", default=None)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithms", default=None, help="comma list; default all four")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("deploy", help="select, score, and flag candidate domains")
    p.add_argument("--graphs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="runs directory")
    p.add_argument("--strategy", default="one-hop", help="one-hop | two-hop | sampled")
    p.add_argument("--sample-size", type=int, default=None)
    p.add_argument("--traffic-floor", type=int, default=3000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-class", choices=("misinformation", "propaganda"), default="misinformation")
    p.add_argument("--target-class", default=None)
    p.add_argument("--run-id", default=None)
    p.add_argument("--created-at", default=None)
    p.add_argument("--registry", default=None)
    p.set_defaults(func=cmd_deploy)

    p = sub.add_parser("serve", help="run the HTTP review service")
    p.add_argument("--root", default=None, help="artifact root directory")
    p.add_argument("--config", default=None, help="PipelineConfig JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.NavsiftError as err:
        code = type(err).__name__
        print("error: " + json.dumps({"code": code, "message": str(err)}), file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(
            "error: " + json.dumps({"code": type(err).__name__, "message": str(err)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
