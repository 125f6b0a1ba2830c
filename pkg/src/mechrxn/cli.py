"""Command-line surface: predict, pathway, ptgen, train, eval, stats.

One binary, subcommands per workflow.  A key=value config file can seed
any long option (flags win); every run writes a reproducibility manifest
next to its outputs.  Model paths default to $MECHRXN_MODEL_DIR.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from mechrxn import __version__
from mechrxn.chem import MoleculeError, parse_smiles, write_molset

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EMPTY = 2


class CliError(Exception):
    pass


def read_config(path) -> dict[str, str]:
    """Flat key = value lines; '#' comments; later keys win."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{line_no}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    values = read_config(args.config)
    for key, raw in values.items():
        if not hasattr(args, key):
            raise CliError(f"config key '{key}' is not a known option")
        current = getattr(args, key)
        if current is not None and parser.get_default(key) != current:
            continue  # explicit flag wins
        target_type = type(parser.get_default(key))
        if parser.get_default(key) is None or target_type is str:
            setattr(args, key, raw)
        elif target_type is bool:
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        else:
            setattr(args, key, target_type(raw))


def write_manifest(out_dir: Path, command: str, args: argparse.Namespace) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "command": command,
        "version": __version__,
        "arguments": {
            k: v for k, v in sorted(vars(args).items()) if k != "func"
        },
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    (out_dir / "manifest.json").write_text(json.dumps(payload, indent=2) + "\n")


def model_dir_from(args) -> Path:
    directory = args.model_dir or os.environ.get("MECHRXN_MODEL_DIR")
    if not directory:
        raise CliError(
            "model directory required: pass --model-dir or set MECHRXN_MODEL_DIR"
        )
    return Path(directory)


def load_models(args):
    from mechrxn.twostep import TwoStepModels

    directory = model_dir_from(args)
    try:
        return TwoStepModels.load_dir(directory)
    except FileNotFoundError as exc:
        raise CliError(f"missing model file under {directory}: {exc}") from exc


def build_predictors(args):
    from mechrxn.hybrid import AdapterClient

    return [
        AdapterClient(cmd.split(), deadline=args.deadline)
        for cmd in (args.adapter or [])
    ]


# ---------------------------------------------------------------------------
# subcommands


def cmd_predict(args, parser) -> int:
    from mechrxn.hybrid import hybrid_predict
    from mechrxn.twostep import materialize_protons, two_step_predict

    try:
        reactants = parse_smiles(args.reactants)
    except MoleculeError as exc:
        print(f"error: cannot parse reactants: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.keep_implicit_protons:
        reactants = materialize_protons(
            reactants, include_carbon=args.carbon_protons
        )

    models = load_models(args)
    rows = []
    if args.mode == "twostep":
        for cand in two_step_predict(
            reactants, models, k_sites=args.k_sites, k_out=args.k
        ):
            rows.append(
                {
                    "products": write_molset(cand.step.products),
                    "score": cand.score,
                    "arrow": cand.step.arrow.code(),
                    "provenance": "twostep",
                    "source_probability": cand.source_probability,
                    "sink_probability": cand.sink_probability,
                }
            )
    else:
        predictors = build_predictors(args)
        if not predictors:
            raise CliError("hybrid mode needs at least one --adapter command")
        try:
            for cand in hybrid_predict(reactants, args.k, predictors, models):
                rows.append(
                    {
                        "products": write_molset(cand.products),
                        "score": cand.likelihood,
                        "arrow": None,
                        "provenance": cand.provenance,
                        "balance": cand.balance.verdict,
                    }
                )
        finally:
            for p in predictors:
                p.close()

    payload = {
        "reactants": write_molset(reactants),
        "mode": args.mode,
        "predictions": rows,
    }
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(payload, indent=2) + "\n")
    if args.out_dir:
        write_manifest(Path(args.out_dir), "predict", args)

    print(f"reactants: {payload['reactants']}")
    if not rows:
        print("no predictions")
        return EXIT_EMPTY
    for i, row in enumerate(rows, 1):
        arrow = f"  [{row['arrow']}]" if row.get("arrow") else ""
        score = row["score"]
        text = f"{score:.4f}" if score is not None else "unscored"
        print(f"{i:2d}. {row['products']}  (score {text}){arrow}")
    return EXIT_OK


def cmd_pathway(args, parser) -> int:
    from mechrxn import plots
    from mechrxn.pathway import SearchConfig, TargetSpec, search
    from mechrxn.twostep import materialize_protons, two_step_predict

    try:
        reactants = parse_smiles(args.reactants)
        target = TargetSpec.from_text(args.target)
    except (MoleculeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.keep_implicit_protons:
        reactants = materialize_protons(
            reactants, include_carbon=args.carbon_protons
        )

    intermediates = ()
    if args.intermediates:
        intermediates = tuple(
            parse_smiles(text)
            for text in args.intermediates.split(";")
            if text.strip()
        )
    models = load_models(args)

    def predictor(node, k):
        if not args.keep_implicit_protons:
            node = materialize_protons(node, include_carbon=args.carbon_protons)
        return [
            c.step
            for c in two_step_predict(node, models, k_sites=args.k_sites, k_out=k)
        ]

    config = SearchConfig(
        target=target,
        branching=args.branching,
        max_depth=args.max_depth,
        time_budget=args.time_budget,
        known_intermediates=intermediates,
        selection=args.selection,
    )
    result = search(reactants, config, predictor)

    report = {
        "reactants": write_molset(reactants),
        "target": args.target,
        "stop_reason": result.stop_reason,
        "nodes_expanded": result.nodes_expanded,
        "pathways": [
            {
                "depth": p.depth,
                "min_step_score": p.min_step_score,
                "steps": [
                    {
                        "reaction": s.reaction_smiles(),
                        "arrow": s.arrow.code() if s.arrow else None,
                        "score": s.score,
                    }
                    for s in p.steps
                ],
            }
            for p in result.pathways
        ],
        "selected": result.pathways.index(result.selected)
        if result.selected in result.pathways
        else None,
    }
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "pathway_report.json").write_text(
            json.dumps(report, indent=2) + "\n"
        )
        write_manifest(out_dir, "pathway", args)
        if result.selected and result.selected.steps:
            plots.pathway_figure(
                [s.score for s in result.selected.steps],
                out_dir / "pathway_scores.png",
            )

    print(f"stop reason: {result.stop_reason}  (expanded {result.nodes_expanded})")
    if result.error:
        print(f"error: {result.error}")
    if not result.pathways:
        print("no pathway found")
        return EXIT_EMPTY
    chosen = result.selected
    print(f"selected pathway: {chosen.depth} step(s), "
          f"min step score {chosen.min_step_score}")
    for i, step in enumerate(chosen.steps, 1):
        arrow = f"  [{step.arrow.code()}]" if step.arrow else ""
        score = f"{step.score:.4f}" if step.score is not None else "unscored"
        print(f"  step {i}: {step.reaction_smiles()}  (score {score}){arrow}")
    return EXIT_OK


def cmd_ptgen(args, parser) -> int:
    from mechrxn.ptgen import GenerateConfig, generate, load_inventory
    from mechrxn.reaction import format_step_record

    acids = load_inventory(args.acids, "acid")
    bases = load_inventory(args.bases, "base")
    config = GenerateConfig(
        heteroatom_cutoff=args.het_cutoff,
        carbon_cutoff=args.carbon_cutoff,
        eigen_form=args.eigen_form,
        intrinsic_log_k0=args.intrinsic_log_k0,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    shard_paths: list[str] = []
    counts: list[int] = []
    shard_index = 0
    written = 0
    fh = None
    try:
        for step in generate(acids, bases, config):
            if fh is None or written >= args.shard_size:
                if fh is not None:
                    fh.close()
                shard_name = f"steps-{shard_index:04d}.txt"
                shard_paths.append(shard_name)
                counts.append(0)
                fh = open(out_dir / shard_name, "w")
                shard_index += 1
                written = 0
            fh.write(format_step_record(step) + "\n")
            written += 1
            counts[-1] += 1
    finally:
        if fh is not None:
            fh.close()

    manifest = {
        "acids": str(args.acids),
        "bases": str(args.bases),
        "heteroatom_cutoff": args.het_cutoff,
        "carbon_cutoff": args.carbon_cutoff,
        "eigen_form": args.eigen_form,
        "intrinsic_log_k0": args.intrinsic_log_k0,
        "shards": [
            {"file": name, "steps": count}
            for name, count in zip(shard_paths, counts)
        ],
        "total_steps": sum(counts),
    }
    (out_dir / "shards.json").write_text(json.dumps(manifest, indent=2) + "\n")
    write_manifest(out_dir, "ptgen", args)
    print(f"wrote {sum(counts)} steps across {len(shard_paths)} shard(s) to {out_dir}")
    return EXIT_OK


def cmd_train(args, parser) -> int:
    from mechrxn.dataio import SplitSpec, load_dataset, split
    from mechrxn.nn import MlpConfig
    from mechrxn.twostep import train_two_step

    dataset = load_dataset(args.dataset)
    train, val, test = split(dataset, SplitSpec(seed=args.seed))
    site_config = MlpConfig(
        layer_dims=(6487, 128, 64, 1), activation="relu", dropout=0.1,
        l2=1e-5, epochs=args.site_epochs, learning_rate=1e-3, batch_size=256,
        seed=args.seed + 1, class_weight="balanced",
    )
    ranker_config = MlpConfig(
        layer_dims=(15022, 120, 1), activation="tanh", dropout=0.2,
        epochs=args.ranker_epochs, learning_rate=1e-3, batch_size=100,
        seed=args.seed + 2,
    )
    models = train_two_step(
        train.steps,
        site_config=site_config,
        ranker_config=ranker_config,
        max_site_steps=args.max_site_steps,
        max_ranker_steps=args.max_ranker_steps,
    )
    out_dir = Path(args.out_dir)
    models.save_dir(out_dir)
    write_manifest(out_dir, "train", args)
    print(
        f"models written to {out_dir} "
        f"(train {len(train)}, val {len(val)}, test {len(test)})"
    )
    return EXIT_OK


def cmd_eval(args, parser) -> int:
    from mechrxn import plots
    from mechrxn.dataio import (
        SplitSpec,
        accuracy_table_csv,
        load_dataset,
        split,
        top_n_accuracy,
    )
    from mechrxn.twostep import eval_reactive_sites, two_step_predict

    models = load_models(args)
    dataset = load_dataset(args.dataset)
    if args.use_split:
        _, _, part = split(dataset, SplitSpec(seed=args.seed))
    else:
        part = dataset
    steps = part.steps[: args.limit] if args.limit else part.steps

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ns = (1, 3, 5, 10)

    site_table = eval_reactive_sites(steps, models.source, models.sink, ns)
    accuracy_table_csv(site_table, out_dir / "site_accuracy.csv")
    plots.accuracy_bar_figure(
        site_table, out_dir / "site_accuracy.png", "Reactive-site top-N accuracy"
    )

    rows = []
    for step in steps:
        if step.products is None:
            continue
        preds = two_step_predict(
            step.reactants, models, k_sites=args.k_sites, k_out=max(ns)
        )
        rows.append(([c.step.products for c in preds], step.products))
    product_table = top_n_accuracy(rows, ns)
    accuracy_table_csv(product_table, out_dir / "product_accuracy.csv")
    plots.accuracy_bar_figure(
        product_table, out_dir / "product_accuracy.png",
        "Product top-N accuracy",
    )
    write_manifest(out_dir, "eval", args)

    print("reactive sites:", {n: round(v, 1) for n, v in site_table.items()})
    print("products:      ", {n: round(v, 1) for n, v in product_table.items()})
    return EXIT_OK


def cmd_stats(args, parser) -> int:
    from mechrxn import plots
    from mechrxn.dataio import dataset_stats, load_dataset

    dataset = load_dataset(args.dataset)
    report = dataset_stats(dataset)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.write_csv(out_dir / "sizes.csv", out_dir / "elements.csv")
    if report.size_histogram:
        plots.size_histogram_figure(report.size_histogram, out_dir / "sizes.png")
        plots.element_histogram_figure(
            report.element_histogram, out_dir / "elements.png"
        )
    write_manifest(out_dir, "stats", args)
    print(
        f"{report.record_count()} records; outputs in {out_dir} "
        f"(sizes.csv, elements.csv, figures)"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mechrxn",
        description="mechanistic polar reaction prediction engine",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("predict", help="rank single-step mechanisms")
    common(p)
    p.add_argument("--reactants", required=True)
    p.add_argument("--mode", choices=("twostep", "hybrid"), default="twostep")
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--k-sites", type=int, default=6)
    p.add_argument("--model-dir")
    p.add_argument("--adapter", action="append",
                   help="external predictor command line (repeatable)")
    p.add_argument("--deadline", type=float, default=30.0)
    p.add_argument("--keep-implicit-protons", action="store_true",
                   help="skip heteroatom O-H/N-H/S-H materialization")
    p.add_argument("--carbon-protons", action="store_true",
                   help="also materialize one H per carbon")
    p.add_argument("--json-out")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("pathway", help="multi-step search to a target")
    common(p)
    p.add_argument("--reactants", required=True)
    p.add_argument("--target", required=True,
                   help="target SMILES or Hill formula (charge sign suffix)")
    p.add_argument("--branching", type=int, default=10)
    p.add_argument("--max-depth", type=int, default=7)
    p.add_argument("--time-budget", type=float, default=7200.0)
    p.add_argument("--selection", choices=("first_found", "max_min_step"),
                   default="first_found")
    p.add_argument("--intermediates", help="';'-separated known intermediates")
    p.add_argument("--k-sites", type=int, default=6)
    p.add_argument("--keep-implicit-protons", action="store_true")
    p.add_argument("--carbon-protons", action="store_true")
    p.add_argument("--model-dir")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_pathway)

    p = sub.add_parser("ptgen", help="combinatorial proton-transfer steps")
    common(p)
    p.add_argument("--acids", required=True)
    p.add_argument("--bases", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--shard-size", type=int, default=100000)
    p.add_argument("--het-cutoff", type=float, default=1e3)
    p.add_argument("--carbon-cutoff", type=float, default=1e-1)
    p.add_argument("--eigen-form", choices=("sharp", "smooth"), default="sharp")
    p.add_argument("--intrinsic-log-k0", type=float, default=2.0)
    p.set_defaults(func=cmd_ptgen)

    p = sub.add_parser("train", help="train the two-step models")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--site-epochs", type=int, default=4)
    p.add_argument("--ranker-epochs", type=int, default=6)
    p.add_argument("--max-site-steps", type=int, default=2000)
    p.add_argument("--max-ranker-steps", type=int, default=800)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="accuracy tables for trained models")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--model-dir")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--use-split", action="store_true",
                   help="evaluate the test partition of the 80/10/10 split")
    p.add_argument("--limit", type=int)
    p.add_argument("--k-sites", type=int, default=3)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="dataset histograms (CSV + figures)")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        apply_config(args, parser)
        return args.func(args, parser)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (MoleculeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
