# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024

    Command line entry point. Exit codes: 0 success, 1 usage, 2 configuration, 3 runtime failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError
from terminaltables import AsciiTable

from auxcell.ac_types import AuxCellException, AuxCellSettingsModel, ConfigError, MetricsModel
from auxcell.genome import (
    connectivity_text,
    decode,
    encode,
    enumerate_connectivities,
    genome_to_text_table,
    search_space_size,
    sorted_connectivities,
)
from auxcell.graph import FeatureDesc, build, dump, estimate, export_dot, output_resolution
from auxcell.nn import evaluate
from auxcell.report import WINDOW, SearchReport
from auxcell.search import (
    SearchLog,
    full_train,
    load_trained,
    run_ablation,
    run_search,
    save_trained,
    top_k,
    train_arms,
    write_rows_csv,
)
from auxcell.settings import get_settings, merge_settings
from auxcell.tasks import EncoderStub, prepare_task
from auxcell.utilities import fingerprint, setup_logging


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage, this one raises so main can exit with 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# Helpers


def load_settings(args: argparse.Namespace, overrides: Optional[Dict] = None) -> AuxCellSettingsModel:
    """Config file (or the default chain), then the command line overrides."""
    try:
        settings = get_settings(Path(args.config) if args.config else None)
    except FileNotFoundError as e:
        raise ConfigError(str(e)) from e
    except ValueError as e:
        if isinstance(e, ValidationError):
            raise
        raise ConfigError(f"cannot parse the config file: {e}") from e
    return merge_settings(settings, overrides) if overrides else settings


def read_genomes(source: str) -> List[str]:
    """A genome file with one genome per line, or a genome text given inline."""
    path = Path(source)
    if not source.lstrip().startswith("[") and path.exists():
        return [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    return [source]


def metrics_table(metrics: MetricsModel, title: str) -> str:
    data = [["mIoU", "fwIoU", "mPA", "Reward"], [round(metrics.miou, 4), round(metrics.fwiou, 4), round(metrics.mpa, 4), round(metrics.reward, 4)]]
    return AsciiTable(data, title).table


def write_text(out: Optional[str], text: str) -> None:
    if out is None:
        print(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")
    logging.info(f"Wrote {path}")


def default_log_path(workdir: str, mode: str, seed: int) -> Path:
    return Path(workdir) / f"search-{mode}-s{seed}.jsonl"


# Commands


def cmd_prepare(args: argparse.Namespace) -> int:
    settings = load_settings(args)
    artifacts = prepare_task(settings, args.workdir, live_features=args.live_features)
    splits = artifacts.splits
    data = [
        ["Meta-train", "Meta-val", "Holdout", "Teacher reward", "Teacher epochs"],
        [len(splits.meta_train), len(splits.meta_val), len(splits.holdout), round(artifacts.teacher.holdout_reward, 4), artifacts.teacher.epochs],
    ]
    print(AsciiTable(data, "Task artifacts").table)
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    if args.resume:
        header, _ = SearchLog(args.resume).read(strict=False)
        settings = AuxCellSettingsModel(**header.settings)
        if args.workers is not None:
            settings = merge_settings(settings, {"search": {"workers": args.workers}})
        log_path = Path(args.resume)
    else:
        overrides: Dict = {"search": {}}
        for key, value in (("mode", args.mode), ("total_architectures", args.archs), ("seed", args.seed), ("workers", args.workers)):
            if value is not None:
                overrides["search"][key] = value
        settings = load_settings(args, overrides)
        log_path = Path(args.log) if args.log else default_log_path(args.workdir, settings.search.mode, settings.search.seed)

    artifacts = prepare_task(settings, args.workdir, live_features=args.live_features)
    result = run_search(settings, artifacts, log_path, resume=bool(args.resume))

    data = [["Rank", "Genome", "Final reward"]] + [[i + 1, text, round(value, 4)] for i, (text, value) in enumerate(result.top_k)]
    print(AsciiTable(data, f"Top {len(result.top_k)} of {len(result.records)} ({settings.search.mode})").table)
    print(f"log={log_path}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    if not args.log and not args.genome:
        raise UsageError("train needs a genome file or text, or --log with --top-k")
    overrides = {"full_train": {"seed": args.seed}} if args.seed is not None else None
    settings = load_settings(args, overrides)
    artifacts = prepare_task(settings, args.workdir)

    if args.log:
        _, records = SearchLog(args.log).read(strict=True)
        genomes = [text for text, _ in top_k(records, args.top_k)]
        arms = [args.aux_mode] if args.aux_mode else ["none", "classifier", "cell"]
        rows = train_arms(genomes, artifacts, settings, arms)
        out = Path(args.csv) if args.csv else Path(args.workdir) / "full_train.csv"
        write_rows_csv(out, rows)
        data = [["Rank", "Aux", "Reward", "Stripped", "Params", "MAdds"]] + [
            [row["rank"], row["aux_mode"], round(row["reward"], 4), round(row["stripped_reward"], 4), row["params"], row["madds"]] for row in rows
        ]
        print(AsciiTable(data, "Full training").table)
        print(f"csv={out}")
        return EXIT_OK
    for text in read_genomes(args.genome):
        genome = decode(text)
        result = full_train(genome, artifacts, settings, args.aux_mode)
        out = Path(args.out) if args.out else Path(args.workdir) / f"model-{fingerprint([encode(genome)])[:10]}-{result.aux_mode}"
        save_trained(out, result)
        print(metrics_table(result.metrics, f"Holdout {encode(genome)} ({result.aux_mode})"))
        print(f"checkpoint={out}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    settings = load_settings(args)
    genome, net, encoder = load_trained(args.checkpoint)
    if args.strip:
        net = net.strip_aux()
    artifacts = prepare_task(settings, args.workdir)
    dataset = getattr(artifacts.splits, args.split)
    metrics = evaluate(
        net,
        dataset,
        settings.task.num_classes,
        encoder=encoder,
        batch_size=settings.network.batch_size,
        ignore_index=settings.network.ignore_index,
    ).metrics()
    print(metrics_table(metrics, f"{args.split} {encode(genome)}"))
    return EXIT_OK


def _source_descs(settings: AuxCellSettingsModel) -> List[FeatureDesc]:
    return EncoderStub(settings.encoder.channels).feature_descs(settings.task.image_size)


def cmd_decode(args: argparse.Namespace) -> int:
    settings = load_settings(args)
    sources = _source_descs(settings)
    image = FeatureDesc(3, settings.task.image_size, settings.task.image_size, 1)
    for text in read_genomes(args.genome):
        genome = decode(text)
        print(genome_to_text_table(genome))
        ir = build(genome, sources, settings.network.search_adapt_channels, settings.task.num_classes, with_aux=False)
        params, madds = estimate(ir)
        height, width, stride = output_resolution(ir, image)
        print(f"params={params} madds={madds} output={height}x{width} stride={stride}")
    return EXIT_OK


def cmd_export_dot(args: argparse.Namespace) -> int:
    settings = load_settings(args)
    genome = decode(read_genomes(args.genome)[0])
    channels = settings.network.train_adapt_channels if args.train else settings.network.search_adapt_channels
    ir = build(genome, _source_descs(settings), channels, settings.task.num_classes, args.aux_mode != "none", args.aux_mode)
    write_text(args.out, dump(ir) if args.dump else export_dot(ir))
    return EXIT_OK


def cmd_enumerate(args: argparse.Namespace) -> int:
    specs = sorted_connectivities(enumerate_connectivities())
    lines = [connectivity_text(spec) for spec in specs] + [f"count={len(specs)}"]
    write_text(args.out, "\n".join(lines))
    sizes = search_space_size()
    print(f"connectivity_ordered={sizes['connectivity_ordered']}")
    print(f"connectivity_canonical={sizes['connectivity_canonical']}")
    print(f"cell_upper_bound={sizes['cell_upper_bound']} (before symmetry reduction)")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    report = SearchReport(args.logs, args.window)
    report.print_report()
    out = Path(args.out)
    for path in report.write_csv(out) + ([] if args.no_plots else report.plot(out)):
        print(f"wrote={path}")
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    overrides = {"ablation": {"seed": args.seed}} if args.seed is not None else None
    settings = load_settings(args, overrides)
    artifacts = prepare_task(settings, args.workdir)
    result = run_ablation(artifacts, settings, args.archs)
    out = Path(args.csv) if args.csv else Path(args.workdir) / "ablation.csv"
    write_rows_csv(out, result.rows)
    print(result.get_table())
    print(f"csv={out}")
    return EXIT_OK


# Parser


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON settings file (default: user file, then packaged defaults)")
    common.add_argument("--workdir", default="auxcell-work", help="Directory of task artifacts and outputs")
    common.add_argument("--log-level", default="info", choices=["debug", "info", "warning", "error"])

    parser = ArgumentParser(prog="auxcell", description="Desk scale architecture search for dense prediction decoders.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = commands.add_parser("prepare", parents=[common], help="Build or reuse the task artifacts")
    p.add_argument("--live-features", action="store_true", help="Do not cache encoder features")
    p.set_defaults(func=cmd_prepare)

    p = commands.add_parser("search", parents=[common], help="Run an rl or random search")
    p.add_argument("--mode", choices=["rl", "random"], default=None)
    p.add_argument("--archs", type=int, default=None, help="Total architectures")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--log", default=None, help="JSONL log path")
    p.add_argument("--resume", default=None, metavar="PATH", help="Continue the search recorded in this log")
    p.add_argument("--live-features", action="store_true")
    p.set_defaults(func=cmd_search)

    p = commands.add_parser("train", parents=[common], help="Fully train a genome, or the top-k genomes of a log")
    p.add_argument("genome", nargs="?", default=None, help="Genome file or genome text")
    p.add_argument("--aux-mode", choices=["none", "classifier", "cell"], default=None)
    p.add_argument("--out", default=None, help="Checkpoint path")
    p.add_argument("--log", default=None, help="Search log to take the top-k genomes from")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--csv", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = commands.add_parser("eval", parents=[common], help="Metrics of a trained checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--split", choices=["holdout", "meta_val", "meta_train"], default="holdout")
    p.add_argument("--strip", action="store_true", help="Delete the auxiliary nodes first")
    p.set_defaults(func=cmd_eval)

    p = commands.add_parser("decode", parents=[common], help="Validate and pretty print genomes")
    p.add_argument("genome", help="Genome file or genome text")
    p.set_defaults(func=cmd_decode)

    p = commands.add_parser("export-dot", parents=[common], help="Write the decoder graph as DOT")
    p.add_argument("genome", help="Genome file or genome text")
    p.add_argument("--aux-mode", choices=["none", "classifier", "cell"], default="cell")
    p.add_argument("--train", action="store_true", help="Use the full training width")
    p.add_argument("--dump", action="store_true", help="Line oriented debug text instead of DOT")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export_dot)

    p = commands.add_parser("enumerate", parents=[common], help="Enumerate the canonical connectivity structures")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_enumerate)

    p = commands.add_parser("report", parents=[common], help="Summarise search logs as tables and plots")
    p.add_argument("logs", nargs="+")
    p.add_argument("--out", default="report")
    p.add_argument("--window", type=int, default=WINDOW)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_report)

    p = commands.add_parser("ablate", parents=[common], help="Polyak, KD and aux component study")
    p.add_argument("--archs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(e, file=sys.stderr)
        return EXIT_USAGE

    setup_logging(args.log_level)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"auxcell: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ValidationError) as e:
        print(f"auxcell: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AuxCellException as e:
        print(f"auxcell: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
