"""Command-line interface.

Every subcommand reads JSONL/JSON inputs, writes its result to ``-o`` (stdout
by default) and logs to stderr. Exit status is 0 on success, 1 when an input
fails validation and 2 on I/O errors.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

from entangle import __version__
from entangle.client import Corrector
from entangle.config import LOG_LEVELS, Config
from entangle.errors import ConfigError, EntangleError
from entangle.evaluation.metrics import EvalReport, format_report
from entangle.inference import DEFAULT_ALPHA_GRID

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

_HANDLER_NAME = "entangle-cli"


def _configure_logging(level: int) -> None:
    package_logger = logging.getLogger("entangle")
    package_logger.setLevel(level)
    for handler in package_logger.handlers:
        if handler.get_name() == _HANDLER_NAME:
            handler.setLevel(level)
            handler.setStream(sys.stderr)
            return
    handler = logging.StreamHandler(sys.stderr)
    handler.set_name(_HANDLER_NAME)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    package_logger.addHandler(handler)


class ArgParser(argparse.ArgumentParser):
    """Raises ``ConfigError`` on bad arguments instead of exiting."""

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def _common_options() -> argparse.ArgumentParser:
    common = ArgParser(add_help=False)
    common.add_argument("--labels", metavar="FILE", help="newline-separated label names")
    common.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper, help="logging level")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("--seed", type=int, default=0, help="seed for every random draw")
    return common


def build_arg_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = ArgParser(
        prog="entangle",
        description="Entanglement-aware MAP correction of multi-label predictions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("stats", parents=[common], help="label statistics of a gold file")
    p.add_argument("gold")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("agree", parents=[common], help="inter-annotator agreement")
    p.add_argument("annotations")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--gold-out", help="write majority-vote gold labels here")

    p = sub.add_parser("estimate-prior", parents=[common], help="fit the Ising prior")
    p.add_argument("gold")
    p.add_argument("--epsilon", type=float, default=None, help="add-ε smoothing (default 0.5)")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("parse-responses", parents=[common], help="tagged answers to predictions")
    p.add_argument("raw")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--fill", choices=("error", "neutral"), default="error")

    p = sub.add_parser("infer", parents=[common], help="MAP decoding at one α")
    p.add_argument("predictions")
    p.add_argument("--prior", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-normalize", action="store_true", help="keep probability pairs as given")
    p.add_argument("--metrics-out", help="write Prometheus metrics here")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("evaluate", parents=[common], help="score predictions against gold")
    p.add_argument("predictions")
    p.add_argument("gold")
    p.add_argument("--zero-division", type=int, choices=(0, 1), default=0)
    p.add_argument("--with-baseline", action="store_true", help="also score the α=0 decode")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("sweep", parents=[common], help="evaluate MAP decoding over an α grid")
    p.add_argument("predictions")
    p.add_argument("gold")
    p.add_argument("--prior", required=True)
    p.add_argument(
        "--alphas", type=float, nargs="+", default=None,
        help=f"α grid (default {' '.join(f'{a:g}' for a in DEFAULT_ALPHA_GRID)})",
    )
    p.add_argument("--zero-division", type=int, choices=(0, 1), default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-normalize", action="store_true", help="keep probability pairs as given")
    p.add_argument("--metrics-out", help="write Prometheus metrics here")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("synth", parents=[common], help="sample labeled items from a prior")
    p.add_argument("--prior", required=True)
    p.add_argument("-n", type=int, required=True, dest="count")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("analyze", parents=[common], help="co-occurrence, MI and lift matrices")
    p.add_argument("gold")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--bits", action="store_true", help="mutual information in bits")
    p.add_argument("--csv-dir", help="also write each matrix as CSV")
    p.add_argument("-o", "--output", default="-")

    return parser


def _config_from_args(args: argparse.Namespace) -> Config:
    log_level = args.log_level or ("DEBUG" if args.verbose else None)
    options = {
        "labels_file": args.labels,
        "seed": args.seed,
        "debug": True if args.verbose else None,
        "log_level": log_level,
    }
    if getattr(args, "epsilon", None) is not None:
        options["epsilon"] = args.epsilon
    if getattr(args, "alpha", None) is not None:
        options["alpha"] = args.alpha
    if getattr(args, "alphas", None) is not None:
        options["alphas"] = args.alphas
    if getattr(args, "zero_division", None) is not None:
        options["zero_division"] = args.zero_division
    if getattr(args, "fill", None) is not None:
        options["fill_policy"] = args.fill
    if getattr(args, "workers", None) is not None:
        options["workers"] = args.workers
    if getattr(args, "no_normalize", False):
        options["normalize"] = False
    return Config(**options)


def _write_metrics(corrector: Corrector, path: Optional[str]) -> None:
    if not path:
        return
    text = corrector.metrics_exposition()
    if not text:
        logger.warning("prometheus-client is not installed; no metrics written")
        return
    corrector.transport.write_text(path, text)


def cmd_stats(corrector: Corrector, args: argparse.Namespace) -> int:
    data = corrector.transport.read_gold(args.gold, corrector.space)
    corrector.transport.write_json(args.output, corrector.statistics(data).as_dict())
    return EXIT_OK


def cmd_agree(corrector: Corrector, args: argparse.Namespace) -> int:
    annotations = corrector.transport.read_annotations(args.annotations, corrector.space)
    corrector.transport.write_json(args.output, corrector.agreement(annotations))
    if args.gold_out:
        count = corrector.transport.write_gold(args.gold_out, annotations.majority_gold())
        logger.info(f"Wrote {count} majority-vote gold items to {args.gold_out}")
    return EXIT_OK


def cmd_estimate_prior(corrector: Corrector, args: argparse.Namespace) -> int:
    data = corrector.transport.read_gold(args.gold, corrector.space)
    corrector.estimate_prior(data, source=str(args.gold))
    corrector.save_prior(args.output)
    return EXIT_OK


def cmd_parse_responses(corrector: Corrector, args: argparse.Namespace) -> int:
    responses = corrector.transport.read_responses(args.raw)
    records = corrector.parse_responses(responses)
    corrector.transport.write_predictions(args.output, records)
    return EXIT_OK


def cmd_infer(corrector: Corrector, args: argparse.Namespace) -> int:
    prior = corrector.load_prior(args.prior)
    records = corrector.transport.read_predictions(
        args.predictions, prior.space, corrector.config.normalize
    )
    results = corrector.infer(records)
    corrector.transport.write_map_results(args.output, results)
    _write_metrics(corrector, args.metrics_out)
    return EXIT_OK


def cmd_evaluate(corrector: Corrector, args: argparse.Namespace) -> int:
    space = corrector.space
    transport = corrector.transport
    ids, predictions = transport.read_label_vectors(args.predictions, space)
    gold = transport.read_gold(args.gold, space)
    baseline = None
    if args.with_baseline:
        _, baseline = transport.read_label_vectors(args.predictions, space, field_name="baseline")
    result = corrector.evaluate(ids, predictions, gold, baseline)
    if args.format == "text":
        title = "corrected" if baseline is not None else None
        text = format_report(EvalReport.from_dict(result["report"]), title=title)
        if baseline is not None:
            text += "\n\n" + format_report(EvalReport.from_dict(result["baseline"]), title="baseline")
        transport.write_text(args.output, text)
    else:
        transport.write_json(args.output, result)
    return EXIT_OK


def cmd_sweep(corrector: Corrector, args: argparse.Namespace) -> int:
    prior = corrector.load_prior(args.prior)
    records = corrector.transport.read_predictions(
        args.predictions, prior.space, corrector.config.normalize
    )
    gold = corrector.transport.read_gold(args.gold, prior.space)
    report = corrector.sweep(records, gold)
    corrector.transport.write_json(args.output, report.as_dict())
    _write_metrics(corrector, args.metrics_out)
    return EXIT_OK


def cmd_synth(corrector: Corrector, args: argparse.Namespace) -> int:
    corrector.load_prior(args.prior)
    data = corrector.synthesize(args.count)
    corrector.transport.write_gold(args.output, data)
    return EXIT_OK


def cmd_analyze(corrector: Corrector, args: argparse.Namespace) -> int:
    data = corrector.transport.read_gold(args.gold, corrector.space)
    analysis = corrector.analyze(data, args.epsilon, base="bits" if args.bits else "nats")
    corrector.transport.write_json(args.output, analysis)
    if args.csv_dir:
        directory = Path(args.csv_dir)
        for key in ("cooccurrence", "mutual_information", "lift"):
            corrector.transport.write_matrix_csv(
                directory / f"{key}.csv", analysis["labels"], analysis[key]
            )
        logger.info(f"Wrote matrix CSVs to {directory}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[Corrector, argparse.Namespace], int]] = {
    "stats": cmd_stats,
    "agree": cmd_agree,
    "estimate-prior": cmd_estimate_prior,
    "parse-responses": cmd_parse_responses,
    "infer": cmd_infer,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
    "analyze": cmd_analyze,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging(logging.WARNING)
    try:
        args = build_arg_parser().parse_args(argv)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_VALIDATION
    try:
        config = _config_from_args(args)
        _configure_logging(config.logging_level)
        with Corrector(config) as corrector:
            return COMMANDS[args.command](corrector, args)
    except EntangleError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_VALIDATION
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
