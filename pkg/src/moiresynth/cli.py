"""Command line entry point: ``moiresynth <subcommand> ...``.

Exit status is 0 on success, 1 on a hard error and 2 when some items failed
while the rest completed.
"""

import argparse
import csv
import dataclasses
import logging
import sys

from . import __version__
from .config import ConfigError, config_from_dict, load_config
from .corpus import corpus_stats, write_stats_csv
from .imaging import load_image
from .metrics import hellinger_color_distance, rgbuv_histogram
from .pipeline import CorpusError, evaluate, evaluation_means, filter_patterns, synthesize
from .reporting import report

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2

logger = logging.getLogger("moiresynth")


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="moiresynth", description="Synthetic moire dataset tooling."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=_u64, help="override the configured seed")
        p.add_argument("--workers", type=_positive, help="worker processes")

    p = sub.add_parser("filter-patterns", help="crop and select pattern patches")
    common(p)
    p.add_argument("--input", required=True, help="directory of raw pattern frames")
    p.add_argument("--output", required=True, help="directory for accepted patches")

    p = sub.add_parser("synthesize", help="blend patterns into clean images")
    common(p)
    p.add_argument("--patterns", help="override pattern_dir")
    p.add_argument("--clean", help="override clean_dir")
    p.add_argument("--output", help="override output_dir")
    p.add_argument("--num-samples", type=_positive, help="override num_samples")
    p.add_argument("--multiply-only", action="store_true", help="plain multiply blending")
    p.add_argument("--tone-matrix", help="externally produced tone matrix (.npy or image)")

    p = sub.add_parser("evaluate", help="PSNR/SSIM of predictions against references")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("color-distance", help="Hellinger distance of RGB-uv histograms")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--config", help="JSON config file (histogram section)")

    p = sub.add_parser("stats", help="full-frame sharpness/colorfulness per image")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("report", help="summarize a synthesis manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _resolve_config(args, **overrides):
    cfg = load_config(args.config, check_paths=False)
    changes = {k: v for k, v in overrides.items() if v is not None}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    raw = dataclasses.replace(cfg, **changes).to_dict()
    return config_from_dict(raw, check_paths=True)


def _cmd_filter(args):
    cfg = _resolve_config(args)
    result = filter_patterns(args.input, args.output, cfg.selection, cfg.seed, cfg.workers)
    print(f"accepted {len(result.records)} patches -> {args.output}")
    return EXIT_PARTIAL if result.partial else EXIT_OK


def _cmd_synthesize(args):
    cfg = _resolve_config(
        args,
        pattern_dir=args.patterns,
        clean_dir=args.clean,
        output_dir=args.output,
        num_samples=args.num_samples,
        tone_matrix=args.tone_matrix,
        multiply_only=True if args.multiply_only else None,
    )
    result = synthesize(cfg)
    print(f"wrote {len(result.records)} items to {cfg.output_dir}")
    if result.failures:
        print(f"{len(result.failures)} items failed", file=sys.stderr)
    return EXIT_PARTIAL if result.partial else EXIT_OK


def _cmd_evaluate(args):
    rows, missing = evaluate(args.pred, args.ref)
    means = evaluation_means(rows)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "psnr", "ssim"])
        for r in rows:
            writer.writerow([r["name"], repr(r["psnr"]), repr(r["ssim"])])
        writer.writerow(["__mean__", repr(means["psnr"]), repr(means["ssim"])])
    print(f"{len(rows)} pairs: mean PSNR {means['psnr']:.4f} dB, mean SSIM {means['ssim']:.4f}")
    if not rows:
        return EXIT_ERROR
    return EXIT_PARTIAL if missing else EXIT_OK


def _cmd_color_distance(args):
    cfg = load_config(args.config, check_paths=False)
    ha = rgbuv_histogram(load_image(args.a), cfg.histogram)
    hb = rgbuv_histogram(load_image(args.b), cfg.histogram)
    print(repr(hellinger_color_distance(ha, hb)))
    return EXIT_OK


def _cmd_stats(args):
    rows, failures = corpus_stats(args.input)
    write_stats_csv(rows, args.out)
    if failures and not rows:
        return EXIT_ERROR
    return EXIT_PARTIAL if failures else EXIT_OK


def _cmd_report(args):
    summary, errors = report(args.manifest, args.out)
    print(f"summarized {len(summary)} quantities -> {args.out}")
    return EXIT_PARTIAL if errors else EXIT_OK


COMMANDS = {
    "filter-patterns": _cmd_filter,
    "synthesize": _cmd_synthesize,
    "evaluate": _cmd_evaluate,
    "color-distance": _cmd_color_distance,
    "stats": _cmd_stats,
    "report": _cmd_report,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CorpusError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
