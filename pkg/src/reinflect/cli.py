"""Command-line interface: ``reinflect {patches|enhance|oracle|align|train|predict|evaluate|tune}``.

Logs go to stderr, data to files or stdout.  A flat ``key=value`` file
passed via ``--config`` supplies defaults that explicit flags override.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import glyphs, patches, pipeline

logger = logging.getLogger("reinflect")


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        w, _, h = text.partition("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected WxH") from None


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def build_parser(defaults: Optional[dict] = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reinflect",
        description="Morphological reinflection via transducer edit actions.",
    )
    parser.add_argument("--config", help="flat key=value file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: list[argparse.ArgumentParser] = []
    original_add = sub.add_parser

    def add_parser(*args, **kwargs):
        p = original_add(*args, **kwargs)
        subparsers.append(p)
        return p

    sub.add_parser = add_parser  # type: ignore[method-assign]

    p = sub.add_parser("patches", help="build a patch lookup table from glyph diffs")
    p.add_argument("--font", help="font file or directory of U+XXXX.pbm files")
    p.add_argument("--grid", type=_parse_grid, default=glyphs.DEFAULT_GRID)
    p.add_argument("--pt", type=int, default=glyphs.DEFAULT_POINT_SIZE)
    p.add_argument("--ranges", default="default",
                   help="'default' or comma-separated hex ranges (0020-007E,...)")
    p.add_argument("--patch-threshold", type=float, default=patches.DEFAULT_THRESHOLD)
    p.add_argument("--alphabet-from", help="filter the table for this data file")
    p.add_argument("--base-overrides",
                   help="char<TAB>base file extending the base-letter map")
    p.add_argument("--out", required=True)

    p = sub.add_parser("enhance", help="hallucinate artificial training samples")
    p.add_argument("--data", required=True)
    p.add_argument("--factor", type=int, default=1)
    p.add_argument("--min-support", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="emit gold action sequences for a data file")
    p.add_argument("--table")
    p.add_argument("--data", required=True)

    p = sub.add_parser("align", help="show patch-aware alignments for a data file")
    p.add_argument("--table")
    p.add_argument("--pairs", required=True)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--train", required=True)
    p.add_argument("--dev")
    p.add_argument("--table")
    p.add_argument("--use-patches", action="store_true")
    p.add_argument("--enhance-factor", type=int, default=0)
    p.add_argument("--min-support", type=int, default=1)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--embed", type=int, default=16)
    p.add_argument("--epochs", type=int, default=pipeline.DEFAULT_EPOCHS)
    p.add_argument("--patience", type=int, default=pipeline.DEFAULT_PATIENCE)
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--train-beam", type=int, default=0,
                   help="early-update beam training width (0 = off)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--metrics", help="per-epoch TSV log path")

    p = sub.add_parser("predict", help="decode a covered test file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score predictions against gold data")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)

    p = sub.add_parser("tune", help="hyperparameter/seed grid search")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--table")
    p.add_argument("--seeds", type=_parse_seeds, default=[1])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--epochs", type=int, default=pipeline.DEFAULT_EPOCHS)
    p.add_argument("--patience", type=int, default=pipeline.DEFAULT_PATIENCE)
    p.add_argument("--out", required=True)

    if defaults:
        parser.set_defaults(**defaults)
        for subparser in subparsers:
            subparser.set_defaults(**defaults)
    return parser


def _load_config_defaults(path: str) -> dict[str, str]:
    defaults = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise pipeline.PipelineError(
                    f"config: line {lineno} is not key=value"
                )
            defaults[key.strip().replace("-", "_")] = value.strip()
    return defaults


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    # pre-scan for --config so its values become defaults that explicit
    # flags can still override
    defaults: Optional[dict] = None
    if "--config" in argv:
        path = argv[argv.index("--config") + 1]
        raw = _load_config_defaults(path)
        defaults = {}
        for key, value in raw.items():
            if value.lower() in ("true", "false"):
                defaults[key] = value.lower() == "true"
            else:
                try:
                    defaults[key] = int(value)
                except ValueError:
                    defaults[key] = value
    return build_parser(defaults).parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s"
    )
    args = parse_args(argv)
    try:
        if args.command == "patches":
            font = args.font or glyphs.find_default_font()
            if not font:
                raise pipeline.PipelineError("patches: no --font and no default found")
            table = pipeline.cmd_patches(
                font, args.out, ranges=args.ranges, grid=args.grid,
                point_size=args.pt, threshold=args.patch_threshold,
                alphabet_from=args.alphabet_from,
                base_overrides=args.base_overrides,
            )
            logger.info("wrote %d entries in %d classes to %s",
                        len(table), table.class_count, args.out)
        elif args.command == "enhance":
            extra = pipeline.cmd_enhance(
                args.data, args.factor, args.min_support, args.seed, args.out
            )
            logger.info("wrote %d artificial samples to %s", len(extra), args.out)
        elif args.command == "oracle":
            for line in pipeline.cmd_oracle(args.table, args.data):
                print(line)
        elif args.command == "align":
            for line in pipeline.cmd_align(args.table, args.pairs):
                print(line)
        elif args.command == "train":
            cfg = pipeline.RunConfig(
                train_path=args.train, dev_path=args.dev, table_path=args.table,
                hidden_size=args.hidden, embed_size=args.embed,
                use_patches=args.use_patches, enhance_factor=args.enhance_factor,
                min_support=args.min_support, beam_size=args.beam,
                train_beam=args.train_beam,
                epochs=args.epochs, patience=args.patience, seed=args.seed,
            )
            trained = pipeline.cmd_train(cfg, args.checkpoint, args.metrics)
            logger.info("best epoch %d; checkpoint written to %s",
                        trained.best_epoch, args.checkpoint)
        elif args.command == "predict":
            preds = pipeline.cmd_predict(args.checkpoint, args.data, args.out, args.beam)
            logger.info("wrote %d predictions to %s", len(preds), args.out)
        elif args.command == "evaluate":
            acc, lev = pipeline.cmd_evaluate(args.pred, args.gold)
            print(f"accuracy\t{acc:.4f}")
            print(f"avg_levenshtein\t{lev:.4f}")
        elif args.command == "tune":
            base = pipeline.RunConfig(
                train_path=args.train, dev_path=args.dev, table_path=args.table,
                epochs=args.epochs, patience=args.patience,
            )
            report = pipeline.cmd_tune(base, args.seeds, jobs=args.jobs)
            with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(pipeline.tune_report_tsv(report))
            logger.info("tune report written to %s", args.out)
    except Exception as exc:
        logger.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
