"""Command-line interface.

Subcommands mirror the pipeline stages so any stage can be re-run against
the intermediates of a previous run:

    turbseg run     --config run.toml [--stage NAME] [--seed N] [--dump-intermediates DIR]
    turbseg cues    --config run.toml
    turbseg propose --config run.toml
    turbseg refine  --config run.toml
    turbseg eval    --config run.toml
    turbseg serve   --config run.toml [--host H] [--port P]
    turbseg synth   --out DIR [--frames N] [--seed N]
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import calibsvc, pipeline, synth
from .config import load_config
from .errors import TurbsegError


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline TOML config")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument(
        "--dump-intermediates",
        metavar="DIR",
        default=None,
        help="write overlays and pre-filter boxes under DIR (default: run dir)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="turbseg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline (or one stage)")
    _add_common(run)
    run.add_argument("--stage", choices=pipeline.STAGES, default=None)

    for name, help_text in (
        ("cues", "compute and dump cue maps only"),
        ("propose", "fuse cues and export box prompts"),
        ("refine", "produce final masks from prompts"),
        ("eval", "score final masks against ground truth"),
    ):
        stage = sub.add_parser(name, help=help_text)
        _add_common(stage)

    serve = sub.add_parser("serve", help="start the calibration service")
    serve.add_argument("--config", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)

    gen = sub.add_parser("synth", help="generate a synthetic benchmark sequence")
    gen.add_argument("--out", required=True, help="directory for frames/ and gt/")
    gen.add_argument("--frames", type=int, default=60)
    gen.add_argument("--seed", type=int, default=7)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        if args.command == "serve":
            calibsvc.serve(args.config, host=args.host, port=args.port)
            return 0
        if args.command == "synth":
            cfg = synth.SynthConfig(frames=args.frames, seed=args.seed)
            frames, masks = synth.generate_sequence(cfg)
            from pathlib import Path

            out = Path(args.out)
            synth.write_sequence(frames, masks, out / "frames", out / "gt")
            print(f"wrote {len(frames)} frames to {out}")
            return 0

        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.dump_intermediates is not None:
            cfg = dataclasses.replace(
                cfg,
                output=dataclasses.replace(
                    cfg.output, out_dir=args.dump_intermediates, dump_intermediates=True
                ),
            )
        stage = args.stage if args.command == "run" else args.command
        report = pipeline.run(cfg, stage=stage)
        if report is not None:
            print(report.format_table())
        return 0
    except TurbsegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
