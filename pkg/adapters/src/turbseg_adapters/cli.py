"""CLI for the model adapters.

    turbseg-adapters flow     --frames DIR --out DIR [--k 5] [--backend farneback|raft]
    turbseg-adapters semantic --frames DIR --out DIR [--backend spectral|dinov2]
    turbseg-adapters refine   --frames DIR --prompts FILE --out DIR [--backend grabcut|sam2]
"""

from __future__ import annotations

import argparse
import logging
import sys

from .flow import run_flow_adapter
from .refiner import run_refiner_adapter
from .semantic import run_semantic_adapter


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="turbseg-adapters", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    flow = sub.add_parser("flow", help="dense + skip-interval optical flow as .flo")
    flow.add_argument("--frames", required=True)
    flow.add_argument("--out", required=True)
    flow.add_argument("--k", type=int, default=5)
    flow.add_argument("--backend", default="farneback", choices=("farneback", "raft"))
    flow.add_argument("--pattern", default="*.png")

    sem = sub.add_parser("semantic", help="objectness maps as grayscale PFM")
    sem.add_argument("--frames", required=True)
    sem.add_argument("--out", required=True)
    sem.add_argument("--backend", default="spectral", choices=("spectral", "dinov2"))
    sem.add_argument("--pattern", default="*.png")

    ref = sub.add_parser("refine", help="box prompts -> refined mask PNGs")
    ref.add_argument("--frames", required=True)
    ref.add_argument("--prompts", required=True)
    ref.add_argument("--out", required=True)
    ref.add_argument("--backend", default="grabcut", choices=("grabcut", "sam2"))
    ref.add_argument("--pattern", default="*.png")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "flow":
            n = run_flow_adapter(
                args.frames, args.out, k=args.k, backend=args.backend, pattern=args.pattern
            )
        elif args.command == "semantic":
            n = run_semantic_adapter(
                args.frames, args.out, backend=args.backend, pattern=args.pattern
            )
        else:
            n = run_refiner_adapter(
                args.frames, args.prompts, args.out,
                backend=args.backend, pattern=args.pattern,
            )
    except Exception as exc:
        print(f"adapter failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {n} files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
