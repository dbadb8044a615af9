"""Command line for the probability exporter."""

from __future__ import annotations

import argparse
import sys

from .errors import IcExportError
from .export import ExportJob, export_probabilities


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ic-export",
        description="Score masked tokens with a masked language model and "
                    "write a weight exchange file.")
    parser.add_argument("--corpus", required=True, help="standoff corpus JSON file")
    parser.add_argument("--masks", required=True,
                        help="mask file naming the tokens to score")
    parser.add_argument("--model", required=True,
                        help="path or identifier of a masked language model")
    parser.add_argument("--output", required=True, help="exchange file to write")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--device", default="cpu",
                        help="torch device for inference (default cpu)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(corpus_path=args.corpus, masks_path=args.masks,
                    model_path=args.model, output_path=args.output,
                    batch_size=args.batch_size, device=args.device)
    try:
        written = export_probabilities(job)
    except IcExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {written}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
