"""Command-line front end; flags mirror the extractor config."""

from __future__ import annotations

import argparse
import sys

from .corpus import CorpusError
from .encoders import EncoderError
from .extract import ExtractorConfig, extract, sidecar_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convembed",
        description="Encode every unique utterance of a corpus into an embedding-store file.",
    )
    parser.add_argument("--corpus", required=True, help="canonical corpus file (JSON lines)")
    parser.add_argument("--out", required=True, dest="output", help="embedding-store file to write")
    parser.add_argument(
        "--encoder", default="mock",
        help="encoder name: mock, mock:<dim>, or sbert:<model> (default: mock)",
    )
    parser.add_argument("--batch-size", type=int, default=64, dest="batch_size")
    parser.add_argument("--encoding", choices=("text", "binary"), default="text")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = ExtractorConfig(
            corpus=args.corpus,
            output=args.output,
            encoder=args.encoder,
            batch_size=args.batch_size,
            encoding=args.encoding,
        )
        report = extract(cfg)
    except (CorpusError, EncoderError, ValueError, OSError) as exc:
        print(f"convembed: error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {report.unique_keys} vectors (dim {report.dim}) from "
        f"{report.total_utterances} utterances; report at {sidecar_path(args.output)}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
