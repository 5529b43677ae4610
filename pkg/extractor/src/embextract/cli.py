"""Command-line entry point for the extractor."""

import argparse
import sys

from .corpus_io import CorpusError
from .extract import ExtractError, ExtractorConfig, extract, self_test


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emb-extract",
        description="Extract per-word contextual embeddings into an EMB1 file.",
    )
    parser.add_argument("--model", default="bert-base-uncased")
    parser.add_argument("--layer", type=int, default=10)
    parser.add_argument("--corpus", help="canonical JSON-lines corpus")
    parser.add_argument("--out", help="EMB1 output path")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--packing", choices=["pair", "single"], default="pair")
    parser.add_argument("--self-test", action="store_true",
                        help="run the builtin fixture checks and exit")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = ExtractorConfig(model=args.model, layer=args.layer,
                                 batch_size=args.batch_size, device=args.device,
                                 packing=args.packing)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        if args.self_test:
            report = self_test(config)
            print(f"self-test ok: {report['pairs']} pairs, dim {report['dim']}")
            return 0
        if not args.corpus or not args.out:
            parser.error("--corpus and --out are required unless --self-test is given")
        count = extract(args.corpus, config, args.out)
        print(f"wrote {count} pairs to {args.out}")
        return 0
    except (ExtractError, CorpusError, OSError) as exc:
        print(f"emb-extract: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
