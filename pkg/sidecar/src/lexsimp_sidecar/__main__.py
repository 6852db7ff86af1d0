"""Command line launcher: lexsimp-sidecar --port 8500 --mlm-model <id-or-path>."""

import argparse

from lexsimp_sidecar.config import ServiceConfig
from lexsimp_sidecar.service import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexsimp-sidecar")
    parser.add_argument("--port", type=int, default=8500)
    parser.add_argument("--mlm-model", help="fill-mask checkpoint id or path")
    parser.add_argument("--encoder-model",
                        help="encoder checkpoint; defaults to the MLM checkpoint")
    parser.add_argument("--generator-model", help="optional seq2seq checkpoint")
    parser.add_argument("--morphology-table", help="word -> analysis record JSON")
    parser.add_argument("--generator-table", help="complex -> simple JSON table")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-batch", type=int, default=64)
    parser.add_argument("--max-k", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--no-deterministic", action="store_true",
                        help="disable inference determinism mode")
    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    serve(ServiceConfig(
        mlm_model=args.mlm_model, encoder_model=args.encoder_model,
        generator_model=args.generator_model,
        morphology_table=args.morphology_table,
        generator_table=args.generator_table, device=args.device,
        port=args.port, max_batch=args.max_batch, max_k=args.max_k,
        deterministic=not args.no_deterministic, seed=args.seed))


if __name__ == "__main__":
    main()
