"""Command-line entry point for reproducible batch runs.

Subcommands: ``annotate``, ``identify``, ``simplify``, ``evaluate``,
``manual-report``, ``split``, ``stats``.  A config file (flat TOML-like
key/value document with ``[providers.<id>]`` sections) supplies defaults;
command-line flags override it.  Exit codes: 0 success, 2 input/config
error, 3 provider/transport error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from lexsimp import corpus as corpus_mod
from lexsimp import cwi as cwi_mod
from lexsimp import evaluation as eval_mod
from lexsimp import providers as providers_mod
from lexsimp import selection as selection_mod
from lexsimp import substitution as subst_mod

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROVIDER = 3


class InputError(Exception):
    """Bad input or configuration; maps to exit code 2."""


# ---------------------------------------------------------------------------
# Config document


def _parse_scalar(raw: str, path: str, lineno: int):
    raw = raw.strip()
    if raw.startswith("[") and raw.endswith("]"):
        inner = raw[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(part, path, lineno) for part in inner.split(",")]
    if (raw.startswith('"') and raw.endswith('"')) or (raw.startswith("'") and raw.endswith("'")):
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise InputError(f"{path}: line {lineno}: cannot parse value {raw!r}") from None


def load_config(path: str | Path) -> dict:
    """Parse the TOML-like config: ``key = value`` lines and dotted sections."""
    document: dict = {}
    section = document
    with open(path, encoding="utf-8-sig") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if stripped.startswith("[") and stripped.endswith("]"):
                section = document
                for part in stripped[1:-1].strip().split("."):
                    section = section.setdefault(part.strip(), {})
                continue
            key, sep, value = stripped.partition("=")
            if not sep:
                raise InputError(f"{path}: line {lineno}: expected 'key = value'")
            section[key.strip()] = _parse_scalar(value, str(path), lineno)
    return document


@dataclass
class RunConfig:
    """Resolved inputs of one command after merging config file and flags."""

    pairs: str | None = None
    alignments: str | None = None
    lexicon: str | None = None
    vectors: str | None = None
    input: str | None = None
    output_dir: str = "."
    k: int = 10
    cefr_threshold: str = "C1"
    cefr_default: str = "C2"
    normalize: bool = False
    seed: int | None = None
    train_fraction: float = 0.8
    jobs: int = 1
    variant: str = "all"
    require_gloss: bool = False
    trace: bool = False
    providers: dict = field(default_factory=dict)  # id -> descriptor section

    def require_paths(self, *names: str) -> None:
        for name in names:
            value = getattr(self, name)
            if not value:
                raise InputError(f"missing required input: --{name.replace('_', '-')}")
            if not Path(value).exists():
                raise InputError(f"{name} path does not exist: {value}")

    def require_seed(self) -> int:
        if self.seed is None:
            raise InputError("a --seed is mandatory for split commands")
        return self.seed


_CONFIG_KEYS = ("pairs", "alignments", "lexicon", "vectors", "input", "output_dir",
                "k", "cefr_threshold", "cefr_default", "normalize", "seed",
                "train_fraction", "jobs", "variant", "require_gloss", "trace")


def build_run_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        if not Path(args.config).exists():
            raise InputError(f"config file does not exist: {args.config}")
        document = load_config(args.config)
        for key in _CONFIG_KEYS:
            if key in document:
                setattr(config, key, document[key])
        config.providers = dict(document.get("providers", {}))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    # Shorthand provider flags; a location starting with http(s):// is HTTP.
    for flag, kind in (("morph", "morphology"), ("mlm", "mlm"), ("generator", "generator")):
        location = getattr(args, flag, None)
        if location:
            config.providers[flag] = {"kind": kind, "location": location}
    for entry in getattr(args, "encoder", None) or []:
        provider_id, sep, location = entry.partition("=")
        if not sep:
            provider_id, location = "encoder", entry
        config.providers[provider_id] = dict(config.providers.get(provider_id, {}),
                                             kind="encoder", location=location)
    return config


def open_configured_provider(config: RunConfig, provider_id: str,
                             kind: providers_mod.ProviderKind):
    section = config.providers.get(provider_id)
    if section is None:
        raise InputError(f"no provider {provider_id!r} configured")
    location = section.get("location") or section.get("url") or section.get("path")
    if not location:
        raise InputError(f"provider {provider_id!r} has no location")
    transport_name = section.get("transport")
    if transport_name:
        transport = providers_mod.Transport(transport_name)
    else:
        transport = (providers_mod.Transport.HTTP if str(location).startswith(("http://", "https://"))
                     else providers_mod.Transport.FIXTURE)
    try:
        descriptor = providers_mod.ProviderDescriptor(
            id=provider_id, kind=kind, transport=transport, location=str(location),
            max_in_flight=int(section.get("max_in_flight", 1)),
            timeout=float(section.get("timeout", 10.0)),
            bearer_token=section.get("bearer_token"))
    except ValueError as exc:
        raise InputError(f"provider {provider_id!r}: {exc}") from exc
    return providers_mod.open_provider(descriptor)


# ---------------------------------------------------------------------------
# Output helpers


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_line(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n"


def _out_dir(config: RunConfig) -> Path:
    return Path(config.output_dir)


# ---------------------------------------------------------------------------
# Subcommands


def _load_annotated_corpus(config: RunConfig) -> list:
    config.require_paths("pairs", "alignments")
    try:
        pairs = corpus_mod.load_parallel_corpus(config.pairs, config.alignments,
                                                normalize=config.normalize)
    except corpus_mod.CorpusFormatError as exc:
        raise InputError(str(exc)) from exc
    if not pairs:
        raise InputError("empty corpus")
    return corpus_mod.annotate_corpus(pairs, normalize=config.normalize)


def _write_stats(config: RunConfig, stats: corpus_mod.OperationStats) -> None:
    out = _out_dir(config)
    atomic_write_text(out / "stats.json", stats.to_json() + "\n")
    buffer = io.StringIO()
    stats.write_csv(buffer)
    atomic_write_text(out / "stats.csv", buffer.getvalue())


def cmd_annotate(config: RunConfig) -> int:
    pairs = _load_annotated_corpus(config)
    lines = []
    for i, pair in enumerate(pairs, start=1):
        lines.append(_json_line({
            "pair_id": i,
            "complex_tokens": list(pair.complex.tokens),
            "simple_tokens": list(pair.simple.tokens),
            "ops": [op.to_json() for op in pair.ops],
        }))
    atomic_write_text(_out_dir(config) / "operations.jsonl", "".join(lines))
    _write_stats(config, corpus_mod.operation_distribution(pairs))
    print(f"annotated {len(pairs)} pairs")
    return EXIT_OK


def cmd_stats(config: RunConfig) -> int:
    pairs = _load_annotated_corpus(config)
    stats = corpus_mod.operation_distribution(pairs)
    _write_stats(config, stats)
    for kind in corpus_mod.OpKind:
        pct = stats.percentages[kind] if stats.percentages else 0.0
        print(f"{kind.value}\t{stats.counts[kind]}\t{pct * 100:.2f}%")
    return EXIT_OK


def cmd_split(config: RunConfig) -> int:
    seed = config.require_seed()
    config.require_paths("pairs", "alignments")
    try:
        pairs = corpus_mod.load_parallel_corpus(config.pairs, config.alignments,
                                                normalize=config.normalize)
    except corpus_mod.CorpusFormatError as exc:
        raise InputError(str(exc)) from exc
    if not 0 < config.train_fraction < 1:
        raise InputError(f"train_fraction must be in (0, 1), got {config.train_fraction}")
    train, test = corpus_mod.split_corpus(pairs, config.train_fraction, seed)
    out = _out_dir(config)
    for name, subset in (("train", train), ("test", test)):
        tsv = "".join(f"{p.complex.text}\t{p.simple.text}\n" for p in subset)
        align = "".join(
            " ".join(f"{l.src_index}-{l.tgt_index}" for l in p.links) + "\n" for p in subset)
        atomic_write_text(out / f"{name}.tsv", tsv)
        atomic_write_text(out / f"{name}.align", align)
    print(f"split {len(pairs)} pairs into {len(train)} train / {len(test)} test")
    return EXIT_OK


def _read_sentences(path: str) -> list[str]:
    with open(path, encoding="utf-8-sig") as handle:
        return [line.rstrip("\n") for line in handle if line.strip()]


def _load_cwi_inputs(config: RunConfig):
    config.require_paths("input", "lexicon")
    default = cwi_mod.CefrLevel.parse(config.cefr_default)
    threshold = cwi_mod.CefrLevel.parse(config.cefr_threshold)
    lexicon = cwi_mod.CefrLexicon.load(config.lexicon, default_level=default)
    morph = open_configured_provider(config, "morph", providers_mod.ProviderKind.MORPHOLOGY)
    return _read_sentences(config.input), lexicon, threshold, morph


def _analyzed_tokens(sentence: str, config: RunConfig, lexicon, morph):
    surfaces = corpus_mod.tokenize(sentence, normalize=config.normalize)
    analyses = providers_mod.analyze(morph, surfaces)
    return cwi_mod.build_tokens(surfaces, analyses, lexicon)


def cmd_identify(config: RunConfig) -> int:
    sentences, lexicon, threshold, morph = _load_cwi_inputs(config)
    lines = []
    for i, sentence in enumerate(sentences, start=1):
        tokens = _analyzed_tokens(sentence, config, lexicon, morph)
        queue = cwi_mod.identify_complex(tokens, threshold)
        masked = [{"target_index": idx, "tokens": toks}
                  for idx, toks in cwi_mod.mask_variants(tokens, queue)]
        lines.append(_json_line({
            "sentence_id": str(i),
            "tokens": [t.surface for t in tokens],
            "levels": [t.level.name for t in tokens],
            "syllables": [t.syllables for t in tokens],
            "queue": queue,
            "masked": masked,
        }))
    atomic_write_text(_out_dir(config) / "targets.jsonl", "".join(lines))
    print(f"identified targets in {len(sentences)} sentences")
    return EXIT_OK


_VARIANT_CHOICES = {
    "mlm": (selection_mod.Variant.MLM,),
    "embedding": (selection_mod.Variant.EMBEDDING,),
    "combined": (selection_mod.Variant.COMBINED,),
    "all": (selection_mod.Variant.MLM, selection_mod.Variant.EMBEDDING,
            selection_mod.Variant.COMBINED),
}


def cmd_simplify(config: RunConfig) -> int:
    sentences, lexicon, threshold, morph = _load_cwi_inputs(config)
    config.require_paths("vectors")
    store = subst_mod.load_vectors(config.vectors)
    mlm = open_configured_provider(config, "mlm", providers_mod.ProviderKind.MLM)
    variants = _VARIANT_CHOICES.get(config.variant)
    if variants is None:
        raise InputError(f"unknown variant {config.variant!r}")
    ctx = selection_mod.PipelineContext(
        morph=morph, lexicon=lexicon, store=store, mlm=mlm, k=config.k,
        require_gloss=config.require_gloss, variants=variants)

    def run_one(item: tuple[int, str]) -> dict:
        i, sentence = item
        sentence_id = str(i)
        try:
            tokens = _analyzed_tokens(sentence, config, lexicon, morph)
        except providers_mod.ProviderError:
            return {"sentence_id": sentence_id,
                    "variants": {v.value: {"tokens": corpus_mod.tokenize(
                        sentence, normalize=config.normalize),
                        "replacements": [], "worst_level": "UNKNOWN",
                        "status": "partial"} for v in variants}}
        queue = cwi_mod.identify_complex(tokens, threshold)
        result = selection_mod.simplify_sentence(tokens, queue, ctx, sentence_id=sentence_id)
        return result.to_json(include_trace=config.trace)

    items = list(enumerate(sentences, start=1))
    if config.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(run_one, items))
    else:
        rows = [run_one(item) for item in items]

    atomic_write_text(_out_dir(config) / "results.jsonl",
                      "".join(_json_line(row) for row in rows))
    partial = sum(1 for row in rows
                  for v in row["variants"].values() if v["status"] != "ok")
    print(f"simplified {len(rows)} sentences ({partial} partial variant outputs)")
    return EXIT_PROVIDER if partial else EXIT_OK


def _slug(label: str) -> str:
    return "".join(ch.lower() if ch.isalnum() else "_" for ch in label).strip("_")


def _encoder_sections(config: RunConfig) -> list[str]:
    ids = [pid for pid, section in config.providers.items()
           if section.get("kind") == "encoder"]
    if not ids:
        raise InputError("no encoder provider configured")
    return ids


def cmd_evaluate(config: RunConfig, args: argparse.Namespace) -> int:
    if getattr(args, "idf", False):
        raise InputError("idf weighting is reserved but not implemented")
    out = _out_dir(config)
    tokenizer = lambda text: corpus_mod.tokenize(text, normalize=config.normalize)
    all_rows: list[eval_mod.ReportRow] = []
    histograms: list[tuple[str, str, eval_mod.Histogram]] = []

    for encoder_id in _encoder_sections(config):
        encoder = open_configured_provider(config, encoder_id,
                                           providers_mod.ProviderKind.ENCODER)
        baseline = float(config.providers[encoder_id].get("baseline", 0.0))
        if args.mode == "classification":
            if not args.targets:
                raise InputError("--targets is required")
            targets = [tokenizer(s) for s in _read_sentences(args.targets)]
            outputs = {}
            for variant in ("mlm", "embedding", "combined"):
                path = getattr(args, f"system_{variant}", None)
                if path:
                    outputs[variant] = [tokenizer(s) for s in _read_sentences(path)]
            report = eval_mod.evaluate_classification(targets, outputs, encoder,
                                                      encoder_id, baseline)
        else:
            for name in ("originals", "generated", "targets"):
                if not getattr(args, name, None):
                    raise InputError(f"--{name} is required for generative evaluation")
            originals = [tokenizer(s) for s in _read_sentences(args.originals)]
            generated = [tokenizer(s) for s in _read_sentences(args.generated)]
            targets = [tokenizer(s) for s in _read_sentences(args.targets)]
            if not len(originals) == len(generated) == len(targets):
                raise InputError(
                    f"line counts differ: {len(originals)} originals, "
                    f"{len(generated)} generated, {len(targets)} targets")
            instances = list(zip(originals, generated, targets))
            try:
                report = eval_mod.evaluate_generative(instances, encoder,
                                                      encoder_id, baseline)
            except ValueError as exc:
                raise InputError(str(exc)) from exc
        all_rows.extend(report.rows)
        for label, triples in report.per_sentence.items():
            histograms.append((encoder_id, label, eval_mod.f1_distribution(triples)))

    combined = eval_mod.EvaluationReport(rows=tuple(all_rows), per_sentence={})
    buffer = io.StringIO()
    combined.write_csv(buffer)
    atomic_write_text(out / "report.csv", buffer.getvalue())
    atomic_write_text(out / "report.json",
                      json.dumps(combined.to_json_dict(), ensure_ascii=False,
                                 sort_keys=True, indent=2) + "\n")
    for encoder_id, label, histogram in histograms:
        buffer = io.StringIO()
        histogram.write_csv(buffer)
        atomic_write_text(out / f"f1_hist_{_slug(encoder_id)}_{_slug(label)}.csv",
                          buffer.getvalue())
    print(f"wrote {len(all_rows)} report rows and {len(histograms)} histograms")
    return EXIT_OK


def cmd_manual_report(config: RunConfig, labels_path: str) -> int:
    if not labels_path or not Path(labels_path).exists():
        raise InputError(f"labels file does not exist: {labels_path}")
    try:
        labels = eval_mod.read_manual_labels(labels_path)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    distribution = eval_mod.aggregate_manual(labels)
    out = _out_dir(config)
    buffer = io.StringIO()
    distribution.write_csv(buffer)
    atomic_write_text(out / "manual_report.csv", buffer.getvalue())
    atomic_write_text(out / "manual_report.json",
                      json.dumps(distribution.to_json_dict(), ensure_ascii=False,
                                 sort_keys=True, indent=2) + "\n")
    for value in eval_mod.SCHEME_VALUES[distribution.scheme]:
        print(f"{value}\t{distribution.counts[value]}\t"
              f"{distribution.percentages[value] * 100:.1f}%")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML-like config file; flags override it")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--normalize", action="store_const", const=True, default=None,
                        help="fold alef variants and teh marbuta")


def _add_corpus_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pairs", help="two-column complex<TAB>simple TSV")
    parser.add_argument("--alignments", help="one line of i-j links per pair")


def _add_cwi_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="sentences to process, one per line")
    parser.add_argument("--lexicon", help="entry<TAB>level CEFR lexicon TSV")
    parser.add_argument("--morph", help="morphology provider fixture path or URL")
    parser.add_argument("--cefr-threshold", dest="cefr_threshold")
    parser.add_argument("--cefr-default", dest="cefr_default")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexsimp",
                                     description="Sentence-level lexical simplification toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("annotate", help="derive edit operations for a parallel corpus")
    _add_common(p)
    _add_corpus_args(p)

    p = commands.add_parser("stats", help="operation distribution of a parallel corpus")
    _add_common(p)
    _add_corpus_args(p)

    p = commands.add_parser("split", help="seeded train/test split of a parallel corpus")
    _add_common(p)
    _add_corpus_args(p)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)

    p = commands.add_parser("identify", help="complex word identification")
    _add_common(p)
    _add_cwi_args(p)

    p = commands.add_parser("simplify", help="run the full simplification pipeline")
    _add_common(p)
    _add_cwi_args(p)
    p.add_argument("--vectors", help="word vector text file")
    p.add_argument("--mlm", help="masked-LM provider fixture path or URL")
    p.add_argument("--variant", choices=sorted(_VARIANT_CHOICES))
    p.add_argument("--k", type=int)
    p.add_argument("--require-gloss", dest="require_gloss", action="store_const",
                   const=True, default=None, help="turn the gloss rule into a filter")
    p.add_argument("--trace", action="store_const", const=True, default=None,
                   help="include per-rule traces in the output")

    p = commands.add_parser("evaluate", help="embedding-similarity reports")
    _add_common(p)
    p.add_argument("--mode", choices=("classification", "generative"), required=True)
    p.add_argument("--targets", help="reference simple sentences, one per line")
    p.add_argument("--originals", help="complex sentences (generative mode)")
    p.add_argument("--generated", help="system generations (generative mode)")
    p.add_argument("--system-mlm", dest="system_mlm")
    p.add_argument("--system-embedding", dest="system_embedding")
    p.add_argument("--system-combined", dest="system_combined")
    p.add_argument("--encoder", action="append",
                   help="encoder provider as ID=LOCATION; repeatable")
    p.add_argument("--idf", action="store_true", help="(reserved)")

    p = commands.add_parser("manual-report", help="aggregate manual annotation labels")
    _add_common(p)
    p.add_argument("--labels", help="sentence_id,scheme,value CSV")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_run_config(args)
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
        if args.command == "annotate":
            return cmd_annotate(config)
        if args.command == "stats":
            return cmd_stats(config)
        if args.command == "split":
            return cmd_split(config)
        if args.command == "identify":
            return cmd_identify(config)
        if args.command == "simplify":
            return cmd_simplify(config)
        if args.command == "evaluate":
            return cmd_evaluate(config, args)
        if args.command == "manual-report":
            return cmd_manual_report(config, args.labels)
        raise InputError(f"unknown command {args.command!r}")
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except providers_mod.ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER


if __name__ == "__main__":
    sys.exit(main())
