"""Command-line interface.

Subcommands: validate, stats, evaluate, agreement, mask. Every option can
also be supplied through a JSON config file (--config); explicit flags win
over config values. Relative corpus paths are resolved against the
MASKEVAL_CORPUS_ROOT environment variable when it is set.

Exit codes: 0 success, 1 content findings (validation violations),
2 operational failure (unreadable/malformed inputs, missing masks).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import agreement as agreement_mod
from . import metrics as metrics_mod
from .corpus import Corpus, compute_stats, load_corpus
from .errors import MaskEvalError, MissingMask
from .ic import UniformIc, UnigramIc, load_ic_file
from .masker import MaskerConfig, apply_mask, merge_spans, run_masker
from .model import validate
from .report import ReportBundle, emit, false_negative_breakdown

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_FAILURE = 2


def _resolve_corpus_path(path: str) -> Path:
    p = Path(path)
    root = os.environ.get("MASKEVAL_CORPUS_ROOT")
    if root and not p.is_absolute() and not p.exists():
        candidate = Path(root) / p
        if candidate.exists():
            return candidate
    return p


def _load_filtered_corpus(args) -> Corpus:
    corpus = load_corpus(_resolve_corpus_path(args.corpus),
                         split_manifest=getattr(args, "splits", None))
    splits_filter = getattr(args, "only_splits", None)
    if splits_filter:
        wanted = set(splits_filter.split(","))
        docs = tuple(d for d in corpus.documents if d.split in wanted)
        corpus = Corpus(documents=docs, source_path=corpus.source_path,
                        load_report=corpus.load_report)
    return corpus


def _masker_config(args) -> MaskerConfig:
    """Build the masker configuration from the config file's masker section."""
    section = getattr(args, "masker", None)
    if not section:
        return MaskerConfig()
    if not isinstance(section, dict):
        raise MaskEvalError("config key 'masker' must hold an object")
    known = {"enabled", "min_digit_run", "gazetteer_paths"}
    unknown = set(section) - known
    if unknown:
        raise MaskEvalError(f"unknown masker config keys: {sorted(unknown)}")
    kwargs = dict(section)
    if "enabled" in kwargs:
        kwargs["enabled"] = tuple(kwargs["enabled"])
    return MaskerConfig(**kwargs)


def _make_ic_provider(args, corpus: Corpus):
    kind = getattr(args, "ic", "uniform") or "uniform"
    if kind == "uniform":
        return UniformIc()
    if kind == "unigram":
        return UnigramIc(corpus)
    if kind == "external":
        ic_file = getattr(args, "ic_file", None)
        if not ic_file:
            raise MaskEvalError("--ic external requires --ic-file")
        return load_ic_file(ic_file)
    raise MaskEvalError(f"unknown ic provider {kind!r}")


def _figures_dir(args, written: list[Path]) -> Path:
    if getattr(args, "figures_dir", None):
        return Path(args.figures_dir)
    first = written[0]
    if first.is_dir() or args.format == "csv":
        return Path(args.output)
    return first.parent / (first.stem + "_figures")


def _emit_bundle(bundle: ReportBundle, args) -> None:
    if getattr(args, "output", None):
        written = emit(bundle, args.format, args.output)
        for path in written:
            print(f"wrote {path}")
        if getattr(args, "figures", False):
            from .figures import render_figures

            for path in render_figures(bundle, _figures_dir(args, written)):
                print(f"wrote {path}")
    else:
        from .report import _round_floats, bundle_to_dict

        json.dump(_round_floats(bundle_to_dict(bundle)), sys.stdout,
                  sort_keys=True, indent=1)
        print()


def cmd_validate(args) -> int:
    corpus = load_corpus(_resolve_corpus_path(args.corpus),
                         split_manifest=getattr(args, "splits", None))
    if args.recheck:
        violations = [v for doc in corpus.documents for v in validate(doc)]
    else:
        violations = list(corpus.load_report.violations)
    for violation in violations:
        print(violation)
    print(f"{len(corpus.documents)} document(s), {len(violations)} violation(s)")
    return EXIT_FINDINGS if violations else EXIT_OK


def cmd_stats(args) -> int:
    corpus = _load_filtered_corpus(args)
    stats = compute_stats(corpus)
    print(f"documents:            {stats.n_documents}")
    print(f"document annotations: {stats.n_document_annotations}")
    print(f"entities:             {stats.n_entities}")
    print(f"mentions:             {stats.n_mentions}")
    print(f"tokens:               {stats.n_tokens}")
    for name, split in sorted(stats.per_split.items()):
        print(f"split {name}: {split.documents} docs, {split.annotations} annotations")
    for entity_type, row in sorted(stats.per_entity_type.items()):
        print(f"{entity_type}: {row.mentions} mentions, {row.direct} direct, "
              f"{row.quasi} quasi, {row.confidential} confidential")
    if args.output:
        _emit_bundle(ReportBundle(stats=stats,
                                  metadata={"corpus": str(args.corpus)}), args)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    corpus = _load_filtered_corpus(args)
    if bool(args.masks) == bool(args.use_masker):
        raise MaskEvalError("provide exactly one mask source: --masks FILE or --use-masker")
    if args.masks:
        masks = metrics_mod.load_masks(args.masks, corpus)
    else:
        config = _masker_config(args)
        masks = {}
        for doc in corpus.documents:
            mask, _ = run_masker(doc, config)
            masks[doc.doc_id] = mask
    ic_provider = _make_ic_provider(args, corpus)
    report = metrics_mod.evaluate(corpus, masks, ic_provider, lenient=args.lenient)
    errors = false_negative_breakdown(corpus, masks, lenient=args.lenient)
    bundle = ReportBundle(metrics=report, errors=errors,
                          metadata={"corpus": str(args.corpus),
                                    "ic_provider": getattr(ic_provider, "kind", "uniform"),
                                    "mask_source": args.masks or "builtin-masker"})

    def show(name: str, ratio) -> None:
        value = "undefined" if ratio.value is None else format(ratio.value, ".4f")
        print(f"{name}: {value}  ({ratio.numerator}/{ratio.denominator})")

    show("entity recall, direct identifiers", report.er_di)
    show("entity recall, quasi identifiers", report.er_qi)
    show("token recall, all identifiers", report.r_token)
    show("token precision, all identifiers", report.p_token)
    show("weighted token precision", report.wp)
    _emit_bundle(bundle, args)
    return EXIT_OK


def cmd_agreement(args) -> int:
    corpus = _load_filtered_corpus(args)
    report = agreement_mod.corpus_agreement(
        corpus, include_characters=not args.no_characters)
    for row in report.rows:
        def fmt(v):
            return "undefined" if v is None else format(v, ".4f")
        print(f"{row.kind} / {row.unit} / {row.match_mode}: "
              f"AOA {fmt(row.aoa)}, kappa {fmt(row.fleiss_kappa)}, "
              f"alpha {fmt(row.krippendorff_alpha)}  "
              f"[{row.n_comparable}/{row.n_items} comparable]")
    if report.relations_kappa is not None:
        print(f"relations Cohen kappa: {report.relations_kappa:.4f} "
              f"over {report.n_relation_pairs} pairs")
    _emit_bundle(ReportBundle(agreement=report,
                              metadata={"corpus": str(args.corpus)}), args)
    return EXIT_OK


def _safe_filename(doc_id: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in doc_id) or "doc"


def cmd_mask(args) -> int:
    corpus = _load_filtered_corpus(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    spans_by_doc: dict[str, list[tuple[int, int, str]]] = {}
    predictions: dict[str, list[dict]] = {}

    if args.masks:
        loaded = metrics_mod.load_masks(args.masks, corpus)
        for doc in corpus.documents:
            mask = loaded.get(doc.doc_id)
            if mask is None:
                raw: list[tuple[int, int]] = []
            elif mask.masked_spans is not None:
                raw = list(mask.masked_spans)
            else:
                tokens = doc.tokens()
                raw = [(tokens[i].start, tokens[i].end)
                       for i in sorted(mask.masked_tokens)]
            spans_by_doc[doc.doc_id] = [(s, e, "MASK") for s, e in merge_spans(raw)]
    else:
        config = _masker_config(args)

        def predict(doc):
            _, predicted = run_masker(doc, config)
            return doc.doc_id, predicted

        with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
            for doc_id, predicted in pool.map(predict, corpus.documents):
                spans_by_doc[doc_id] = [(p.start, p.end, p.entity_type)
                                        for p in predicted]
                predictions[doc_id] = [
                    {"start": p.start, "end": p.end, "text": p.text,
                     "entity_type": p.entity_type,
                     "identifier_type": p.identifier_type,
                     "recognizer": p.recognizer}
                    for p in predicted
                ]

    for doc in sorted(corpus.documents, key=lambda d: d.doc_id):
        masked = apply_mask(doc.text, spans_by_doc[doc.doc_id],
                            style=args.style, placeholder=args.placeholder)
        target = outdir / (_safe_filename(doc.doc_id) + ".txt")
        target.write_text(masked, encoding="utf-8")
        print(f"wrote {target}")

    if args.emit_masks:
        payload = {doc_id: [[s, e] for s, e, _ in spans]
                   for doc_id, spans in sorted(spans_by_doc.items())}
        Path(args.emit_masks).write_text(json.dumps(payload, indent=1) + "\n",
                                         encoding="utf-8")
        print(f"wrote {args.emit_masks}")
    if args.emit_predictions and predictions:
        Path(args.emit_predictions).write_text(
            json.dumps(dict(sorted(predictions.items())), indent=1) + "\n",
            encoding="utf-8")
        print(f"wrote {args.emit_predictions}")
    return EXIT_OK


def _apply_config_defaults(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Fold --config file values in as subcommand defaults; explicit flags win."""
    if "--config" not in argv:
        return
    index = argv.index("--config")
    if index + 1 >= len(argv):
        raise MaskEvalError("--config requires a path")
    values = json.loads(Path(argv[index + 1]).read_text(encoding="utf-8"))
    if not isinstance(values, dict):
        raise MaskEvalError("config file must hold a JSON object")
    command = next((a for a in argv if not a.startswith("-")), None)
    subparser = getattr(parser, "subparser_map", {}).get(command)
    if subparser is None:
        raise MaskEvalError(f"--config given but no known subcommand in {argv!r}")
    subparser.set_defaults(**{k.replace("-", "_"): v for k, v in values.items()})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskeval",
        description="Evaluate text anonymization against multi-annotator ground truth.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("corpus", nargs="?", default=None,
                       help="corpus file in the standoff JSON format "
                            "(may also come from the config file)")
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--splits", help="sidecar JSON manifest mapping doc_id to split")
        p.add_argument("--only-splits", help="comma-separated split filter (e.g. dev,test)")

    subparser_map = {}

    p = subparser_map["validate"] = sub.add_parser("validate", help="check corpus invariants")
    common(p)
    p.add_argument("--recheck", action="store_true",
                   help="re-run validation instead of reusing the load report")
    p.set_defaults(func=cmd_validate)

    p = subparser_map["stats"] = sub.add_parser("stats", help="corpus statistics")
    common(p)
    p.add_argument("--output", help="write a report file instead of stdout only")
    p.add_argument("--format", choices=("structured", "csv"), default="structured")
    p.add_argument("--figures", action="store_true", help="render figures next to the report")
    p.add_argument("--figures-dir", help="directory for rendered figures")
    p.set_defaults(func=cmd_stats)

    p = subparser_map["evaluate"] = sub.add_parser(
        "evaluate", help="privacy/utility metrics for a system")
    common(p)
    p.add_argument("--masks", help="system mask file (char spans or token indices)")
    p.add_argument("--use-masker", action="store_true",
                   help="run the built-in rule-based masker instead of reading masks")
    p.add_argument("--ic", choices=("uniform", "unigram", "external"), default="uniform")
    p.add_argument("--ic-file", help="weight exchange file for --ic external")
    p.add_argument("--lenient", action="store_true",
                   help="treat documents without a mask entry as empty masks")
    p.add_argument("--output", help="report file (structured) or directory (csv)")
    p.add_argument("--format", choices=("structured", "csv"), default="structured")
    p.add_argument("--figures", action="store_true", help="render figures next to the report")
    p.add_argument("--figures-dir", help="directory for rendered figures")
    p.set_defaults(func=cmd_evaluate)

    p = subparser_map["agreement"] = sub.add_parser(
        "agreement", help="inter-annotator agreement report")
    common(p)
    p.add_argument("--no-characters", action="store_true",
                   help="skip the per-character agreement rows")
    p.add_argument("--output", help="report file (structured) or directory (csv)")
    p.add_argument("--format", choices=("structured", "csv"), default="structured")
    p.add_argument("--figures", action="store_true", help="render figures next to the report")
    p.add_argument("--figures-dir", help="directory for rendered figures")
    p.set_defaults(func=cmd_agreement)

    p = subparser_map["mask"] = sub.add_parser("mask", help="write masked document texts")
    common(p)
    p.add_argument("--outdir", help="directory for masked documents")
    p.add_argument("--masks", help="mask file to apply; omit to run the built-in masker")
    p.add_argument("--style", choices=("stars", "category-tag", "fixed-token"),
                   default="stars")
    p.add_argument("--placeholder", default="***", help="replacement for fixed-token style")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for the masker")
    p.add_argument("--emit-masks", help="also write the applied char spans as a mask file")
    p.add_argument("--emit-predictions", help="also write predicted mentions as JSON")
    p.set_defaults(func=cmd_mask)

    parser.subparser_map = subparser_map
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_defaults(parser, argv)
        args = parser.parse_args(argv)
        if getattr(args, "corpus", None) is None:
            raise MaskEvalError("no corpus given (positional argument or config key 'corpus')")
        if args.func is cmd_mask and not args.outdir:
            raise MaskEvalError("mask needs an output directory (--outdir or config key 'outdir')")
        return args.func(args)
    except MissingMask as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except MaskEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
