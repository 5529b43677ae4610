"""Command-line front end: align, eval, tune, convert.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys

from . import __version__
from .aligner import (
    AlignConfig,
    OTKind,
    align_corpus,
    load_predictions,
    prediction_from_rows,
    write_predictions,
)
from .corpus import LinkSetting, parse_canonical, parse_pharaoh, serialize_canonical
from .cost import DistanceMetric
from .embeddings import load_embeddings
from .errors import DataError, NumericalError
from .evaluation import bin_by_null_ratio, corpus_metrics
from .fertility import MassKind
from .solvers import SolverConfig
from .tune import GridSpec, grid_search

_LINK_SETTINGS = {"sure": LinkSetting.SURE_ONLY, "sure+possible": LinkSetting.SURE_AND_POSSIBLE}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this tool reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is not in [0, 1]")
    return value


def _nonnegative(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{value} is negative")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{value} is not positive")
    return value


def _grid(text: str) -> tuple[float, ...]:
    """Parse `start:stop:step` (inclusive ends) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return tuple(round(start + i * step, 10) for i in range(count))
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse grid {text!r}") from None


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_to_dict(config: AlignConfig) -> dict:
    return {
        "ot": config.ot_kind.value,
        "reg": "sinkhorn" if config.regularized else "none",
        "cost": config.metric.value,
        "mass": config.mass.value,
        "kappa": config.kappa,
        "lambda": config.threshold,
        "epsilon": config.solver.epsilon,
        "tau": config.solver.tau,
        "mfrac": config.solver.m_fraction,
        "tolerance": config.solver.tolerance,
        "max_iterations": config.solver.max_iterations,
        "log_domain": config.solver.log_domain,
        "centering": config.centering,
    }


def config_from_dict(data: dict) -> AlignConfig:
    solver = SolverConfig(
        epsilon=data.get("epsilon", 0.1),
        tolerance=data.get("tolerance", 1e-6),
        max_iterations=data.get("max_iterations", 1000),
        tau=data.get("tau", 1.0),
        m_fraction=data.get("mfrac", 1.0),
        log_domain=data.get("log_domain", False),
    )
    return AlignConfig(
        ot_kind=OTKind(data["ot"]),
        regularized=data.get("reg", "sinkhorn") == "sinkhorn",
        metric=DistanceMetric(data.get("cost", "cosine")),
        mass=MassKind(data.get("mass", "uniform")),
        kappa=data.get("kappa", 0.0),
        threshold=data.get("lambda", 0.0),
        solver=solver,
        centering=data.get("centering", False),
    )


def _write_manifest(out_path, command: str, config: AlignConfig | None, inputs: dict) -> None:
    manifest = {
        "tool": "wordot",
        "version": __version__,
        "command": command,
        "config": config_to_dict(config) if config is not None else None,
        "inputs": {name: {"path": str(path), "sha256": _sha256(path)}
                   for name, path in inputs.items()},
        "output": str(out_path),
    }
    with open(f"{out_path}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _add_pipeline_flags(sub, with_lambda: bool = True):
    # defaults are None so a config file is overridden only by flags the
    # user actually typed; real defaults live in config_from_dict
    sub.add_argument("--ot", choices=[k.value for k in OTKind])
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--reg", choices=["sinkhorn", "none"])
    group.add_argument("--exact", action="store_true", help="shorthand for --reg none")
    sub.add_argument("--cost", choices=[m.value for m in DistanceMetric])
    sub.add_argument("--mass", choices=[k.value for k in MassKind])
    sub.add_argument("--epsilon", type=_positive)
    sub.add_argument("--tau", type=_nonnegative)
    sub.add_argument("--mfrac", type=_unit_interval)
    if with_lambda:
        sub.add_argument("--lambda", dest="threshold", type=_unit_interval)
    sub.add_argument("--kappa", type=_nonnegative)
    sub.add_argument("--centering", action="store_const", const=True)
    sub.add_argument("--tol", type=_positive)
    sub.add_argument("--max-iter", type=int)
    sub.add_argument("--log-domain", action="store_const", const=True)


def _config_from_args(args, parser, base: dict | None = None) -> AlignConfig:
    data = dict(base or {})
    flags = {
        "ot": args.ot,
        "cost": args.cost,
        "mass": args.mass,
        "kappa": args.kappa,
        "epsilon": args.epsilon,
        "tau": args.tau,
        "mfrac": args.mfrac,
        "tolerance": args.tol,
        "max_iterations": args.max_iter,
        "log_domain": args.log_domain,
        "centering": args.centering,
        "lambda": getattr(args, "threshold", None),
    }
    if args.exact:
        flags["reg"] = "none"
    elif args.reg is not None:
        flags["reg"] = args.reg
    data.update({key: value for key, value in flags.items() if value is not None})
    if "ot" not in data:
        parser.error("--ot is required (as a flag or in the config file)")
    if data["ot"] == "uot" and data.get("reg") == "none":
        parser.error("unbalanced transport is entropic-only; drop --exact")
    try:
        return config_from_dict(data)
    except ValueError as exc:
        parser.error(str(exc))


def _cmd_align(args, parser) -> int:
    base = None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
    config = _config_from_args(args, parser, base)
    corpus = parse_canonical(args.corpus)
    table = load_embeddings(args.emb)
    predictions = align_corpus(corpus, table, config, jobs=args.jobs)
    write_predictions(args.out, corpus, predictions)
    _write_manifest(args.out, "align", config, {"corpus": args.corpus, "emb": args.emb})
    return 0


def _cmd_eval(args, parser) -> int:
    corpus = parse_canonical(args.corpus)
    raw = load_predictions(args.pred)
    predictions = {}
    for pair, _ in corpus.pairs:
        if pair.id not in raw:
            raise DataError(f"no prediction for pair id {pair.id!r}")
        predictions[pair.id] = prediction_from_rows(raw[pair.id], pair.n, pair.m)
    setting = _LINK_SETTINGS[args.links]
    report = corpus_metrics(predictions, corpus, setting)
    print(f"precision: {100 * report.macro_precision:.1f}")
    print(f"recall: {100 * report.macro_recall:.1f}")
    print(f"f1: {100 * report.macro_f1:.1f}")
    bins = None
    if args.bins:
        bins = bin_by_null_ratio(corpus, predictions, setting, args.bins)
        print("bin\tratio_lo\tratio_hi\tcount\tmean_f1")
        for index, row in enumerate(bins, start=1):
            print(f"{index}\t{row.ratio_lo:.3f}\t{row.ratio_hi:.3f}"
                  f"\t{row.count}\t{100 * row.mean_f1:.1f}")
    if args.out:
        payload = {
            "setting": setting.value,
            "macro_precision": report.macro_precision,
            "macro_recall": report.macro_recall,
            "macro_f1": report.macro_f1,
            "mean_pair_f1": report.mean_pair_f1,
        }
        if bins is not None:
            payload["bins"] = [dataclasses.asdict(row) for row in bins]
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        _write_manifest(args.out, "eval", None,
                        {"corpus": args.corpus, "pred": args.pred})
    return 0


def _cmd_tune(args, parser) -> int:
    config = _config_from_args(args, parser)
    corpus = parse_canonical(args.corpus)
    table = load_embeddings(args.emb)
    try:
        grid = GridSpec(thresholds=args.grid_lambda, m_fractions=args.grid_mfrac,
                        taus=args.grid_tau, kappas=args.grid_kappa)
    except ValueError as exc:
        parser.error(str(exc))
    best_config, best_f1 = grid_search(corpus, table, config, grid,
                                       _LINK_SETTINGS[args.links], log_path=args.log)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(best_config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(args.out, "tune", best_config,
                    {"corpus": args.corpus, "emb": args.emb})
    print(f"best validation f1: {100 * best_f1:.1f}")
    return 0


def _cmd_convert(args, parser) -> int:
    corpus = parse_pharaoh(args.src, args.tgt, args.align, one_based=args.one_based)
    serialize_canonical(corpus, args.out)
    _write_manifest(args.out, "convert", None,
                    {"src": args.src, "tgt": args.tgt, "align": args.align})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wordot", description=__doc__)
    parser.add_argument("--version", action="version", version=f"wordot {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    align = subs.add_parser("align", help="align a corpus and dump predictions")
    _add_pipeline_flags(align)
    align.add_argument("--corpus", required=True)
    align.add_argument("--emb", required=True)
    align.add_argument("--out", required=True)
    align.add_argument("--jobs", type=int, default=1)
    align.add_argument("--config", help="JSON config file; explicit flags override")
    align.set_defaults(func=_cmd_align)

    evaluate = subs.add_parser("eval", help="score predictions against gold links")
    evaluate.add_argument("--corpus", required=True)
    evaluate.add_argument("--pred", required=True)
    evaluate.add_argument("--links", choices=sorted(_LINK_SETTINGS), default="sure")
    evaluate.add_argument("--bins", type=int, default=0)
    evaluate.add_argument("--out", help="optional JSON report path")
    evaluate.set_defaults(func=_cmd_eval)

    tune = subs.add_parser("tune", help="grid-search hyperparameters on a validation set")
    _add_pipeline_flags(tune, with_lambda=False)
    tune.add_argument("--corpus", required=True)
    tune.add_argument("--emb", required=True)
    tune.add_argument("--links", choices=sorted(_LINK_SETTINGS), default="sure")
    tune.add_argument("--grid-lambda", type=_grid, default=GridSpec.__dataclass_fields__["thresholds"].default)
    tune.add_argument("--grid-mfrac", type=_grid, default=GridSpec.__dataclass_fields__["m_fractions"].default)
    tune.add_argument("--grid-tau", type=_grid, default=GridSpec.__dataclass_fields__["taus"].default)
    tune.add_argument("--grid-kappa", type=_grid, default=GridSpec.__dataclass_fields__["kappas"].default)
    tune.add_argument("--out", required=True, help="best-config JSON path")
    tune.add_argument("--log", help="tuning log TSV path")
    tune.set_defaults(func=_cmd_tune)

    convert = subs.add_parser("convert", help="convert Pharaoh files to canonical JSONL")
    convert.add_argument("--src", required=True)
    convert.add_argument("--tgt", required=True)
    convert.add_argument("--align", required=True)
    convert.add_argument("--one-based", action="store_true")
    convert.add_argument("--out", required=True)
    convert.set_defaults(func=_cmd_convert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except (DataError, OSError) as exc:
        print(f"wordot: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"wordot: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
