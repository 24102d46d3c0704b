"""Command-line entry point: ``dis2vec {train,replay,taxonomy,synth,sweep}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from .corpus import load_stream
from .errors import DataError, NonFiniteUpdate
from .synthgen import SyntheticSpec, generate
from .taxonomy import DEFAULT_TOP_N, load_annotations, report
from .trainer import GRID, MODE_PARAMS, MODES, VOCAB_MODES, EmbeddingSet, TrainingConfig, grid_configs, train
from .vocabulary import TASK_CATEGORIES, load_vocabulary

log = logging.getLogger("dis2vec")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

# flag name -> TrainingConfig field
_TRAIN_FLAGS = {
    "dim": "dim", "window": "window", "neg": "negative", "alpha": "alpha",
    "pi_s": "pi_s", "pi_o": "pi_o", "mode": "mode", "epochs": "epochs", "lr": "lr0",
    "lr_min": "lr_min", "subsample": "subsample_t", "min_count": "min_count",
    "seed": "seed", "workers": "workers",
}

# desk-scale stand-in for the 300/600 dimensions of the full grid
DESK_GRID = {**GRID, "dim": (32, 64)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _subsample_arg(value: str) -> Optional[float]:
    if value.lower() in ("0", "none", "off"):
        return None
    t = float(value)
    if t <= 0:
        raise argparse.ArgumentTypeError("subsample threshold must be positive, or 0/none to disable")
    return t


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("training parameters (override --config)")
    g.add_argument("--dim", type=int, help="embedding dimension T")
    g.add_argument("--window", type=int, help="context window L")
    g.add_argument("--neg", type=int, help="negative samples k")
    g.add_argument("--alpha", type=float, help="unigram smoothing exponent")
    g.add_argument("--pi-s", type=float, help="probability a vocabulary pair's negative is drawn outside V")
    g.add_argument("--pi-o", type=float, help="probability a mixed pair is repelled")
    g.add_argument("--mode", choices=MODES)
    g.add_argument("--epochs", type=int)
    g.add_argument("--lr", type=float, help="initial learning rate")
    g.add_argument("--lr-min", type=float, help="final learning rate (default 1e-4 * lr)")
    g.add_argument("--subsample", type=_subsample_arg, default=argparse.SUPPRESS,
                   help="subsampling threshold t; 0 or 'none' disables")
    g.add_argument("--min-count", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int)
    p.add_argument("--config", type=Path, help="JSON file of training parameters")


def resolve_config(args: argparse.Namespace) -> TrainingConfig:
    """Defaults, then the config file, then explicit flags."""
    params: dict = {}
    if getattr(args, "config", None):
        params.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    for flag, name in _TRAIN_FLAGS.items():
        if hasattr(args, flag) and getattr(args, flag) is not None:
            params[name] = getattr(args, flag)
    if hasattr(args, "subsample"):
        params["subsample_t"] = args.subsample
    try:
        return TrainingConfig.from_dict(params)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_loss_log(history, path) -> None:
    rows = history.rows()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=list(rows[0]), delimiter="\t", lineterminator="\n")
        out.writeheader()
        out.writerows(rows)


def run_training(corpus: Path, vocab_path: Optional[Path], config: TrainingConfig, out: Path,
                 pretokenized: bool = False, annotations: Optional[Path] = None,
                 manifest_path: Optional[Path] = None) -> dict:
    """Train, write embeddings, loss log and manifest; return the manifest."""
    if config.mode in VOCAB_MODES and vocab_path is None:
        raise UsageError(f"mode {config.mode} needs --vocab")
    started = time.time()
    vocab = load_vocabulary(vocab_path) if vocab_path else None
    table, stream = load_stream(corpus, vocab, pretokenized, config.min_count)
    emb = train(stream, table, vocab, config)
    out.parent.mkdir(parents=True, exist_ok=True)
    emb.save(out)
    loss_log = out.with_name(out.name + ".loss.tsv")
    write_loss_log(emb.history, loss_log)

    counts = emb.history.counts.sum(axis=0)
    manifest = {
        "config": config.to_dict(),
        "inputs": {
            "corpus": {"path": str(Path(corpus).resolve()), "sha256": file_digest(corpus)},
            "vocabulary": {"path": str(Path(vocab_path).resolve()), "sha256": file_digest(vocab_path)} if vocab_path else None,
            "pretokenized": pretokenized,
        },
        "outputs": {"embeddings": str(out.resolve()), "loss_log": str(loss_log.resolve())},
        "vocabulary_size": len(table),
        "pair_counts": {
            "dd": int(counts[0]), "nn": int(counts[1]), "mixed": int(counts[2]), "total": int(counts.sum()),
        },
        "epochs": emb.history.rows(),
        "wall_clock_seconds": round(time.time() - started, 3),
    }
    if annotations is not None and vocab is not None:
        rep = report(load_annotations(annotations, vocab), emb, vocab)
        manifest["final_accuracies"] = {"overall": rep.overall, **rep.category_means}
    manifest_path = manifest_path or out.with_name(out.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return manifest


def cmd_train(args) -> int:
    config = resolve_config(args)
    manifest = run_training(args.corpus, args.vocab, config, args.out, args.pretokenized,
                            args.annotations, args.manifest)
    pc = manifest["pair_counts"]
    print(f"wrote {args.out}: {manifest['vocabulary_size']} words x {config.dim}, "
          f"{pc['total']} pair updates (dd {pc['dd']}, nn {pc['nn']}, mixed {pc['mixed']})")
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    config = TrainingConfig.from_dict(manifest["config"])
    if config.workers > 1:
        log.warning("manifest used %d workers; parallel runs are not bit-reproducible", config.workers)
    inputs = manifest["inputs"]
    corpus = Path(inputs["corpus"]["path"])
    vocab = Path(inputs["vocabulary"]["path"]) if inputs.get("vocabulary") else None
    for entry, path in ((inputs["corpus"], corpus), (inputs.get("vocabulary"), vocab)):
        if entry and file_digest(path) != entry["sha256"]:
            raise DataError(f"{path} changed since the manifest was written")
    out = args.out or Path(manifest["outputs"]["embeddings"])
    run_training(corpus, vocab, config, out, inputs.get("pretokenized", False))
    print(f"replayed into {out}")
    return EXIT_OK


def cmd_taxonomy(args) -> int:
    vocab = load_vocabulary(args.vocab)
    emb = EmbeddingSet.load(args.embeddings)
    rep = report(load_annotations(args.annotations, vocab), emb, vocab, args.top_n)
    prefix = args.out or args.embeddings.with_suffix("")
    rep.write_json(Path(f"{prefix}.taxonomy.json"))
    rep.write_table(Path(f"{prefix}.taxonomy.tsv"))
    for cat, acc in rep.category_means.items():
        print(f"{cat:22s} {acc:.4f}")
    print(f"{'overall':22s} {rep.overall:.4f}")
    for e in rep.entries:
        if e.error:
            print(f"warning: {e.disease}/{e.category}: {e.error}", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_diseases=args.diseases, n_filler_words=args.fillers, terms_per_category=args.terms_per_category,
        true_per_category=args.true_per_category, beta=args.beta, n_sentences=args.sentences,
        min_length=args.min_length, max_length=args.max_length, zipf_exponent=args.zipf,
        terms_per_sentence=args.terms_per_sentence, seed=args.seed,
    )
    paths = generate(spec).write(args.out_dir)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def _sweep_one(job):
    config, stream, table, vocab, queries = job
    rep = report(queries, train(stream, table, vocab, config), vocab)
    return config, rep.category_means, rep.overall


def select_best(results, categories=TASK_CATEGORIES) -> dict:
    """Best configuration per task; ties go to the earliest result."""
    best = {}
    for cat in categories:
        scored = [(r[1][cat], -i, r[0]) for i, r in enumerate(results) if cat in r[1]]
        if scored:
            acc, _, config = max(scored, key=lambda x: (x[0], x[1]))
            best[cat] = (config, acc)
    return best


def tally(best: dict, grid: dict) -> dict:
    """For each mode and parameter, how many tasks' best configuration used each grid value."""
    table: dict = {}
    for config, _ in best.values():
        params = table.setdefault(config.mode, {})
        for p in MODE_PARAMS[config.mode]:
            if p in grid:
                counts = params.setdefault(p, {v: 0 for v in grid[p]})
                counts[getattr(config, p)] = counts.get(getattr(config, p), 0) + 1
    return table


def cmd_sweep(args) -> int:
    base = resolve_config(args)
    grid = json.loads(Path(args.grid).read_text(encoding="utf-8")) if args.grid else DESK_GRID
    modes = args.modes or ["dis2vec_combined"]
    vocab = load_vocabulary(args.vocab)
    queries = load_annotations(args.annotations, vocab)
    table, stream = load_stream(args.corpus, vocab, args.pretokenized, base.min_count)
    configs = list(grid_configs(base, grid, modes))
    print(f"{len(configs)} configurations")
    jobs = [(c, stream, table, vocab, queries) for c in configs]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]

    args.out.mkdir(parents=True, exist_ok=True)
    axes = [p for p in MODE_PARAMS["dis2vec_combined"] if p in grid and any(p in MODE_PARAMS[m] for m in modes)]
    with open(args.out / "sweep.tsv", "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, delimiter="\t", lineterminator="\n")
        out.writerow(["mode", *axes, *TASK_CATEGORIES, "overall"])
        for config, means, overall in results:
            out.writerow([config.mode, *(getattr(config, p) for p in axes),
                          *(f"{means.get(c, float('nan')):.6f}" for c in TASK_CATEGORIES), f"{overall:.6f}"])
    best = select_best(results)
    summary = {
        "best": {cat: {"accuracy": acc, "config": cfg.to_dict()} for cat, (cfg, acc) in best.items()},
        "tally": tally(best, grid),
    }
    (args.out / "best.json").write_text(json.dumps(summary, indent=1, default=str) + "\n", encoding="utf-8")
    for cat, (cfg, acc) in best.items():
        print(f"{cat:22s} {acc:.4f}  " + " ".join(f"{p}={getattr(cfg, p)}" for p in MODE_PARAMS[cfg.mode]))
    for mode, params in summary["tally"].items():
        print(mode + "  " + "  ".join(f"{p} " + " ".join(f"{v}={n}" for v, n in counts.items())
                                       for p, counts in params.items()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dis2vec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train embeddings on a corpus")
    p.add_argument("corpus", type=Path)
    p.add_argument("--vocab", type=Path, help="vocabulary JSON (required by dis2vec modes)")
    p.add_argument("--annotations", type=Path, help="score the result and record accuracies in the manifest")
    p.add_argument("--pretokenized", action="store_true", help="one sentence per line, space-separated tokens")
    p.add_argument("--out", type=Path, required=True, help="embeddings file (word2vec text format)")
    p.add_argument("--manifest", type=Path, help="manifest path (default: <out>.manifest.json)")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("replay", help="re-run a training manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, help="embeddings file (default: the manifest's)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("taxonomy", help="rank and score category terms per disease")
    p.add_argument("embeddings", type=Path)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--top-n", type=int, default=DEFAULT_TOP_N)
    p.add_argument("--out", help="output prefix (default: embeddings path without suffix)")
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("synth", help="generate a synthetic corpus with a planted taxonomy")
    d = SyntheticSpec()
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--diseases", type=int, default=d.n_diseases)
    p.add_argument("--fillers", type=int, default=d.n_filler_words)
    p.add_argument("--terms-per-category", type=int, default=d.terms_per_category)
    p.add_argument("--true-per-category", type=int, default=d.true_per_category)
    p.add_argument("--terms-per-sentence", type=int, default=d.terms_per_sentence)
    p.add_argument("--beta", type=float, default=d.beta)
    p.add_argument("--sentences", type=int, default=d.n_sentences)
    p.add_argument("--min-length", type=int, default=d.min_length)
    p.add_argument("--max-length", type=int, default=d.max_length)
    p.add_argument("--zipf", type=float, default=d.zipf_exponent)
    p.add_argument("--seed", type=int, default=d.seed)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="grid search, best configuration per task")
    p.add_argument("corpus", type=Path)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--pretokenized", action="store_true")
    p.add_argument("--grid", type=Path, help="JSON object: parameter -> list of values")
    p.add_argument("--modes", nargs="+", choices=MODES)
    p.add_argument("--jobs", type=int, default=1, help="configurations trained in parallel processes")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _add_train_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dis2vec: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonFiniteUpdate as exc:
        print(f"dis2vec: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"dis2vec: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
