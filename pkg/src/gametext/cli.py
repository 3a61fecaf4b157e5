"""Command-line front end.

One subcommand per pipeline operation so each step stays independently
scriptable, plus ``run`` which executes a JSON pipeline config end to end
and writes a reproducibility manifest (every seed echoed, every output
hashed). Exit codes: 0 success, 1 stage/data failure, 2 config error.
"""

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from ._io import atomic_write_text
from .boxscore import (
    GameDataError,
    build_schedule_index,
    game_to_dict,
    read_games,
)
from .corpus import (
    Document,
    filter_pairs,
    make_pseudo_documents,
    mask_tokens,
    build_mtnlg_source,
    read_documents,
    read_pairs,
    read_token_lines,
    shard_for_epochs,
    split_document,
    tag_corpus,
    upsample_by_spans,
    write_documents,
    write_token_lines,
)
from .evaluation import (
    corpus_bleu,
    find_overlap,
    filter_overlap,
    load_fix_rules,
    apply_output_fixes,
    overlap_reference_bleu,
    stories_from_games,
)
from .linearize import (
    Lang,
    LinearizationConfig,
    SweepKind,
    linearize_game,
    localize_labels,
    sweep_configs,
)
from .subword import (
    apply_bpe,
    apply_inline_casing,
    learn_bpe,
    read_bpe_model,
    write_bpe_model,
    write_dictionary,
)


class ConfigError(ValueError):
    """Invalid CLI arguments or pipeline config; the message carries the
    offending field path."""


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


def _load_linearization_config(path) -> LinearizationConfig:
    try:
        return LinearizationConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (ValueError, OSError) as exc:
        raise ConfigError(f"linearization config {path}: {exc}") from None


def _resolve_seed(args) -> int:
    """Per-command --seed wins over the global one; one of them must be set
    so every randomized run stays auditable."""
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = args.global_seed
    if seed is None:
        raise ConfigError("seed: required for randomized ops (pass --seed)")
    return seed


def _read_docs_arg(path, fmt: str) -> list[Document]:
    return read_documents(path, fmt=fmt)


def _print(line: str) -> None:
    print(line)


# ---------------------------------------------------------------- commands

def cmd_parse(args) -> int:
    games = read_games(args.input)
    lines = [json.dumps(game_to_dict(g), ensure_ascii=False) for g in games]
    if args.output:
        atomic_write_text(args.output, "\n".join(lines) + ("\n" if lines else ""))
    else:
        for line in lines:
            _print(line)
    print(f"parsed {len(games)} games", file=sys.stderr)
    return 0


def _linearize_lines(games, index, cfg, jobs: int) -> list[str]:
    def one(game):
        return " ".join(linearize_game(game, index, cfg))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, games))
    return [one(g) for g in games]


def cmd_linearize(args) -> int:
    games = read_games(args.input)
    schedule = read_games(args.schedule) if args.schedule else games
    index = build_schedule_index(schedule)
    cfg = _load_linearization_config(args.config) if args.config else LinearizationConfig()
    lines = _linearize_lines(games, index, cfg, args.jobs)
    if args.output:
        atomic_write_text(args.output, "\n".join(lines) + ("\n" if lines else ""))
    else:
        for line in lines:
            _print(line)
    return 0


def cmd_build_corpus(args) -> int:
    if args.op == "filter":
        pairs = read_pairs(args.src, args.tgt)
        kept, report = filter_pairs(pairs, args.max_len, args.max_ratio)
        write_token_lines([p.source for p in kept], args.out_src)
        write_token_lines([p.target for p in kept], args.out_tgt)
        print(
            f"kept {report.kept}/{report.examined}"
            f" (empty {report.removed_empty}, length {report.removed_length},"
            f" ratio {report.removed_ratio})",
            file=sys.stderr,
        )
    elif args.op == "pseudo-docs":
        sentences = read_token_lines(args.input)
        docs = make_pseudo_documents(
            sentences, seed=_resolve_seed(args), min_len=args.doc_min_len,
            max_len=args.doc_max_len, shuffle=not args.no_shuffle,
        )
        write_documents(docs, args.output, fmt="blocks")
        print(f"grouped {len(sentences)} sentences into {len(docs)} documents", file=sys.stderr)
    elif args.op == "split":
        model = read_bpe_model(args.model)
        docs = _read_docs_arg(args.input, "blocks")
        out = [piece for d in docs for piece in split_document(d, model, args.max_subwords)]
        write_documents(out, args.output, fmt="blocks")
        flagged = sum(1 for d in out if d.flagged)
        print(f"split {len(docs)} documents into {len(out)} ({flagged} flagged)", file=sys.stderr)
    elif args.op == "upsample":
        docs = _read_docs_arg(args.input, "blocks")
        out = upsample_by_spans(docs, factor=args.factor, seed=_resolve_seed(args))
        write_documents(out, args.output, fmt="blocks")
        print(f"upsampled {len(docs)} documents to {len(out)}", file=sys.stderr)
    elif args.op == "tag":
        seqs = read_token_lines(args.input)
        write_token_lines(tag_corpus(seqs, args.tag), args.output)
    elif args.op == "mtnlg":
        docs = _read_docs_arg(args.text, "blocks")
        metadata = read_token_lines(args.metadata)
        if len(docs) != len(metadata):
            raise ConfigError(
                f"mtnlg: {len(docs)} text documents vs {len(metadata)} metadata lines"
            )
        out = [build_mtnlg_source(d, m) for d, m in zip(docs, metadata)]
        write_token_lines(out, args.output)
    else:  # unreachable via argparse choices
        raise ConfigError(f"unknown corpus op {args.op!r}")
    return 0


def cmd_learn_bpe(args) -> int:
    corpus = [seq for path in args.input for seq in read_token_lines(path)]
    model = learn_bpe(corpus, n_merges=args.merges, threshold=args.threshold)
    write_bpe_model(model, args.output)
    if args.dict_out:
        write_dictionary(model, args.dict_out)
    print(f"learned {len(model.merges)} merges, vocab {len(model.vocab)}", file=sys.stderr)
    return 0


def cmd_apply_bpe(args) -> int:
    model = read_bpe_model(args.model)
    protected = set()
    if args.protected:
        protected = {t for line in read_token_lines(args.protected) for t in line}
    out = []
    for seq in read_token_lines(args.input):
        if args.casing:
            seq = apply_inline_casing(seq)
        out.append(apply_bpe(model, seq, protected))
    write_token_lines(out, args.output)
    return 0


def cmd_mask(args) -> int:
    seed = _resolve_seed(args)
    seqs = read_token_lines(args.input)
    out = [
        mask_tokens(seq, args.rate, seed, args.epoch, key=str(i))
        for i, seq in enumerate(seqs)
    ]
    write_token_lines(out, args.output)
    return 0


def cmd_shard(args) -> int:
    seed = _resolve_seed(args)
    docs = _read_docs_arg(args.input, "blocks")
    plan = shard_for_epochs(docs, n=args.shards, seed=seed)
    out_dir = Path(args.out_dir or ".")
    for k in range(plan.n_shards):
        write_documents(plan.shard(docs, k), out_dir / f"{args.prefix}{k:02d}.txt", fmt="blocks")
    atomic_write_text(
        out_dir / f"{args.prefix}plan.json",
        json.dumps(
            {"n_shards": plan.n_shards, "seed": seed, "assignment": list(plan.assignment)},
            indent=2,
        ) + "\n",
    )
    print(f"wrote {plan.n_shards} shards, sizes {sorted(set(plan.sizes()))}", file=sys.stderr)
    return 0


def cmd_bleu(args) -> int:
    cands = _read_docs_arg(args.candidates, args.format)
    refs = _read_docs_arg(args.references, args.format)
    if args.fixes or args.apply_fixes:
        rules = load_fix_rules(args.fixes) if args.fixes else None
        cands = [
            Document(d.doc_id, (tuple(apply_output_fixes(d.tokens(), rules)),))
            for d in cands
        ]
    report = corpus_bleu(cands, refs)
    _print(report.summary())
    if args.report:
        atomic_write_text(args.report, json.dumps(report.to_dict(), indent=2) + "\n")
    return 0


def cmd_overlap(args) -> int:
    train = read_games(args.train)
    test = read_games(args.test)
    overlap = find_overlap(train, test)
    _print(f"overlap: {len(overlap)} of {len(test)} test games also in train ({len(train)} train games)")
    if args.filtered_out:
        kept = filter_overlap(train, test)
        lines = [json.dumps(game_to_dict(g), ensure_ascii=False) for g in kept]
        atomic_write_text(args.filtered_out, "\n".join(lines) + ("\n" if lines else ""))
        _print(f"filtered train: kept {len(kept)} of {len(train)}")
    if args.bleu:
        fixes = () if args.no_fixes else None
        report = overlap_reference_bleu(
            stories_from_games(train), stories_from_games(test), overlap, fixes=fixes
        )
        _print(report.summary())
        if args.report:
            atomic_write_text(args.report, json.dumps(report.to_dict(), indent=2) + "\n")
    return 0


def cmd_sweep(args) -> int:
    kind = SweepKind.PLAYER_COUNT if args.kind == "players" else SweepKind.FEATURE_ABLATIONS
    entries = [{"name": name, "config": cfg.to_dict()} for name, cfg in sweep_configs(kind)]
    text = json.dumps(entries, indent=2) + "\n"
    if args.output:
        atomic_write_text(args.output, text)
    else:
        _print(text.rstrip("\n"))
    return 0


# ---------------------------------------------------------------- pipeline

_STAGE_OPS = {
    # op -> (required fields, randomized)
    "linearize": ({"input", "output"}, False),
    "filter-pairs": ({"src", "tgt", "out_src", "out_tgt"}, False),
    "pseudo-docs": ({"input", "output"}, True),
    "split-docs": ({"input", "model", "output"}, False),
    "upsample": ({"input", "output"}, True),
    "tag": ({"input", "output", "tag"}, False),
    "mtnlg": ({"text", "metadata", "output"}, False),
    "mask": ({"input", "output", "rate", "epoch"}, True),
    "learn-bpe": ({"inputs", "output"}, False),
    "apply-bpe": ({"model", "input", "output"}, False),
    "shard": ({"input", "out_prefix"}, True),
    "bleu": ({"candidates", "references", "report"}, False),
}

_INPUT_FIELDS = ("input", "inputs", "src", "tgt", "text", "metadata", "model",
                 "candidates", "references", "schedule")
_OUTPUT_FIELDS = ("output", "out_src", "out_tgt", "report")


def _stage_inputs(stage: dict) -> list[str]:
    paths = []
    for field in _INPUT_FIELDS:
        value = stage.get(field)
        if value is None:
            continue
        paths.extend(value if isinstance(value, list) else [value])
    return paths


def _stage_outputs(stage: dict) -> list[str]:
    paths = []
    for field in _OUTPUT_FIELDS:
        value = stage.get(field)
        if value is not None:
            paths.append(value)
    if stage.get("op") == "shard":
        n = stage.get("shards", 20)
        paths.extend(f"{stage['out_prefix']}{k:02d}.txt" for k in range(n))
        paths.append(f"{stage['out_prefix']}plan.json")
    return paths


class PipelineConfig:
    """A validated pipeline: out_dir, default seed, ordered stages."""

    def __init__(self, raw: dict, base_dir: Path, out_dir_override=None):
        self.raw = raw
        self.base_dir = base_dir
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a JSON object")
        out_dir = out_dir_override or raw.get("out_dir")
        if not out_dir:
            raise ConfigError("out_dir: required")
        self.out_dir = (base_dir / out_dir) if not Path(out_dir).is_absolute() else Path(out_dir)
        self.seed = raw.get("seed")
        self.training_variant = raw.get("training_variant", "full")
        if self.training_variant not in ("full", "nlg"):
            raise ConfigError(f"training_variant: expected 'full' or 'nlg', got {self.training_variant!r}")
        stages = raw.get("stages", [])
        if not isinstance(stages, list):
            raise ConfigError("stages: expected a list")
        self.stages: list[dict] = []
        produced: set[str] = set()
        names: set[str] = set()
        for i, stage in enumerate(stages):
            where = f"stages[{i}]"
            if not isinstance(stage, dict):
                raise ConfigError(f"{where}: expected an object")
            name = stage.get("name") or f"stage-{i}"
            if name in names:
                raise ConfigError(f"{where}.name: duplicate stage name {name!r}")
            names.add(name)
            op = stage.get("op")
            if op not in _STAGE_OPS:
                raise ConfigError(f"{where}.op: unknown op {op!r}")
            required, randomized = _STAGE_OPS[op]
            for field in required:
                if field not in stage:
                    raise ConfigError(f"{where}.{field}: required for op {op!r}")
            if randomized and stage.get("seed") is None and self.seed is None:
                raise ConfigError(
                    f"{where}.seed: op {op!r} is randomized and no seed is set"
                )
            for path in _stage_inputs(stage):
                if path in produced:
                    continue
                if not (self.base_dir / path).exists():
                    raise ConfigError(
                        f"{where}: input {path!r} does not exist and no earlier"
                        " stage produces it"
                    )
            for path in _stage_outputs(stage):
                if path in produced:
                    raise ConfigError(f"{where}: output {path!r} already produced")
                produced.add(path)
            self.stages.append({**stage, "name": name})

    def stage_seed(self, stage: dict) -> int:
        return stage["seed"] if stage.get("seed") is not None else self.seed

    def resolve_in(self, path: str, produced: set[str]) -> Path:
        if path in produced:
            return self.out_dir / path
        return self.base_dir / path

    def resolve_out(self, path: str) -> Path:
        return self.out_dir / path


def load_pipeline_config(path, out_dir_override=None) -> PipelineConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: malformed JSON at byte offset {exc.pos}") from None
    return PipelineConfig(raw, path.parent, out_dir_override)


def _run_stage(cfg: PipelineConfig, stage: dict, produced: set[str]) -> None:
    op = stage["op"]
    src = lambda field: cfg.resolve_in(stage[field], produced)  # noqa: E731
    dst = lambda field: cfg.resolve_out(stage[field])  # noqa: E731

    if op == "linearize":
        games = read_games(src("input"))
        schedule = read_games(src("schedule")) if stage.get("schedule") else games
        lincfg = LinearizationConfig.from_dict(stage.get("config", {}))
        lines = _linearize_lines(games, build_schedule_index(schedule), lincfg, jobs=1)
        atomic_write_text(dst("output"), "\n".join(lines) + ("\n" if lines else ""))
    elif op == "filter-pairs":
        pairs = read_pairs(src("src"), src("tgt"))
        kept, _report = filter_pairs(
            pairs, stage.get("max_len", 175), stage.get("max_ratio", 1.5)
        )
        write_token_lines([p.source for p in kept], dst("out_src"))
        write_token_lines([p.target for p in kept], dst("out_tgt"))
    elif op == "pseudo-docs":
        sentences = read_token_lines(src("input"))
        docs = make_pseudo_documents(
            sentences,
            seed=cfg.stage_seed(stage),
            min_len=stage.get("min_len", 3),
            max_len=stage.get("max_len", 30),
            shuffle=stage.get("shuffle", True),
        )
        write_documents(docs, dst("output"), fmt="blocks")
    elif op == "split-docs":
        model = read_bpe_model(src("model"))
        docs = read_documents(src("input"), fmt="blocks")
        out = [
            piece
            for d in docs
            for piece in split_document(d, model, stage.get("max_subwords", 1100))
        ]
        write_documents(out, dst("output"), fmt="blocks")
    elif op == "upsample":
        docs = read_documents(src("input"), fmt="blocks")
        out = upsample_by_spans(docs, factor=stage.get("factor", 8), seed=cfg.stage_seed(stage))
        write_documents(out, dst("output"), fmt="blocks")
    elif op == "tag":
        seqs = read_token_lines(src("input"))
        write_token_lines(tag_corpus(seqs, stage["tag"]), dst("output"))
    elif op == "mtnlg":
        docs = read_documents(src("text"), fmt="blocks")
        metadata = read_token_lines(src("metadata"))
        if len(docs) != len(metadata):
            raise ValueError(f"{len(docs)} text documents vs {len(metadata)} metadata lines")
        write_token_lines(
            [build_mtnlg_source(d, m) for d, m in zip(docs, metadata)], dst("output")
        )
    elif op == "mask":
        seqs = read_token_lines(src("input"))
        out = [
            mask_tokens(seq, stage["rate"], cfg.stage_seed(stage), stage["epoch"], key=str(i))
            for i, seq in enumerate(seqs)
        ]
        write_token_lines(out, dst("output"))
    elif op == "learn-bpe":
        corpus = [
            seq
            for path in stage["inputs"]
            for seq in read_token_lines(cfg.resolve_in(path, produced))
        ]
        model = learn_bpe(
            corpus,
            n_merges=stage.get("merges", 32000),
            threshold=stage.get("threshold", 100),
        )
        write_bpe_model(model, dst("output"))
    elif op == "apply-bpe":
        model = read_bpe_model(src("model"))
        out = []
        for seq in read_token_lines(src("input")):
            if stage.get("casing", False):
                seq = apply_inline_casing(seq)
            out.append(apply_bpe(model, seq))
        write_token_lines(out, dst("output"))
    elif op == "shard":
        docs = read_documents(src("input"), fmt="blocks")
        plan = shard_for_epochs(docs, n=stage.get("shards", 20), seed=cfg.stage_seed(stage))
        for k in range(plan.n_shards):
            write_documents(
                plan.shard(docs, k),
                cfg.resolve_out(f"{stage['out_prefix']}{k:02d}.txt"),
                fmt="blocks",
            )
        atomic_write_text(
            cfg.resolve_out(f"{stage['out_prefix']}plan.json"),
            json.dumps(
                {
                    "n_shards": plan.n_shards,
                    "seed": cfg.stage_seed(stage),
                    "assignment": list(plan.assignment),
                },
                indent=2,
            ) + "\n",
        )
    elif op == "bleu":
        fmt = stage.get("format", "flat")
        report = corpus_bleu(
            read_documents(src("candidates"), fmt=fmt),
            read_documents(src("references"), fmt=fmt),
        )
        atomic_write_text(dst("report"), json.dumps(report.to_dict(), indent=2) + "\n")
    else:  # pragma: no cover - guarded by validation
        raise ValueError(f"unknown op {op!r}")


_SCHEDULE_STAGES = (
    {
        "stage": 1,
        "title": "sentence-level pretraining on parallel data",
        "roles": ("pretrain",),
        "epochs": "up to 20, early stopping on held-out perplexity",
    },
    {
        "stage": 2,
        "title": "back-translation of monolingual target text",
        "roles": ("bt-source",),
        "epochs": "external step; this toolkit only manages the resulting files",
    },
    {
        "stage": 3,
        "title": "sentence-level retraining with synthetic data sharded per epoch",
        "roles": ("bt",),
        "epochs": "up to 20; one synthetic shard per epoch, which roughly"
                  " matches oversampling the non-synthetic data by the shard count",
    },
    {
        "stage": 4,
        "title": "document-level adaptation",
        "roles": ("doc",),
        "epochs": "up to 5, early stopping on held-out perplexity",
    },
    {
        "stage": 5,
        "title": "in-domain fine-tuning",
        "roles": ("finetune", "nlg"),
        "epochs": "100, held-out BLEU every 10 epochs",
    },
)


def emit_training_manifest(cfg: PipelineConfig) -> dict:
    """Descriptive five-stage training schedule; never executed.

    Stage file lists point only at files this pipeline produces, matched
    through each config stage's optional ``role`` field.
    """
    by_role: dict[str, list[str]] = {}
    for stage in cfg.stages:
        role = stage.get("role")
        if role:
            by_role.setdefault(role, []).extend(_stage_outputs(stage))
    stages = []
    for spec in _SCHEDULE_STAGES:
        entry = {
            "stage": spec["stage"],
            "title": spec["title"],
            "epochs": spec["epochs"],
            "files": sorted(f for role in spec["roles"] for f in by_role.get(role, [])),
        }
        if spec["stage"] == 5 and cfg.training_variant == "nlg":
            entry["title"] = "in-domain fine-tuning on metadata-to-text data"
            entry["note"] = "source side is linearized metadata instead of source-language text"
        stages.append(entry)
    return {"variant": cfg.training_variant, "stages": stages}


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Execute every stage in order and write the manifest last."""
    produced: set[str] = set()
    manifest_stages = []
    for stage in cfg.stages:
        try:
            _run_stage(cfg, stage, produced)
        except Exception as exc:
            raise StageError(stage["name"], exc) from exc
        outputs = _stage_outputs(stage)
        produced.update(outputs)
        params = {
            k: v for k, v in stage.items() if k not in ("name", "op")
        }
        if _STAGE_OPS[stage["op"]][1]:
            params["seed"] = cfg.stage_seed(stage)
        entry = {
            "name": stage["name"],
            "op": stage["op"],
            "params": params,
            "outputs": [
                {
                    "path": path,
                    "sha256": _sha256(cfg.resolve_out(path)),
                    "bytes": cfg.resolve_out(path).stat().st_size,
                }
                for path in outputs
            ],
        }
        manifest_stages.append(entry)
    manifest = {
        "config": cfg.raw,
        "seed": cfg.seed,
        "stages": manifest_stages,
        "training_schedule": emit_training_manifest(cfg),
    }
    atomic_write_text(cfg.out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    return manifest


def cmd_run(args) -> int:
    cfg = load_pipeline_config(args.config, out_dir_override=args.out_dir)
    run_pipeline(cfg)
    _print(f"pipeline complete: {len(cfg.stages)} stages, manifest in {cfg.out_dir}")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gametext",
        description="box-score parsing, linearization, corpus construction,"
                    " subword segmentation, and document-level BLEU",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", dest="global_seed", type=int, default=None,
                        help="default seed for randomized ops")
    parser.add_argument("--out-dir", default=None, help="output directory override")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for per-game work")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate games and emit normalized JSONL")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("linearize", help="encode games as token sequences, one per line")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--config", help="JSON file mirroring LinearizationConfig")
    p.add_argument("--schedule", help="extra games file for next-game lookups")
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("build-corpus", help="corpus construction ops")
    p.add_argument("--op", required=True,
                   choices=["filter", "pseudo-docs", "split", "upsample", "tag", "mtnlg"])
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--src")
    p.add_argument("--tgt")
    p.add_argument("--out-src")
    p.add_argument("--out-tgt")
    p.add_argument("--max-len", type=int, default=175)
    p.add_argument("--max-ratio", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--model", help="bpe model (for --op split)")
    p.add_argument("--max-subwords", type=int, default=1100)
    p.add_argument("--factor", type=int, default=8)
    p.add_argument("--tag")
    p.add_argument("--text")
    p.add_argument("--metadata")
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("learn-bpe", help="learn a subword model")
    p.add_argument("input", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--merges", type=int, default=32000)
    p.add_argument("--threshold", type=int, default=100)
    p.add_argument("--dict-out", help="also write a symbol-frequency dictionary")
    p.set_defaults(func=cmd_learn_bpe)

    p = sub.add_parser("apply-bpe", help="segment token lines with a learned model")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--casing", action="store_true", help="apply inline casing first")
    p.add_argument("--protected", help="file of extra protected tokens")
    p.set_defaults(func=cmd_apply_bpe)

    p = sub.add_parser("mask", help="randomly mask tokens, one sampling per epoch")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epoch", type=int, default=0)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("shard", help="partition documents into per-epoch shards")
    p.add_argument("input")
    p.add_argument("--shards", type=int, default=20)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--prefix", default="epoch-")
    p.set_defaults(func=cmd_shard)

    p = sub.add_parser("bleu", help="document-level BLEU of candidates vs references")
    p.add_argument("candidates")
    p.add_argument("references")
    p.add_argument("--format", choices=["flat", "blocks"], default="flat")
    p.add_argument("--fixes", help="JSON file of token rewrite rules")
    p.add_argument("--apply-fixes", action="store_true", help="apply the default rules")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_bleu)

    p = sub.add_parser("overlap", help="train/test overlap analysis")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--filtered-out", help="write train minus overlapping games here")
    p.add_argument("--bleu", action="store_true",
                   help="score overlapping train stories against test stories")
    p.add_argument("--no-fixes", action="store_true", help="skip token-shape fixes")
    p.add_argument("--report", help="write the BLEU JSON report here")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("sweep", help="emit standard config grids")
    p.add_argument("--kind", choices=["players", "ablations"], required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("run", help="execute a JSON pipeline config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (GameDataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
