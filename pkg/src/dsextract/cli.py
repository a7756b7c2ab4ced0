"""Command-line entry point: ``dsextract <command> [options]``.

Exit codes: 0 success, 2 configuration or usage error, 3 training failure,
4 model artifact mismatch.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .artifact import ArtifactError, ModelArtifact
from .corpus import (
    CorpusFormatError, Lexicon, read_bio, read_relations, read_sentences, tags_to_spans, write_bio,
    write_relations, write_sentences,
)
from .discovery import KnowledgeBase, discover, emit_report, read_synonyms
from .embeddings import EmbeddingFormatError, load_word_embeddings
from .evaluation import MICRO, ner_score, re_score, report_table
from .experiments import default_train_config, run_ner, run_re
from .ner import VARIANTS, NerHyper, evaluate_tagger, tagger_from_artifact
from .relation import RE_VARIANTS, ReHyper, RfHyper, evaluate_relations, relation_model_from_artifact
from .synthetic import SyntheticConfig, generate_synthetic, write_gold
from .tensor import Rng, deterministic
from .training import SplitSpec, TrainingDiverged, multi_run, split

CONFIG_ENV = "DSEXTRACT_CONFIG"
EXIT_OK, EXIT_CONFIG, EXIT_TRAIN, EXIT_ARTIFACT = 0, 2, 3, 4

CONFIG_KEYS = {
    "seed", "split_seed", "runs", "threshold", "examples", "synthetic", "ner", "re", "rf", "train", "paths",
}
PATH_KEYS = {"embeddings", "ner_corpus", "re_corpus", "lexicon", "kb", "sentences", "event_synonyms", "out"}


class ConfigError(Exception):
    pass


class UsageParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


# -- configuration -------------------------------------------------------------------

def load_config(path: Optional[str]) -> tuple:
    """Parsed JSON config (or {}) plus its raw bytes; the env var supplies a default path."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}, b""
    try:
        raw = Path(path).read_bytes()
        cfg = json.loads(raw)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    unknown = set(cfg.get("paths", {})) - PATH_KEYS
    if unknown:
        raise ConfigError(f"unknown config paths: {sorted(unknown)}")
    for key, value in cfg.get("paths", {}).items():
        if key != "out" and not Path(value).exists():
            raise ConfigError(f"config path {key}={value} does not exist")
    return cfg, raw


def pick(flag, cfg: dict, key: str, default=None):
    """Flag wins over config, config over default."""
    if flag is not None:
        return flag
    return cfg.get(key, default)


def cfg_path(flag, cfg: dict, key: str, required: bool = True) -> Optional[str]:
    value = flag if flag is not None else cfg.get("paths", {}).get(key)
    if value is None and required:
        raise ConfigError(f"missing required path: --{key.replace('_', '-')} (or paths.{key} in the config)")
    if value is not None and key != "out" and not Path(value).exists():
        raise ConfigError(f"{key} file {value} does not exist")
    return value


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_manifest(out: Path, command: str, settings: dict, config_raw: bytes) -> None:
    files = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            files[str(p.relative_to(out))] = sha256_bytes(p.read_bytes())
    doc = {
        "command": command,
        "versions": {"dsextract": __version__, "numpy": np.__version__, "python": sys.version.split()[0]},
        "settings": settings,
        "config_sha256": sha256_bytes(config_raw) if config_raw else None,
        "outputs": files,
    }
    (out / "manifest.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


# -- commands ------------------------------------------------------------------------

def cmd_gen_synthetic(args, cfg: dict, raw: bytes) -> int:
    try:
        syn = SyntheticConfig.from_dict(cfg.get("synthetic", {}))
        syn.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    seed = pick(args.seed, cfg, "seed", 0)
    out = Path(cfg_path(args.out, cfg, "out"))
    out.mkdir(parents=True, exist_ok=True)
    corpus = generate_synthetic(syn, Rng(seed))
    write_bio(out / "ner.bio", corpus.ner)
    write_relations(out / "relations.tsv", corpus.relations)
    corpus.lexicon.write(out / "lexicon.tsv")
    write_gold(out / "gold_signals.tsv", corpus.gold)
    write_sentences(out / "discovery_sentences.txt", corpus.discovery)
    KnowledgeBase(corpus.kb).write(out / "kb.tsv")
    (out / "synthetic_config.json").write_text(syn.to_json() + "\n", encoding="utf-8")
    write_manifest(out, "gen-synthetic", {"seed": seed}, raw)
    print(f"wrote {len(corpus.ner)} NER sentences, {len({i.group for i in corpus.relations})} RE sentences "
          f"({len(corpus.relations)} pairs) to {out}")
    return EXIT_OK


def _runs(args, cfg) -> int:
    k = int(pick(args.runs, cfg, "runs", 1))
    if k < 1:
        raise ConfigError("--runs must be at least 1")
    return k


def _embeddings(args, cfg):
    path = cfg_path(args.embeddings, cfg, "embeddings", required=False)
    if path is None:
        return None
    try:
        return load_word_embeddings(path, trainable=True)
    except EmbeddingFormatError as exc:
        raise ConfigError(str(exc)) from None


def _train_config(args, cfg: dict, variant: str):
    overrides = dict(cfg.get("train", {}))
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    try:
        return default_train_config(variant, overrides)
    except TypeError as exc:
        raise ConfigError(f"bad train settings: {exc}") from None


def _report_files(out: Path, name: str, runs: list, seeds: list) -> None:
    from .evaluation import RunSummary

    rows = {name: RunSummary(runs) if len(runs) > 1 else runs[0]}
    (out / "report.tsv").write_text(report_table(rows, "tsv"), encoding="utf-8")
    (out / "report.md").write_text(report_table(rows, "markdown"), encoding="utf-8")
    per_run = {"seeds": seeds, "runs": [r.as_dict() for r in runs]}
    (out / "runs.json").write_text(json.dumps(per_run, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(report_table(rows, "markdown"), end="")


def cmd_train_ner(args, cfg: dict, raw: bytes) -> int:
    variant = args.variant or cfg.get("ner", {}).get("variant") or "char_cnn"
    if variant not in VARIANTS:
        raise ConfigError(f"unknown NER variant {variant!r}; valid variants: {', '.join(VARIANTS)}")
    try:
        hyper = NerHyper.for_variant(variant, **{k: v for k, v in cfg.get("ner", {}).items() if k != "variant"})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    data = cfg_path(args.data, cfg, "ner_corpus")
    try:
        items = read_bio(data)
    except CorpusFormatError as exc:
        raise ConfigError(str(exc)) from None
    split_seed = int(pick(args.split_seed, cfg, "split_seed", 0))
    seed = int(pick(args.seed, cfg, "seed", 0))
    train_items, dev_items, test_items = split(items, SplitSpec(seed=split_seed))
    tcfg = _train_config(args, cfg, variant)
    emb = _embeddings(args, cfg)
    out = Path(cfg_path(args.out, cfg, "out"))
    out.mkdir(parents=True, exist_ok=True)
    outcomes = []

    def one(s):
        with open(out / f"train-log-seed{s}.jsonl", "w", encoding="utf-8", newline="\n") as log:
            o = run_ner(hyper, train_items, dev_items, test_items, s, tcfg, emb, log)
        o.model.to_artifact({"seed": s, "split_seed": split_seed}).save(out / f"model-seed{s}.dsm")
        outcomes.append(o)
        return o.test

    report = multi_run(one, _runs(args, cfg), base_seed=seed)
    best = max(outcomes, key=lambda o: o.dev.micro.f1)  # max keeps the first on ties
    best.model.to_artifact({"seed": best.seed, "split_seed": split_seed}).save(out / "model.dsm")
    _report_files(out, _NER_NAMES[variant], report.runs, report.seeds)
    settings = {"variant": variant, "hyper": asdict(hyper), "train": asdict(tcfg), "seeds": report.seeds,
                "split_seed": split_seed, "data_sha256": sha256_bytes(Path(data).read_bytes())}
    write_manifest(out, "train-ner", settings, raw)
    return EXIT_OK


_NER_NAMES = {
    "baseline_crf": "CRF", "word_only": "Bi-LSTM-CRF", "char_lstm": "Bi-LSTM-CRF (char lstm)",
    "char_cnn": "Bi-LSTM-CRF (char cnn)",
}
_RE_NAMES = {"cnn": "CNN", "att_blstm": "Att-BLSTM", "random_forest": "Random forest"}


def cmd_train_re(args, cfg: dict, raw: bytes) -> int:
    variant = args.variant or cfg.get("re", {}).get("family") or "att_blstm"
    if variant not in RE_VARIANTS:
        raise ConfigError(f"unknown RE variant {variant!r}; valid variants: {', '.join(RE_VARIANTS)}")
    try:
        re_settings = dict(cfg.get("re", {}), family=variant if variant != "random_forest" else "cnn")
        hyper = ReHyper.from_dict(re_settings)
        rf_hyper = RfHyper.from_dict(cfg.get("rf", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    data = cfg_path(args.data, cfg, "re_corpus")
    try:
        items = read_relations(data)
    except CorpusFormatError as exc:
        raise ConfigError(str(exc)) from None
    if any(i.label is None for i in items):
        raise ConfigError(f"{data}: every training instance needs a label")
    split_seed = int(pick(args.split_seed, cfg, "split_seed", 0))
    seed = int(pick(args.seed, cfg, "seed", 0))
    train_items, dev_items, test_items = split(items, SplitSpec(seed=split_seed), group=lambda i: i.group)
    tcfg = _train_config(args, cfg, variant)
    emb = _embeddings(args, cfg)
    out = Path(cfg_path(args.out, cfg, "out"))
    out.mkdir(parents=True, exist_ok=True)
    outcomes = []

    def one(s):
        if variant == "random_forest":
            o = run_re(variant, train_items, dev_items, test_items, s, rf_hyper=rf_hyper)
        else:
            with open(out / f"train-log-seed{s}.jsonl", "w", encoding="utf-8", newline="\n") as log:
                o = run_re(variant, train_items, dev_items, test_items, s, hyper, None, tcfg, emb, log)
        o.model.to_artifact({"seed": s, "split_seed": split_seed}).save(out / f"model-seed{s}.dsm")
        outcomes.append(o)
        return o.test

    report = multi_run(one, _runs(args, cfg), base_seed=seed)
    best = max(outcomes, key=lambda o: o.dev.micro.f1)
    best.model.to_artifact({"seed": best.seed, "split_seed": split_seed}).save(out / "model.dsm")
    _report_files(out, _RE_NAMES[variant], report.runs, report.seeds)
    settings = {"variant": variant, "seeds": report.seeds, "split_seed": split_seed,
                "hyper": asdict(rf_hyper) if variant == "random_forest" else asdict(hyper),
                "train": None if variant == "random_forest" else asdict(tcfg),
                "data_sha256": sha256_bytes(Path(data).read_bytes())}
    write_manifest(out, "train-re", settings, raw)
    return EXIT_OK


def _load_model(path: str, kind: Optional[str] = None):
    if not Path(path).exists():
        raise ConfigError(f"model file {path} does not exist")
    art = ModelArtifact.load(path, kind)
    return art, (tagger_from_artifact(art) if art.kind == "ner" else relation_model_from_artifact(art))


def cmd_eval(args, cfg: dict, raw: bytes) -> int:
    if not Path(args.test_file).exists():
        raise ConfigError(f"test file {args.test_file} does not exist")
    if (args.model is None) == (args.predictions is None):
        raise ConfigError("give exactly one of --model or --predictions")
    try:
        if args.model is not None:
            art, model = _load_model(args.model)
            kind, name = art.kind, art.family
            if kind == "ner":
                scores = evaluate_tagger(model, read_bio(args.test_file))
            else:
                scores = evaluate_relations(model, read_relations(args.test_file))
        else:
            kind, name = _file_kind(args.test_file), "predictions"
            scores = _score_files(kind, args.test_file, args.predictions)
    except CorpusFormatError as exc:
        raise ConfigError(str(exc)) from None
    text = report_table({name: scores}, args.format)
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"eval.{'tsv' if args.format == 'tsv' else 'md'}").write_text(text, encoding="utf-8")
        (out / "scores.json").write_text(json.dumps(scores.as_dict(), indent=1, sort_keys=True) + "\n",
                                         encoding="utf-8")
        write_manifest(out, "eval", {"model": args.model, "test_file": args.test_file,
                                     "predictions": args.predictions, "kind": kind}, raw)
    return EXIT_OK


def _file_kind(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                return "re" if len(line.rstrip("\n").split("\t")) == 7 else "ner"
    return "ner"


def _score_files(kind: str, gold_path: str, pred_path: str):
    if kind == "ner":
        gold = {s.id: tags_to_spans(t) for s, t in read_bio(gold_path)}
        pred = {s.id: tags_to_spans(t, mode="lenient") for s, t in read_bio(pred_path, strict=False)}
        return ner_score(gold, pred)
    gold = read_relations(gold_path)
    pred = {i.id: i.label for i in read_relations(pred_path)}
    missing = [g.id for g in gold if g.id not in pred]
    if missing:
        raise ConfigError(f"predictions lack instances such as {missing[:3]}")
    return re_score([g.label for g in gold], [pred[g.id] for g in gold])


def cmd_discover(args, cfg: dict, raw: bytes) -> int:
    threshold = int(pick(args.threshold, cfg, "threshold", 10))
    if threshold < 0:
        raise ConfigError("--threshold must be non-negative")
    n_examples = int(pick(args.examples, cfg, "examples", 10))
    _, ner_model = _load_model(args.ner_model, "ner")
    _, re_model = _load_model(args.re_model, "re")
    sentences = read_sentences(cfg_path(args.sentences, cfg, "sentences"))
    kb_path = cfg_path(args.kb, cfg, "kb", required=False)
    kb = KnowledgeBase.read(kb_path) if kb_path else KnowledgeBase()
    lex_path = cfg_path(args.lexicon, cfg, "lexicon", required=False)
    lexicon = Lexicon.read(lex_path) if lex_path else Lexicon()
    syn_path = cfg_path(args.event_synonyms, cfg, "event_synonyms", required=False)
    synonyms = read_synonyms(syn_path) if syn_path else None
    out = Path(cfg_path(args.out, cfg, "out"))
    out.mkdir(parents=True, exist_ok=True)
    # "--threshold t" keeps pairs whose frequency is larger than t
    result = discover(sentences, ner_model, re_model, lexicon, kb, threshold + 1, synonyms)
    by_id = {s.id: s for s in sentences}
    seed = int(pick(args.seed, cfg, "seed", 0))
    ext = "json" if args.format == "json" else "tsv"
    (out / f"signals.{ext}").write_text(
        emit_report(result.kept, args.format, by_id, n_examples, seed, result.summary), encoding="utf-8")
    (out / f"all_pairs.{ext}").write_text(emit_report(result.pairs, args.format, by_id, 0, seed), encoding="utf-8")
    counts = {lab.value: sum(1 for c in result.classified if c.label == lab) for lab in {c.label for c in result.classified}}
    summary = result.summary.text() + f"classified pairs: {len(result.classified)} {json.dumps(counts, sort_keys=True)}\n"
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    print(summary, end="")
    write_manifest(out, "discover", {"threshold": threshold, "examples": n_examples, "seed": seed,
                                     "ner_model": args.ner_model, "re_model": args.re_model}, raw)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = UsageParser(prog="dsextract", description="Dietary-supplement adverse event and indication extraction.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    def common(sp):
        sp.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
        sp.add_argument("--deterministic", action="store_true", help="single-threaded numerics, fixed order")
        sp.add_argument("--seed", type=int)

    g = sub.add_parser("gen-synthetic", help="write a synthetic NER/RE/discovery corpus")
    common(g)
    g.add_argument("--out")

    for name, variants, data_help in (("train-ner", VARIANTS, "BIO file"), ("train-re", RE_VARIANTS, "relation file")):
        t = sub.add_parser(name, help=f"train and test on an 80/10/10 split of a {data_help}")
        common(t)
        t.add_argument("--variant", help=f"one of: {', '.join(variants)}")
        t.add_argument("--data", help=data_help)
        t.add_argument("--runs", type=int, help="number of seeds (default 1)")
        t.add_argument("--split-seed", type=int)
        t.add_argument("--embeddings", help="word vectors in text format")
        t.add_argument("--max-steps", type=int)
        t.add_argument("--out")

    e = sub.add_parser("eval", help="score a model (or a prediction file) on a test file")
    common(e)
    e.add_argument("--model")
    e.add_argument("--predictions")
    e.add_argument("--test-file", required=True)
    e.add_argument("--format", choices=("tsv", "markdown"), default="tsv")
    e.add_argument("--out")

    d = sub.add_parser("discover", help="extract, aggregate and threshold DS-Event signals")
    common(d)
    d.add_argument("--ner-model", required=True)
    d.add_argument("--re-model", required=True)
    d.add_argument("--sentences")
    d.add_argument("--kb")
    d.add_argument("--lexicon")
    d.add_argument("--event-synonyms")
    d.add_argument("--threshold", type=int, help="keep pairs with frequency larger than this (default 10)")
    d.add_argument("--examples", type=int, help="example sentences per pair (default 10)")
    d.add_argument("--format", choices=("tsv", "json"), default="tsv")
    d.add_argument("--out")
    return p


COMMANDS = {
    "gen-synthetic": cmd_gen_synthetic, "train-ner": cmd_train_ner, "train-re": cmd_train_re,
    "eval": cmd_eval, "discover": cmd_discover,
}


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    ctx = deterministic() if args.deterministic else contextlib.nullcontext()
    try:
        cfg, raw = load_config(args.config)
        with ctx:
            return COMMANDS[args.command](args, cfg, raw)
    except ConfigError as exc:
        print(f"dsextract: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDiverged as exc:
        print(f"dsextract: training failed: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except ArtifactError as exc:
        print(f"dsextract: model artifact error: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT


if __name__ == "__main__":
    sys.exit(main())
