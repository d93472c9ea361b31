"""Command-line pipeline orchestration.

Subcommands mirror the experiment stages: train-lm, decontext, anchors,
align, translate-eval, train-parser, parse, eval-parse, simulate. All
stages stream between file artifacts (checkpoints, vector tables, alignment
maps, CoNLL-U, TSV reports) and are deterministic under their seeds, so
rerunning a command with identical inputs reproduces its outputs byte for
byte. Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np
import yaml

from .align import fit_alignment, load_alignment, save_alignment
from .bilm import LMConfig, train_lm
from .checkpoint import load_lm, load_parser, save_lm, save_parser
from .conllu import Treebank, load_conllu, save_conllu
from .decontext import DecontextTable, decontextualize_vocab, load_table, save_table
from .dictionary import load_dictionary
from .errors import ConfigError, CrosslabError
from .layers import LayeredEmbedding
from .parser import (FrozenVectorEmbedder, LMEmbedder, ParserConfig, evaluate,
                     parse_treebank, score_treebank, train_parser)
from .sampling import SimulationConfig, downsample
from .translate import RetrievalIndex, precision_at_1, translate
from .vectors import load_vectors, save_vectors, VectorTable

CONFIG_ENV = "CROSSLAB_CONFIG"
PREPROCESS_MODES = ("none", "unit", "unit-center-unit")


def _config_hash(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _tsv_header(payload) -> str:
    return f"# config-hash: {_config_hash(payload)}\n"


def _require_file(path, what: str) -> str:
    if path is None:
        raise ConfigError(f"missing required {what}")
    if not os.path.exists(path):
        raise ConfigError(f"{what} does not exist: {path}")
    return path


def load_config(path) -> dict:
    _require_file(path, "config file")
    with open(path, encoding="utf-8") as f:
        cfg = yaml.safe_load(f) or {}
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return cfg


def _read_tokens(path) -> list[str]:
    with open(_require_file(path, "corpus file"), encoding="utf-8", errors="strict") as f:
        return f.read().split()


def _read_sentences(path) -> list[list[str]]:
    with open(_require_file(path, "corpus file"), encoding="utf-8", errors="strict") as f:
        return [line.split() for line in f if line.strip()]


def _parse_lang_paths(spec: str, what: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in spec.split(","):
        lang, _, path = item.partition("=")
        if not lang or not path:
            raise ConfigError(f"{what}: expected lang=path, got {item!r}")
        out[lang] = _require_file(path, f"{what} for {lang}")
    return out


# -- subcommands ----------------------------------------------------------------


def cmd_train_lm(args) -> int:
    cfg = load_config(args.config)
    languages = [l.strip() for l in args.languages.split(",") if l.strip()]
    if not languages:
        raise ConfigError("--languages must name at least one language")
    corpora_cfg = cfg.get("corpora", {})
    corpora = {}
    for lang in languages:
        path = corpora_cfg.get(lang)
        if path is None:
            raise ConfigError(f"config has no corpus path for language {lang!r}")
        corpora[lang] = _read_tokens(path)
    lm_cfg = LMConfig.from_dict({**cfg.get("lm", {}),
                                 **({"seed": args.seed} if args.seed is not None else {})})
    out = train_lm(corpora, lm_cfg, checkpoint_dir=args.checkpoint_dir)
    save_lm(args.out, out.model)
    print(f"trained on {'+'.join(languages)}: "
          f"loss {out.epoch_losses[0]:.4f} -> {out.epoch_losses[-1]:.4f}; wrote {args.out}")
    return 0


def cmd_decontext(args) -> int:
    lm = load_lm(_require_file(args.lm, "LM checkpoint"))
    tokens = _read_tokens(args.corpus)
    table = decontextualize_vocab(lm, tokens, min_count=args.min_count,
                                  lm_id=os.path.basename(args.lm))
    save_table(args.out, table)
    print(f"decontextualized {len(table)} words -> {args.out}.l0/.l1/.l2")
    return 0


def cmd_anchors(args) -> int:
    from .align import compute_anchors
    lm = load_lm(_require_file(args.lm, "LM checkpoint"))
    sentences = _read_sentences(args.corpus)
    anchors = compute_anchors(lm, sentences, lm_id=os.path.basename(args.lm))
    words = tuple(anchors.vectors)
    for layer, suffix in enumerate((".l0", ".l1", ".l2")):
        mat = np.stack([anchors[w].layers[layer] for w in words])
        save_vectors(args.out + suffix, VectorTable(words, mat), precision=8)
    with open(args.out + ".counts.tsv", "w", encoding="utf-8") as f:
        f.write(_tsv_header({"cmd": "anchors", "lm": args.lm, "corpus": args.corpus}))
        f.write("word\tcount\n")
        for w in words:
            f.write(f"{w}\t{anchors.counts[w]}\n")
    print(f"anchored {len(words)} words -> {args.out}.l0/.l1/.l2")
    return 0


def _preprocess_table(table: DecontextTable, mode: str) -> DecontextTable:
    """Probe-side vector preprocessing before fitting and retrieval."""
    if mode == "none":
        return table
    def unit(m):
        return m / np.maximum(np.linalg.norm(m, axis=1, keepdims=True), 1e-12)
    words = tuple(table.vectors)
    layers = []
    for j in range(3):
        _, mat = table.layer_matrix(j, words)
        mat = unit(mat)
        if mode == "unit-center-unit":
            mat = unit(mat - mat.mean(axis=0))
        layers.append(mat)
    vectors = {w: LayeredEmbedding(layers[0][i], layers[1][i], layers[2][i])
               for i, w in enumerate(words)}
    return DecontextTable(vectors, lm_id=table.lm_id, min_count=table.min_count)


def cmd_align(args) -> int:
    src = load_table(args.src)
    tgt = load_table(args.tgt)
    dictionary = load_dictionary(_require_file(args.dict, "dictionary"),
                                 source_language=args.source_lang,
                                 target_language=args.target_lang)
    amap = fit_alignment(_preprocess_table(src, args.preprocess),
                         _preprocess_table(tgt, args.preprocess),
                         dictionary, method=args.method)
    amap.dictionary_id = os.path.basename(args.dict)
    save_alignment(args.out, amap)
    print(f"fit {args.method} on {amap.usable_pairs} pairs "
          f"({amap.skipped_pairs} skipped) -> {args.out}")
    return 0


def run_translate_eval(src_table: DecontextTable, tgt_table: DecontextTable,
                       dict_train, dict_test, method: str, mode: str, k: int,
                       preprocess: str = "unit-center-unit"):
    """Fit per-layer maps on train pairs, retrieve over the full target
    table, and score P@1 per layer on the test pairs."""
    if len(dict_test) == 0:
        raise ConfigError("empty test dictionary")
    src_p = _preprocess_table(src_table, preprocess)
    tgt_p = _preprocess_table(tgt_table, preprocess)
    amap = fit_alignment(src_p, tgt_p, dict_train, method=method)
    rows = []
    for layer in range(3):
        words_t, mat_t = tgt_p.layer_matrix(layer)
        words_s, mat_s = src_p.layer_matrix(layer)
        mapped = mat_s @ amap.maps[layer].T
        index = RetrievalIndex(words_t, mat_t, mapped, k=min(k, len(words_t), len(words_s)))
        queries = [(w, mapped[i]) for i, w in enumerate(words_s)]
        ranked = translate(queries, index, mode=mode, topn=1)
        score = precision_at_1(ranked, dict_test)
        rows.append({"layer": layer, "method": method, "mode": mode, "k": index.k,
                     "evaluated": score.evaluated, "skipped": score.skipped,
                     "p_at_1": score.p_at_1})
    return rows, amap


def cmd_translate_eval(args) -> int:
    src = load_table(args.src)
    tgt = load_table(args.tgt)
    d_train = load_dictionary(_require_file(args.train_dict, "train dictionary"))
    d_test = load_dictionary(_require_file(args.test_dict, "test dictionary"), split="test")
    if len(d_test) == 0:
        raise ConfigError("empty test dictionary")
    rows, _ = run_translate_eval(src, tgt, d_train, d_test, args.method,
                                 args.mode, args.k, args.preprocess)
    payload = {k: v for k, v in vars(args).items() if k != "func"}
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(_tsv_header(payload))
        f.write("layer\tmethod\tmode\tk\tevaluated\tskipped\tp_at_1\n")
        for r in rows:
            f.write(f"{r['layer']}\t{r['method']}\t{r['mode']}\t{r['k']}\t"
                    f"{r['evaluated']}\t{r['skipped']}\t{r['p_at_1']:.4f}\n")
    for r in rows:
        print(f"layer {r['layer']}: P@1 {r['p_at_1']:.4f} "
              f"({r['evaluated']} evaluated, {r['skipped']} skipped)")
    return 0


def _build_embedder(kind: str, lm_path=None, alignments=None, vector_paths=None):
    if kind == "lm":
        lm = load_lm(_require_file(lm_path, "LM checkpoint"))
        maps = {lang: load_alignment(_require_file(p, f"alignment for {lang}"))
                for lang, p in (alignments or {}).items()}
        return LMEmbedder(lm, maps)
    if kind == "vectors":
        if not vector_paths:
            raise ConfigError("vector embedder needs --vectors lang=path[,...]")
        tables = {lang: load_vectors(p) for lang, p in vector_paths.items()}
        return FrozenVectorEmbedder(tables)
    raise ConfigError(f"unknown embedder kind {kind!r}")


def cmd_train_parser(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    train_banks = [load_conllu(p, language=lang)
                   for lang, p in _parse_lang_paths(args.train, "--train").items()]
    target = None
    if args.target:
        lang, path = next(iter(_parse_lang_paths(args.target, "--target").items()))
        target = load_conllu(path, language=lang)
    dev_lang, dev_path = next(iter(_parse_lang_paths(args.dev, "--dev").items()))
    dev = load_conllu(dev_path, language=dev_lang)

    embedder = _build_embedder(
        args.embedder, lm_path=args.lm,
        alignments=_parse_lang_paths(args.alignments, "--alignments") if args.alignments else None,
        vector_paths=_parse_lang_paths(args.vectors, "--vectors") if args.vectors else None)

    p_cfg = ParserConfig.from_dict({**cfg.get("parser", {}),
                                    **({"seed": args.seed} if args.seed is not None else {})})
    trained = train_parser(train_banks, target, dev, embedder, p_cfg)
    meta = {"kind": args.embedder, "lm": args.lm, "alignments": args.alignments,
            "vectors": args.vectors}
    save_parser(args.out, trained.model, meta)
    print(f"best dev LAS {trained.best_dev_las:.2f} at epoch {trained.best_epoch + 1}; "
          f"wrote {args.out}")
    return 0


def cmd_parse(args) -> int:
    model, meta = load_parser(_require_file(args.model, "parser checkpoint"))
    kind = args.embedder or meta.get("kind", "lm")
    embedder = _build_embedder(
        kind, lm_path=args.lm or meta.get("lm"),
        alignments=_parse_lang_paths(args.alignments, "--alignments")
        if args.alignments else (meta.get("alignments") and
                                 _parse_lang_paths(meta["alignments"], "alignments")),
        vector_paths=_parse_lang_paths(args.vectors, "--vectors")
        if args.vectors else (meta.get("vectors") and
                              _parse_lang_paths(meta["vectors"], "vectors")))
    tb = load_conllu(_require_file(args.input, "input treebank"), language=args.language)
    pred = parse_treebank(model, embedder, tb, decode=args.decode)
    save_conllu(args.out, pred)
    print(f"parsed {len(pred)} sentences -> {args.out}")
    return 0


def cmd_eval_parse(args) -> int:
    pred = load_conllu(_require_file(args.pred, "predicted treebank"))
    gold = load_conllu(_require_file(args.gold, "gold treebank"))
    score = evaluate(pred, gold)
    print(f"UAS {score.uas:.2f} LAS {score.las:.2f}")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    sim = cfg.get("simulate")
    if not isinstance(sim, dict):
        raise ConfigError("config needs a 'simulate' section")
    for key in ("sweep", "seeds", "target", "conditions"):
        if key not in sim:
            raise ConfigError(f"simulate section missing {key!r}")
    sweep = [int(x) for x in sim["sweep"]]
    if any(x < 0 for x in sweep):
        raise ConfigError("sweep values must be nonnegative")
    seeds = [int(x) for x in sim["seeds"]]
    tgt_cfg = sim["target"]
    tgt_lang = tgt_cfg["language"]
    tgt_pool = load_conllu(_require_file(tgt_cfg["treebank"], "target treebank"),
                           language=tgt_lang)
    tgt_test = load_conllu(_require_file(tgt_cfg["test"], "target test treebank"),
                           language=tgt_lang)
    max_need = max(sweep) + SimulationConfig(max(sweep)).dev_size
    if max_need > len(tgt_pool):
        raise ConfigError(f"target treebank has {len(tgt_pool)} sentences; "
                          f"largest sweep cell needs {max_need}")
    source_dev_path = sim.get("source_dev")

    conditions = {}
    for name, c in sim["conditions"].items():
        sources = [load_conllu(_require_file(s["treebank"], f"{name} source"),
                               language=s["language"]) for s in c.get("sources", [])]
        conditions[name] = {"lm": _require_file(c["lm"], f"{name} LM"), "sources": sources}

    os.makedirs(args.out, exist_ok=True)
    p_cfg_base = cfg.get("parser", {})
    results_path = os.path.join(args.out, "results.tsv")
    rows = []
    with open(results_path, "w", encoding="utf-8") as f:
        f.write(_tsv_header({"simulate": sim, "parser": p_cfg_base}))
        f.write("condition\tD_tau\tseed\tUAS\tLAS\n")
        f.flush()
        for name, cond in conditions.items():
            embedder = LMEmbedder(load_lm(cond["lm"]))
            for d_tau in sweep:
                if d_tau == 0 and not cond["sources"]:
                    print(f"skip: condition {name!r} at |D_tau|=0 "
                          f"(monolingual training needs target trees)")
                    continue
                for seed in seeds:
                    stage = f"condition={name} D_tau={d_tau} seed={seed}"
                    try:
                        tgt_train, tgt_dev = downsample(
                            tgt_pool, SimulationConfig(d_tau, seed=seed))
                        if d_tau == 0:
                            dev = load_conllu(_require_file(
                                source_dev_path, "source_dev (needed for zero-target)"))
                        else:
                            dev = tgt_dev
                        p_cfg = ParserConfig.from_dict({**p_cfg_base, "seed": seed})
                        if cond["sources"]:
                            trained = train_parser(cond["sources"],
                                                   tgt_train if d_tau else None,
                                                   dev, embedder, p_cfg)
                        else:
                            trained = train_parser([tgt_train], None, dev, embedder, p_cfg)
                        score = score_treebank(trained.model, embedder, tgt_test,
                                               decode="mst")
                    except CrosslabError as e:
                        raise CrosslabError(f"stage {stage} failed: {e}") from e
                    f.write(f"{name}\t{d_tau}\t{seed}\t{score.uas:.2f}\t{score.las:.2f}\n")
                    f.flush()
                    rows.append((name, d_tau, seed, score.uas, score.las))
                    print(f"{stage}: UAS {score.uas:.2f} LAS {score.las:.2f}")

    for name in conditions:
        path = os.path.join(args.out, f"plot-{name}.tsv")
        with open(path, "w", encoding="utf-8") as f:
            f.write(_tsv_header({"condition": name}))
            f.write("D_tau\tmean_LAS\tn_seeds\n")
            for d_tau in sweep:
                cell = [las for (n, d, _, _, las) in rows if n == name and d == d_tau]
                if cell:
                    f.write(f"{d_tau}\t{np.mean(cell):.2f}\t{len(cell)}\n")
    print(f"wrote {results_path} ({len(rows)} rows)")
    return 0


# -- entry point ------------------------------------------------------------------


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crosslab",
                                 description="crosslingual representation laboratory")
    sub = ap.add_subparsers(dest="command", required=True)
    default_cfg = os.environ.get(CONFIG_ENV)

    def add_config(p, required=True):
        p.add_argument("-c", "--config", default=default_cfg,
                       required=required and default_cfg is None,
                       help=f"YAML config (default from ${CONFIG_ENV})")

    p = sub.add_parser("train-lm", help="train a monolingual or polyglot LM")
    add_config(p)
    p.add_argument("--languages", required=True, help="comma-separated language codes")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoint-dir", help="write per-epoch checkpoints here")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("decontext", help="distill an LM into word-type vectors")
    p.add_argument("--lm", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--min-count", type=int, default=3)
    p.add_argument("--out", required=True, help="output prefix (.l0/.l1/.l2)")
    p.set_defaults(func=cmd_decontext)

    p = sub.add_parser("anchors", help="average contextual vectors per word")
    p.add_argument("--lm", required=True)
    p.add_argument("--corpus", required=True, help="one sentence per line")
    p.add_argument("--out", required=True, help="output prefix (.l0/.l1/.l2)")
    p.set_defaults(func=cmd_anchors)

    p = sub.add_parser("align", help="fit per-layer linear maps on a dictionary")
    p.add_argument("--src", required=True, help="source table prefix")
    p.add_argument("--tgt", required=True, help="target table prefix")
    p.add_argument("--dict", required=True)
    p.add_argument("--method", choices=("procrustes", "least-squares"),
                   default="procrustes")
    p.add_argument("--preprocess", choices=PREPROCESS_MODES, default="none")
    p.add_argument("--source-lang", default="")
    p.add_argument("--target-lang", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("translate-eval", help="word translation P@1 per layer")
    p.add_argument("--src", required=True, help="source table prefix")
    p.add_argument("--tgt", required=True, help="target table prefix")
    p.add_argument("--train-dict", required=True)
    p.add_argument("--test-dict", required=True)
    p.add_argument("--method", choices=("procrustes", "least-squares"),
                   default="procrustes")
    p.add_argument("--mode", choices=("csls", "cosine"), default="csls")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--preprocess", choices=PREPROCESS_MODES,
                   default="unit-center-unit")
    p.add_argument("--out", required=True, help="TSV report path")
    p.set_defaults(func=cmd_translate_eval)

    p = sub.add_parser("train-parser", help="train a biaffine dependency parser")
    add_config(p, required=False)
    p.add_argument("--train", required=True, help="lang=path[,lang=path...]")
    p.add_argument("--target", help="lang=path (stratified 50/50 with sources)")
    p.add_argument("--dev", required=True, help="lang=path")
    p.add_argument("--embedder", choices=("lm", "vectors"), default="lm")
    p.add_argument("--lm", help="LM checkpoint for the lm embedder")
    p.add_argument("--alignments", help="lang=map.txt[,...] applied to LM layers")
    p.add_argument("--vectors", help="lang=vectors.txt[,...] for the vectors embedder")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_parser)

    p = sub.add_parser("parse", help="annotate a treebank with predicted trees")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--language", default="")
    p.add_argument("--decode", choices=("mst", "greedy"), default="mst")
    p.add_argument("--embedder", choices=("lm", "vectors"))
    p.add_argument("--lm")
    p.add_argument("--alignments")
    p.add_argument("--vectors")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval-parse", help="UAS/LAS of predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.set_defaults(func=cmd_eval_parse)

    p = sub.add_parser("simulate", help="low-resource sweep over |D_tau| x conditions")
    add_config(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    return ap


def main(argv=None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except CrosslabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
