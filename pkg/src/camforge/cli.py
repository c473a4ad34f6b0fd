"""The `forge` command line: one binary, verb-noun subcommands.

Every subcommand reads its inputs up front (bad paths fail before any side
effect), writes files atomically, and keeps stdout machine-parseable under
``--format rows``.  Errors exit 1 with a single ``error: <category>: ...``
line on stderr; usage problems exit 2.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from importlib import resources
from pathlib import Path

from . import bench
from . import rouge as rouge_mod
from . import typology
from . import verify as verify_mod
from ._fileio import atomic_save_figure, atomic_write_text
from .errors import DataError, ForgeError
from .lexicon import Lexicon, sourcing_report
from .morphology import analyze, generate, gloss, load_cascade, serialize
from .phonology import (
    PhonemeInventory,
    generate_root_batch,
    load_slot_tables,
    tables_for_shape,
)


def _data_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


def _existing(path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise DataError(f"{what} not found: {p}")
    return p


def _emit(args, header: list[str], rows: list[list[object]]) -> None:
    cells = [[str(c) for c in row] for row in rows]
    if args.format == "rows":
        for row in cells:
            print("\t".join(row))
        return
    widths = [len(h) for h in header]
    for row in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    print("  ".join("-" * w for w in widths))
    for row in cells:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())


def _bar_figure(path, labels: list[str], values: list[float], title: str, ylabel: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(labels) + 2), 4))
    ax.bar(range(len(values)), values, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    atomic_save_figure(fig, path)
    plt.close(fig)


# ---------------------------------------------------------------- engine --


def _inventory(args) -> PhonemeInventory:
    return PhonemeInventory.from_file(_existing(args.inventory, "inventory file"))


def _cascade(args, inventory=None):
    inventory = inventory or _inventory(args)
    return load_cascade(_existing(args.rules, "rules file"), inventory)


def _lexicon(args, cascade):
    morph = args.morphemes if args.morphemes else None
    if morph is not None:
        morph = _existing(morph, "morpheme table")
    return Lexicon.load(_existing(args.lexicon, "lexicon file"), cascade=cascade, morph_path=morph)


def cmd_derive(args) -> int:
    cascade = _cascade(args)
    surface = generate(" ".join(args.uform), cascade, trace=args.trace)
    print(surface.text)
    if args.trace:
        for step in surface.trace:
            print(f"# {step.unit}\t{step.phase}\t{step.rule}\t{step.before} -> {step.after}")
    return 0


def cmd_analyze(args) -> int:
    cascade = _cascade(args)
    lex = _lexicon(args, cascade)
    parses = analyze(
        " ".join(args.surface),
        cascade,
        lex,
        max_affixes=args.max_affixes,
        max_candidates=args.max_candidates,
    )
    if not parses:
        print("no parse", file=sys.stderr)
        return 0
    if args.gloss:
        rows = [[serialize(p), gloss(p, lex)] for p in parses]
        _emit(args, ["underlying", "gloss"], rows)
    else:
        for p in parses:
            print(serialize(p))
    return 0


def cmd_roots(args) -> int:
    inventory = _inventory(args)
    tables = load_slot_tables(_existing(args.tables, "slot tables file"))
    seed = args.seed
    if seed is None:
        seed = random.SystemRandom().randrange(2**32)
        print(f"# seed\t{seed}")
    rng = random.Random(seed)
    batch = generate_root_batch(
        rng,
        tables_for_shape(args.shape, tables),
        inventory,
        args.count,
        args.shape,
        dedup=args.dedup,
    )
    for root in batch:
        print(root.text)
    return 0


# --------------------------------------------------------------- lexicon --


def _entry_row(entry) -> list[str]:
    return [
        entry.underlying,
        entry.citation,
        entry.gloss or "-",
        entry.pos,
        entry.honorific,
        entry.sourcing,
    ]


_ENTRY_HEADER = ["underlying", "citation", "gloss", "pos", "honorific", "sourcing"]


def cmd_lex_lookup(args) -> int:
    cascade = _cascade(args)
    lex = _lexicon(args, cascade)
    entries = lex.lookup(args.key, mode=f"by_{args.mode}", cascade=cascade)
    if not entries:
        print("no match", file=sys.stderr)
        return 0
    _emit(args, _ENTRY_HEADER, [_entry_row(e) for e in entries])
    return 0


def cmd_lex_derive(args) -> int:
    cascade = _cascade(args)
    lex = _lexicon(args, cascade)
    stems = lex.lookup(args.stem, mode="by_underlying", cascade=cascade)
    if not stems:
        raise DataError(f"no lexicon entry with underlying form {args.stem!r}")
    candidate = lex.derive(stems[0], args.affix, cascade)
    _emit(args, _ENTRY_HEADER, [_entry_row(candidate)])
    return 0


def cmd_lex_compound(args) -> int:
    cascade = _cascade(args)
    lex = _lexicon(args, cascade)
    parts = []
    for form in args.part:
        found = lex.lookup(form, mode="by_underlying", cascade=cascade)
        if not found:
            raise DataError(f"no lexicon entry with underlying form {form!r}")
        parts.append(found[0])
    candidate = lex.compound(parts, cascade)
    _emit(args, _ENTRY_HEADER, [_entry_row(candidate)])
    return 0


def cmd_lex_report(args) -> int:
    cascade = _cascade(args)
    lex = _lexicon(args, cascade)
    report = sourcing_report(lex)
    _emit(
        args,
        ["sourcing", "count", "percent"],
        [[row.category, row.count, f"{row.percent:.2f}"] for row in report],
    )
    if args.plot:
        _bar_figure(
            args.plot,
            [row.category for row in report],
            [row.percent for row in report],
            "Lexicon sourcing",
            "% of entries",
        )
    return 0


def cmd_lex_export(args) -> int:
    cascade = _cascade(args)
    lex = _lexicon(args, cascade)
    lex.export(args.out, model_facing=args.model_facing)
    print(f"wrote {args.out}")
    return 0


# -------------------------------------------------------------- typology --


def _wals_corpus(args) -> typology.Corpus:
    path = args.wals or os.environ.get("FORGE_WALS_CSV") or (_data_dir() / "demo.wals")
    corpus = typology.load_corpus(_existing(path, "WALS corpus"))
    if corpus.get("cam") is None:
        corpus = typology.Corpus(
            profiles=corpus.profiles + (typology.camlang_profile(),),
            duplicate_count=corpus.duplicate_count,
        )
    return corpus


def _resolve_language(corpus: typology.Corpus, name: str) -> typology.WalsProfile:
    if corpus.get(name) is not None:
        return corpus.profile(name)
    if name.lower() == "camlang":
        return corpus.profile("cam")
    lowered = name.lower()
    for prof in corpus:
        if prof.name.lower() == lowered:
            return prof
    raise DataError(f"no language {name!r} in the corpus")


def cmd_typo_sim(args) -> int:
    corpus = _wals_corpus(args)
    x = _resolve_language(corpus, args.x)
    y = _resolve_language(corpus, args.y)
    result = typology.similarity(x, y, args.min_overlap)
    if result is None:
        _emit(args, ["x", "y", "overlap", "matches", "similarity"],
              [[x.language_code, y.language_code, "-", "-", "below-threshold"]])
        return 0
    _emit(
        args,
        ["x", "y", "overlap", "matches", "similarity"],
        [[x.language_code, y.language_code, result.overlap, result.matches, f"{result.similarity:.4f}"]],
    )
    return 0


def cmd_typo_neighbours(args) -> int:
    corpus = _wals_corpus(args)
    target = _resolve_language(corpus, args.x)
    ranked = typology.neighbours(target, corpus, args.min_overlap, args.k)
    rows = []
    for rank, res in enumerate(ranked, start=1):
        code = res.pair[1]
        prof = corpus.get(code)
        rows.append([rank, code, prof.name if prof and prof.name else "-",
                     f"{res.similarity:.4f}", res.overlap])
    _emit(args, ["rank", "code", "name", "similarity", "overlap"], rows)
    return 0


def cmd_typo_richness(args) -> int:
    corpus = _wals_corpus(args)
    target = _resolve_language(corpus, args.x)
    others = typology.Corpus(
        profiles=tuple(p for p in corpus if p.language_code != target.language_code),
        duplicate_count=0,
    )
    if len(others) == 0:
        raise DataError("richness needs at least one other language in the corpus")
    pct = typology.richness_percentile(target, others)
    _emit(
        args,
        ["language", "features", "corpus_size", "richness_percentile"],
        [[target.language_code, len(target.features), len(others), f"{pct:.4f}"]],
    )
    if args.plot:
        counts = sorted(len(p.features) for p in others)
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 4))
        ax.hist(counts, bins=20, color="#4878a8")
        ax.axvline(len(target.features), color="#a84848", linestyle="--",
                   label=f"{target.language_code} ({len(target.features)})")
        ax.set_xlabel("documented features per language")
        ax.set_ylabel("languages")
        ax.set_title("Feature-count distribution")
        ax.legend()
        fig.tight_layout()
        atomic_save_figure(fig, args.plot)
        plt.close(fig)
    return 0


# ----------------------------------------------------------------- rouge --


def cmd_rouge(args) -> int:
    sets = rouge_mod.load_translations(_existing(args.corpus, "translation corpus"))
    chosen = [s for s in sets if s.round == args.round]
    if args.granularity:
        chosen = [s for s in chosen if s.granularity == args.granularity]
    if not chosen:
        raise DataError(f"no translation sets for round {args.round}")
    report = rouge_mod.consistency_report(chosen)
    rows = [
        [gran, f"{scores.r1:.2f}", f"{scores.r2:.2f}", f"{scores.rl:.2f}"]
        for gran, scores in sorted(report.items())
    ]
    _emit(args, ["granularity", "r1", "r2", "rl"], rows)
    return 0


# ----------------------------------------------------------------- bench --


def cmd_bench_run(args) -> int:
    tasks = bench.load_tasks(_existing(args.tasks, "task file"))
    res = bench.load_resources(_existing(args.resources, "resource directory"))
    if args.replay:
        transport = bench.replay_transport(_existing(args.replay, "replay directory"))
    elif args.model:
        config = bench.ModelEndpointConfig.from_env(
            args.model, timeout_s=args.timeout, retries=args.retries
        )
        transport = bench.http_transport(config)
    else:
        raise DataError("bench run needs --replay <dir> or --model <name> with FORGE_API_BASE set")
    report = bench.run_eval(
        tasks,
        res,
        transport,
        mode=args.mode,
        parallelism=args.parallelism,
        out_path=args.out,
    )
    rows = [
        [r.instance_id, r.gold, r.extracted or "-",
         "true" if r.correct else "false", f"{r.latency_s:.3f}"]
        for r in report.results
    ]
    _emit(args, ["instance", "gold", "extracted", "correct", "latency_s"], rows)
    print(f"em\t{report.em:.4f}")
    print(f"mean_latency_s\t{report.mean_latency_s:.4f}")
    return 0


def cmd_bench_stats(args) -> int:
    tasks = bench.load_tasks(_existing(args.tasks, "task file"))
    stats = bench.length_stats(tasks, args.language)
    rows = [[f"{low}-{high}", count] for low, high, count in stats.bins]
    _emit(args, ["tokens", "questions"], rows)
    print(f"mean_tokens\t{stats.mean_tokens:.2f}")
    print(f"n_questions\t{stats.count}")
    if args.plot:
        _bar_figure(
            args.plot,
            [f"{low}-{high}" for low, high, _ in stats.bins],
            [count for _, _, count in stats.bins],
            f"Question length ({args.language})",
            "questions",
        )
    return 0


# ---------------------------------------------------------------- verify --


def cmd_verify_score(args) -> int:
    records = verify_mod.load_labels(
        _existing(args.labels, "label file"), allow_em_incorrect=args.allow_full_labels
    )
    by_system = verify_mod.split_by_system(records)
    if args.system:
        if args.system not in by_system:
            raise DataError(f"no records for system {args.system!r}")
        by_system = {args.system: by_system[args.system]}
    rows = []
    for system in sorted(by_system):
        usable = [r for r in by_system[system] if r.em_correct]
        metrics = verify_mod.compute_metrics(usable, args.n_total)
        rows.append(
            [system, len(usable), f"{100 * metrics.shv:.2f}", f"{100 * metrics.mhv:.2f}",
             f"{100 * metrics.lhv:.2f}", f"{100 * metrics.em:.2f}"]
        )
    _emit(args, ["system", "records", "shv", "mhv", "lhv", "em"], rows)
    return 0


def cmd_verify_dist(args) -> int:
    records = verify_mod.load_labels(
        _existing(args.labels, "label file"), allow_em_incorrect=args.allow_full_labels
    )
    by_system = verify_mod.split_by_system(records)
    if args.system:
        if args.system not in by_system:
            raise DataError(f"no records for system {args.system!r}")
        by_system = {args.system: by_system[args.system]}
    rows = []
    plot_rows = []
    for system in sorted(by_system):
        for row in verify_mod.distribution_report(by_system[system]):
            rows.append([system, row.aspect, row.label, row.count, f"{row.percent:.2f}"])
            plot_rows.append((f"{row.aspect}\n{row.label}", row.percent))
    _emit(args, ["system", "aspect", "label", "count", "percent"], rows)
    if args.plot:
        if len(by_system) > 1:
            raise DataError("--plot wants a single system; pass --system")
        _bar_figure(
            args.plot,
            [label for label, _ in plot_rows],
            [pct for _, pct in plot_rows],
            f"Label distribution ({next(iter(by_system))})",
            "% of labelled records",
        )
    return 0


# ---------------------------------------------------------------- parser --


def build_parser() -> argparse.ArgumentParser:
    data = _data_dir()
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Constructed-language toolkit: derivation, analysis, lexicon, typology, evaluation.",
    )
    parser.add_argument(
        "--format", choices=("rows", "pretty"), default="rows",
        help="tab-separated rows (default) or aligned tables",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def engine_flags(p):
        p.add_argument("--rules", default=data / "demo.rules", help="rule cascade file")
        p.add_argument("--inventory", default=data / "inventory.tsv", help="phoneme inventory file")

    def lexicon_flags(p):
        p.add_argument("--lexicon", default=data / "demo.lex", help="lexicon TSV")
        p.add_argument("--morphemes", default=None, help="functional morpheme TSV (default: sibling .morph)")

    p = sub.add_parser("derive", help="run an underlying form through the cascade")
    engine_flags(p)
    p.add_argument("uform", nargs="+", help="underlying form, e.g. 'cak -mA4'")
    p.add_argument("--trace", action="store_true", help="print per-rule steps")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("analyze", help="recover underlying forms for a surface string")
    engine_flags(p)
    lexicon_flags(p)
    p.add_argument("surface", nargs="+")
    p.add_argument("--gloss", action="store_true", help="add an interlinear gloss column")
    p.add_argument("--max-affixes", type=int, default=6)
    p.add_argument("--max-candidates", type=int, default=10)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("roots", help="sample roots from the slot tables")
    roots_sub = p.add_subparsers(dest="roots_command", required=True)
    g = roots_sub.add_parser("generate", help="sample a batch of roots")
    g.add_argument("--inventory", default=data / "inventory.tsv")
    g.add_argument("--tables", default=data / "roots.tables", help="slot frequency tables")
    g.add_argument("-n", "--count", type=int, default=20)
    g.add_argument("--shape", choices=("mono", "bi", "monosyllabic", "bisyllabic"), default="mono")
    g.add_argument("--seed", type=int, default=None, help="RNG seed; omitted = fresh seed, printed")
    g.add_argument("--dedup", action="store_true", help="redraw duplicates")
    g.set_defaults(func=cmd_roots)

    p = sub.add_parser("lex", help="lexicon lookups, candidates and reports")
    lex_sub = p.add_subparsers(dest="lex_command", required=True)
    for name, fn in (
        ("lookup", cmd_lex_lookup),
        ("derive", cmd_lex_derive),
        ("compound", cmd_lex_compound),
        ("report", cmd_lex_report),
        ("export", cmd_lex_export),
    ):
        q = lex_sub.add_parser(name)
        engine_flags(q)
        lexicon_flags(q)
        if name == "lookup":
            q.add_argument("key")
            q.add_argument("--mode", choices=("surface", "underlying", "citation"), default="surface")
        elif name == "derive":
            q.add_argument("stem", help="underlying form of the stem entry")
            q.add_argument("affix", help="affix notation; put -- before affixes that start with a dash, e.g. lex derive jer -- -mA4")
        elif name == "compound":
            q.add_argument("part", nargs="+", help="underlying forms of the parts")
        elif name == "report":
            q.add_argument("--plot", default=None, help="write a sourcing bar chart here")
        elif name == "export":
            q.add_argument("out")
            q.add_argument("--model-facing", action="store_true", help="drop the etymology column")
        q.set_defaults(func=fn)

    p = sub.add_parser("typo", help="typological similarity and richness")
    typo_sub = p.add_subparsers(dest="typo_command", required=True)
    s = typo_sub.add_parser("sim")
    s.add_argument("x")
    s.add_argument("y")
    s.add_argument("--min-overlap", type=int, default=1)
    s.add_argument("--wals", default=None, help="WALS-format corpus (default: $FORGE_WALS_CSV or shipped demo)")
    s.set_defaults(func=cmd_typo_sim)
    s = typo_sub.add_parser("neighbours")
    s.add_argument("x")
    s.add_argument("--min-overlap", type=int, default=1)
    s.add_argument("-k", type=int, default=1)
    s.add_argument("--wals", default=None)
    s.set_defaults(func=cmd_typo_neighbours)
    s = typo_sub.add_parser("richness")
    s.add_argument("x")
    s.add_argument("--wals", default=None)
    s.add_argument("--plot", default=None, help="write a feature-count histogram here")
    s.set_defaults(func=cmd_typo_richness)

    p = sub.add_parser("rouge", help="cross-annotator consistency scores")
    p.add_argument("corpus", nargs="?", default=data / "translations.tsv")
    p.add_argument("--round", type=int, required=True)
    p.add_argument("--granularity", choices=("word", "morpheme"), default=None)
    p.set_defaults(func=cmd_rouge)

    p = sub.add_parser("bench", help="multiple-choice evaluation")
    bench_sub = p.add_subparsers(dest="bench_command", required=True)
    r = bench_sub.add_parser("run")
    r.add_argument("--tasks", default=data / "tasks.jsonl")
    r.add_argument("--resources", default=data, help="directory with grammar.md and vocab.tsv")
    r.add_argument("--mode", default="context")
    r.add_argument("--parallelism", type=int, default=1)
    r.add_argument("--replay", default=None, help="read responses from <dir>/<instance id>.txt")
    r.add_argument("--model", default=None, help="model name for a live endpoint (FORGE_API_BASE)")
    r.add_argument("--timeout", type=float, default=600.0)
    r.add_argument("--retries", type=int, default=2)
    r.add_argument("--out", default=None, help="persist the full report here")
    r.set_defaults(func=cmd_bench_run)
    r = bench_sub.add_parser("stats")
    r.add_argument("--tasks", default=data / "tasks.jsonl")
    r.add_argument("--language", choices=("camlang", "english_source"), default="camlang")
    r.add_argument("--plot", default=None, help="write a length histogram here")
    r.set_defaults(func=cmd_bench_stats)

    p = sub.add_parser("verify", help="human-verification metrics")
    verify_sub = p.add_subparsers(dest="verify_command", required=True)
    v = verify_sub.add_parser("score")
    v.add_argument("--labels", default=data / "labels_gpt5_context.tsv")
    v.add_argument("--n-total", type=int, required=True)
    v.add_argument("--system", default=None)
    v.add_argument("--allow-full-labels", action="store_true",
                   help="accept labels on EM-incorrect rows (excluded from metrics)")
    v.set_defaults(func=cmd_verify_score)
    v = verify_sub.add_parser("dist")
    v.add_argument("--labels", default=data / "labels_gpt5_context.tsv")
    v.add_argument("--system", default=None)
    v.add_argument("--allow-full-labels", action="store_true")
    v.add_argument("--plot", default=None, help="write a label-distribution chart here")
    v.set_defaults(func=cmd_verify_dist)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    try:
        return args.func(args)
    except ForgeError as err:
        print(err.oneline(), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
