"""Command line interface: ``seglink <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import agents
from .experiments import (GRID_WALK, K_SEGMENT, PAIRWISE, CorpusMissing, ExperimentSpec, LinkCache,
                          cache_dir, corpus_fingerprint, get_models, link_stats,
                          read_segments, rows_from_csv, run_k_segment_experiment,
                          run_multi_segment_usability, run_pairwise_sweep, save_models,
                          synthesize_segments, write_report, write_segments)
from .level import LevelError, load_config, load_level, pad_level
from .linking import (BC_MATCH_REQUIRED, STRATEGIES, LinkRequest, assemble, build_link)
from .markov import Exhausted
from .render import render_svg, render_text


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--game", default="mario", help="config JSON path or shipped game name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", default=None,
                   help="max linker search depth, or a depth preset from the game config")
    p.add_argument("--strategy", action="append", default=None,
                   help="linking strategy; repeat or comma-separate for several")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="seglink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train and cache the game models")
    p.add_argument("--corpus", type=Path, default=None)

    p = sub.add_parser("segments", parents=[common], help="sample a segment corpus")
    p.add_argument("--count", type=int, default=100)

    p = sub.add_parser("link", parents=[common], help="link one pair of segments")
    p.add_argument("start", type=Path)
    p.add_argument("end", type=Path)
    p.add_argument("--svg", type=Path, default=None)

    for name, helptext in (("sweep", "pairwise sweep over neighboring segments"),
                           ("chain", "random k-segment levels"),
                           ("usability", "grid-walk multi-segment usability"),
                           ("stats", "linker length and D_BC statistics")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--segments", type=Path, default=None,
                       help="directory of segment .txt files (default: synthesize)")
        p.add_argument("--count", type=int, default=100, help="segments to synthesize")
        p.add_argument("--depth-preset", default=None)
        if name in ("sweep", "stats"):
            p.add_argument("--pairs", type=int, default=None, help="cap on swept pairs")
        if name == "stats":
            p.add_argument("--from-csv", type=Path, default=None,
                           help="read rows from an existing pairs.csv")
        if name in ("chain", "usability"):
            p.add_argument("--k", default="2", help="segment count, or comma list")
            p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("render", parents=[common], help="render a level as text or SVG")
    p.add_argument("level", type=Path)
    p.add_argument("--svg", type=Path, default=None)
    p.add_argument("--path", action="store_true", help="pad the level and overlay the agent path")
    return parser


def _strategies(args, default) -> tuple[str, ...]:
    if not args.strategy:
        return tuple(default)
    out = []
    for item in args.strategy:
        out.extend(s for s in item.split(",") if s)
    bad = [s for s in out if s not in STRATEGIES]
    if bad:
        raise ValueError(f"unknown strategy {bad[0]!r}; choose from {', '.join(STRATEGIES)}")
    return tuple(out)


def _depth(args, config) -> int | None:
    if args.depth is None:
        return None
    if str(args.depth).isdigit():
        return int(args.depth)
    return config.depth(args.depth)


def _segments(args, models):
    if args.segments is not None:
        return read_segments(args.segments, models.config)
    root = cache_dir()
    if root is not None:
        where = (root / models.config.name / corpus_fingerprint(models.config)
                 / f"segments-{args.count}-{args.seed}")
        if (where / "index.json").exists():
            return read_segments(where, models.config)
        segs = synthesize_segments(models, args.count, args.seed)
        write_segments(segs, where)
        return segs
    return synthesize_segments(models, args.count, args.seed)


def _emit(args, report, rows_name: str) -> None:
    if args.out is not None:
        write_report(report, args.out, args.format, rows_name)
    sys.stdout.write(report.summary_json())


def cmd_train(args, config) -> int:
    models = get_models(config, args.corpus)
    info = {"game": config.name, "order": models.ngram.order,
            "vocabulary": len(models.ngram.vocabulary), "priors": len(models.ngram.successors),
            "forward_contexts": len(models.forward.transitions),
            "backward_contexts": len(models.backward.transitions),
            "linking_slices": len(models.linking.slices), "linking_source": models.linking.source}
    if args.out is not None:
        save_models(models, args.out, corpus_fingerprint(config, args.corpus))
        info["saved_to"] = str(args.out)
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def cmd_segments(args, config) -> int:
    models = get_models(config)
    segs = synthesize_segments(models, args.count, args.seed)
    out = args.out or Path(f"segments-{config.name}")
    write_segments(segs, out)
    print(json.dumps({"game": config.name, "count": len(segs), "out": str(out)}))
    return 0


def cmd_link(args, config) -> int:
    models = get_models(config)
    start, end = load_level(args.start, config), load_level(args.end, config)
    strategies = _strategies(args, [s for s in STRATEGIES
                                    if s != BC_MATCH_REQUIRED or config.required_tag])
    depth = _depth(args, config)
    results = {}
    for s in strategies:
        kwargs = {"max_depth": depth}
        if s == BC_MATCH_REQUIRED:
            kwargs["required_tag"] = config.required_tag or "food"
        r = build_link(LinkRequest(start, end, s, **kwargs), models)
        results[s] = r
    print(json.dumps({s: r.to_json() for s, r in results.items()}, indent=2, sort_keys=True))
    if args.svg is not None or args.out is not None:
        for s, r in results.items():
            if not r.status == "linked":
                continue
            level, extents = assemble([start, end], [r], config)
            svg = render_svg(level, config, extents)
            target = args.svg if args.svg is not None and len(results) == 1 else \
                (args.out or Path(".")) / f"link-{s}.svg"
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(svg, encoding="utf-8")
    return 0


def _spec(args, config, mode, strategies, k=2, trials=1000) -> ExperimentSpec:
    return ExperimentSpec(
        game=config.name, mode=mode, strategies=strategies, k=k, trials=trials,
        seed=args.seed, depth_preset=args.depth_preset, max_depth=_depth(args, config),
        max_pairs=getattr(args, "pairs", None), jobs=args.jobs)


def cmd_sweep(args, config) -> int:
    models = get_models(config)
    segs = _segments(args, models)
    spec = _spec(args, config, PAIRWISE, _strategies(args, ["null", "shortest"]))
    _emit(args, run_pairwise_sweep(spec, models, segs), "pairs")
    return 0


def _ks(text: str) -> list[int]:
    return [int(k) for k in str(text).split(",") if k]


def cmd_chain(args, config) -> int:
    models = get_models(config)
    segs = _segments(args, models)
    combined = {}
    for k in _ks(args.k):
        spec = _spec(args, config, K_SEGMENT, _strategies(args, ["null", "shortest"]), k,
                     args.trials)
        report = run_k_segment_experiment(spec, models, segs)
        combined[k] = report
        if args.out is not None:
            write_report(report, args.out / f"k{k}", args.format, "chains")
    sys.stdout.write(json.dumps({str(k): r.summary for k, r in combined.items()},
                                indent=2, sort_keys=True) + "\n")
    return 0


def cmd_usability(args, config) -> int:
    models = get_models(config)
    segs = _segments(args, models)
    combined = {}
    cache = LinkCache(models, segs)
    for k in _ks(args.k):
        spec = _spec(args, config, GRID_WALK, _strategies(args, ["shortest"]), k, args.trials)
        report = run_multi_segment_usability(spec, models, segs, cache)
        combined[k] = report
        if args.out is not None:
            write_report(report, args.out / f"k{k}", args.format, "levels")
    sys.stdout.write(json.dumps({str(k): r.summary for k, r in combined.items()},
                                indent=2, sort_keys=True) + "\n")
    return 0


def cmd_stats(args, config) -> int:
    if args.from_csv is not None:
        rows = rows_from_csv(args.from_csv.read_text(encoding="utf-8"))
    else:
        models = get_models(config)
        segs = _segments(args, models)
        spec = _spec(args, config, PAIRWISE, _strategies(args, ["null", "shortest", "bc_match"]))
        rows = run_pairwise_sweep(spec, models, segs).rows
    stats = link_stats(rows)
    text = json.dumps(stats, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "stats.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_render(args, config) -> int:
    level = load_level(args.level, config)
    path, padding = (), (0, 0)
    if args.path:
        level = pad_level(level, config)
        path = agents.check(level, config).path
        padding = (len(config.padding_start), len(config.padding_end))
    sys.stdout.write(render_text(level))
    if args.svg is not None:
        args.svg.parent.mkdir(parents=True, exist_ok=True)
        args.svg.write_text(render_svg(level, config, (), path, padding), encoding="utf-8")
    return 0


COMMANDS = {"train": cmd_train, "segments": cmd_segments, "link": cmd_link,
            "sweep": cmd_sweep, "chain": cmd_chain, "usability": cmd_usability,
            "stats": cmd_stats, "render": cmd_render}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.game)
        return COMMANDS[args.command](args, config)
    except (LevelError, CorpusMissing, Exhausted, FileNotFoundError, ValueError,
            KeyError, RuntimeError) as exc:
        print(f"seglink: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
