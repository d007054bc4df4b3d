"""Command-line entry point.

Every subcommand prints one JSON line to stdout: a summary on success, or
``{"error": ..., "type": ...}`` on failure with exit status 1 (usage),
2 (bad data) or 3 (capacity or exhaustion).
"""

import argparse
import json
import os
import sys

from .bias import default_registry, check_conformance, load_comparison_pairings, override_registry
from .datasets import DEFAULT_BAND, DEFAULT_COUNT_MAX_SHARE, build_named_set, build_named_set_with_scenes
from .errors import ConfigError, D3Error, DataError, UsageError
from .evaluation import EvalReport, delta_heatmap, diversity_stats, score
from .mixing import MixturePlan, apply_d3, build_mixture, fraction_grid, length_split, parse_fraction
from .oracle import differential_run
from .scene import SceneConfig, sample_scenes
from .seeds import as_seed, master_seed_from_env
from .storage import (
    read_dataset,
    read_json,
    read_predictions,
    read_scenes,
    write_csv,
    write_dataset,
    write_json,
    write_lines,
    write_scenes,
)

GEN_CONFIG_KEYS = {"registry", "comparison_pairings", "band", "count_max_share", "n_scenes", "scene"}
SCENE_CONFIG_KEYS = {"min_objects", "max_objects", "margin", "arena_half_width", "condition", "pairing_table",
                     "max_attempts"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed(args):
    seed = args.seed if args.seed is not None else master_seed_from_env()
    return as_seed(seed)


def _load_config(path, allowed):
    if path is None:
        return {}
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def _registry(config):
    pairings = config.get("comparison_pairings")
    if isinstance(pairings, str):
        pairings = load_comparison_pairings(pairings)
    registry = default_registry(pairings)
    return override_registry(registry, config.get("registry", {}))


def _scene_config(config):
    scene = config.get("scene", {})
    unknown = set(scene) - SCENE_CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown scene config keys {sorted(unknown)}")
    return scene


def cmd_gen_scenes(args):
    config = _scene_config({"scene": _load_config(args.config, SCENE_CONFIG_KEYS)})
    config = {**config, **{k: v for k, v in (("min_objects", args.min_objects), ("max_objects", args.max_objects),
                                              ("condition", args.condition)) if v is not None}}
    scenes = sample_scenes(SceneConfig(**config), _seed(args).child("gen-scenes"), args.n, prefix=args.prefix)
    write_scenes(scenes, args.out)
    return {"command": "gen-scenes", "scenes": len(scenes), "out": args.out}


def cmd_gen_questions(args):
    config = _load_config(args.config, GEN_CONFIG_KEYS)
    registry = _registry(config)
    kwargs = {"band": DEFAULT_BAND, "count_max_share": DEFAULT_COUNT_MAX_SHARE}
    if "band" in config:
        kwargs["band"] = tuple(float(parse_fraction(b)) for b in config["band"])
    if "count_max_share" in config:
        kwargs["count_max_share"] = float(parse_fraction(config["count_max_share"]))
    seed = _seed(args)
    if args.scenes:
        scenes = read_scenes(args.scenes)
        records = build_named_set(args.set, scenes, args.budget, seed.child("set-" + args.set), registry, **kwargs)
    else:
        scenes, records = build_named_set_with_scenes(
            args.set, args.budget, seed, registry, config.get("n_scenes"), _scene_config(config), **kwargs
        )
    write_dataset(records, args.out)
    if args.scenes_out:
        write_scenes(scenes, args.scenes_out)
    return {"command": "gen-questions", "set": args.set, "records": len(records), "scenes": len(scenes),
            "out": args.out}


def _provenance(records):
    counts = {}
    for r in records:
        counts[r.source_set] = counts.get(r.source_set, 0) + 1
    return counts


def cmd_mix_d3(args):
    base = read_dataset(args.base)
    d3 = read_dataset(args.d3)
    mixed = apply_d3(base, d3, parse_fraction(args.proportion), _seed(args).child("mix-d3"))
    write_dataset(mixed, args.out)
    return {"command": "mix-d3", "records": len(mixed), "provenance": _provenance(mixed), "out": args.out}


def _named_paths(items, flag):
    out = {}
    for item in items or []:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"{flag} expects NAME=PATH, got {item!r}")
        out[name] = path
    return out


def cmd_mix_fractions(args):
    data = read_json(args.plan)
    if not isinstance(data, dict):
        raise ConfigError(f"{args.plan}: plan must be a JSON object")
    if args.seed is not None:
        data = {**data, "seed": args.seed}
    elif "seed" not in data:
        data = {**data, "seed": master_seed_from_env()}
    plan = MixturePlan.from_json(data)
    paths = _named_paths(args.pool, "--pool")
    pools = {name: read_dataset(paths[name]) for name, _ in plan.sources if name in paths}
    mixed = build_mixture(plan, pools, as_seed(plan.seed).child("mix-fractions"))
    write_dataset(mixed, args.out)
    return {"command": "mix-fractions", "records": len(mixed), "provenance": _provenance(mixed), "out": args.out}


def cmd_grid(args):
    vectors = fraction_grid(args.k, parse_fraction(args.step))
    rows = [json.dumps([str(f) for f in v], separators=(",", ":")) for v in vectors]
    summary = {"command": "grid", "k": args.k, "step": args.step, "vectors": len(vectors)}
    if args.out:
        write_lines(rows, args.out)
        summary["out"] = args.out
    else:
        summary["grid"] = [[str(f) for f in v] for v in vectors]
    return summary


def cmd_split_length(args):
    records = read_dataset(args.data)
    split = length_split(records, args.short_max, args.base_exact, args.long_min, args.long_max)
    os.makedirs(args.out_dir, exist_ok=True)
    for part, recs in (("short", split.short), ("base", split.base), ("long", split.long),
                       ("out_of_band", split.out_of_band)):
        write_dataset(recs, os.path.join(args.out_dir, f"{part}.jsonl"))
    return {"command": "split-length", "records": len(records), **split.sizes(), "out_dir": args.out_dir}


def cmd_audit(args):
    records = read_dataset(args.data)
    summary = {"command": "audit", "records": len(records)}
    if args.set:
        registry = _registry(_load_config(args.config, GEN_CONFIG_KEYS))
        if args.set not in registry:
            raise UsageError(f"unknown set {args.set!r}")
        violations = [(r.id, v) for r in records for v in check_conformance(r, registry[args.set])]
        summary["set"] = args.set
        summary["violations"] = len(violations)
    stats = diversity_stats(records)
    if args.out:
        report = {**summary, "diversity": stats.to_json()}
        if args.set:
            report["violation_details"] = [{"id": i, "violation": v} for i, v in violations]
        write_json(report, args.out)
        summary["out"] = args.out
    else:
        summary["hop_histogram"] = {str(k): v for k, v in stats.hop_histogram.items()}
        summary["signatures"] = len(stats.signature_coverage)
    if args.set and violations and args.strict:
        raise DataError(f"{len(violations)} conformance violations against {args.set}")
    return summary


def cmd_eval(args):
    gold = read_dataset(args.gold)
    preds = read_predictions(args.pred)
    report = score(preds, gold, args.set_name, strict=not args.lenient)
    os.makedirs(args.out_dir, exist_ok=True)
    write_json(report.to_json(), os.path.join(args.out_dir, "report.json"))
    rows = [["set", "name", "n", "accuracy"], ["all", report.set_name, report.n, f"{float(report.accuracy):.6f}"]]
    rows += [["family", f, t.n, f"{float(t.accuracy):.6f}"] for f, t in report.per_family.items()]
    rows += [["hop", h, t.n, f"{float(t.accuracy):.6f}"] for h, t in report.per_hop.items()]
    write_csv(rows, os.path.join(args.out_dir, "report.csv"))
    return {"command": "eval", "set": report.set_name, "n": report.n, "correct": report.correct,
            "accuracy": float(report.accuracy), "missing": report.missing, "out_dir": args.out_dir}


def _load_report(path):
    data = read_json(path)
    try:
        return EvalReport(data["set_name"], int(data["n"]), int(data["correct"]),
                          int(data.get("missing_predictions", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: not an eval report ({exc})") from exc


def cmd_heatmap(args):
    base = [_load_report(p) for p in args.base]
    variants = {}
    for item in args.variant:
        name, sep, paths = item.partition("=")
        if not sep or not name:
            raise UsageError(f"--variant expects NAME=REPORT[,REPORT...], got {item!r}")
        variants[name] = [_load_report(p) for p in paths.split(",")]
    heatmap = delta_heatmap(base, variants)
    write_csv(heatmap.to_csv_rows(), args.out)
    return {"command": "heatmap", "rows": heatmap.rows, "cols": heatmap.cols, "out": args.out}


def cmd_oracle_check(args):
    pairs, resolved, mismatches = differential_run(args.n, _seed(args).child("oracle-check"))
    summary = {"command": "oracle-check", "scenes": args.n, "pairs": pairs, "resolved": resolved,
               "mismatches": len(mismatches)}
    if mismatches:
        scene, program, got, expected = mismatches[0]
        raise DataError(f"executor and oracle disagree on {len(mismatches)} of {pairs} pairs; first: scene "
                        f"{scene.id}, program {program.to_json()}, got {got}, expected {expected}")
    return summary


def build_parser():
    parser = _Parser(prog="d3forge", description="Controlled-diversity VQA dataset toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    def seeded(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (default: $D3FORGE_SEED or 0)")

    p = add("gen-scenes", cmd_gen_scenes, "sample symbolic scenes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--condition", choices=("A", "B"))
    p.add_argument("--min-objects", type=int)
    p.add_argument("--max-objects", type=int)
    p.add_argument("--prefix", default="s")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    seeded(p)

    p = add("gen-questions", cmd_gen_questions, "generate a named question set")
    p.add_argument("--set", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--scenes", help="existing scene file to draw from instead of sampling a pool")
    p.add_argument("--scenes-out")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    seeded(p)

    p = add("mix-d3", cmd_mix_d3, "replace a proportion of a base set with D3 records")
    p.add_argument("--base", required=True)
    p.add_argument("--d3", required=True)
    p.add_argument("--proportion", required=True, help="exact fraction such as 3/10")
    p.add_argument("--out", required=True)
    seeded(p)

    p = add("mix-fractions", cmd_mix_fractions, "build a mixture from a plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--pool", action="append", help="NAME=PATH, repeatable")
    p.add_argument("--out", required=True)
    seeded(p)

    p = add("grid", cmd_grid, "enumerate fraction vectors")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--step", required=True)
    p.add_argument("--out")

    p = add("split-length", cmd_split_length, "partition a dataset by program length")
    p.add_argument("--data", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--short-max", type=int, default=2)
    p.add_argument("--base-exact", type=int, default=3)
    p.add_argument("--long-min", type=int, default=4)
    p.add_argument("--long-max", type=int, default=9)

    p = add("audit", cmd_audit, "check conformance and tabulate diversity")
    p.add_argument("--data", required=True)
    p.add_argument("--set")
    p.add_argument("--config")
    p.add_argument("--strict", action="store_true", help="exit 2 when any record violates the set")
    p.add_argument("--out")

    p = add("eval", cmd_eval, "score predictions against a gold set")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--set-name")
    p.add_argument("--lenient", action="store_true", help="leave missing predictions out instead of scoring them wrong")
    p.add_argument("--out-dir", required=True)

    p = add("heatmap", cmd_heatmap, "accuracy deltas of D3 variants over a base")
    p.add_argument("--base", nargs="+", required=True, help="base report.json files, one per test set")
    p.add_argument("--variant", action="append", required=True, help="NAME=REPORT[,REPORT...]")
    p.add_argument("--out", required=True)

    p = add("oracle-check", cmd_oracle_check, "differential check of the executor against the oracle")
    p.add_argument("--n", type=int, default=1000)
    seeded(p)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        summary = args.func(args)
    except D3Error as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}))
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}))
        return UsageError.exit_code
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
