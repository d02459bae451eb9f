"""Command line entry points.

Subcommands:

- ``simulate``: write a dataset of scenes as JSON lines
- ``run``: run the full pipeline once, writing state and lexicon files
- ``experiment``: run a trial grid and write ``results.csv``
- ``eval``: aggregate a results file into per-cell summaries

Options can come from a JSON config file (``--config``) with individual
flags overriding it.  Validation problems exit with status 2.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import pathlib
import sys

from .pipeline import (
    METHODS,
    RunConfig,
    run_experiment,
    run_pipeline,
    save_lexicon,
    save_state,
    summarize_results,
)
from .simulate import (
    ChannelConfig,
    DEFAULT_OBJECT_WORDS,
    save_scenes,
    simulate_dataset,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relspace",
        description="Learn relative spatial concepts from noisy utterances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a scene dataset")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--n-per-concept", type=int, default=19)
    p.add_argument("--objects", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--object-words", action="store_true")
    p.add_argument("--p-sub", type=float, default=0.03)
    p.add_argument("--p-ins", type=float, default=0.01)
    p.add_argument("--p-del", type=float, default=0.01)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="run the pipeline once")
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--objects", type=int, dest="n_objects")
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", type=int, dest="outer_iters")
    p.add_argument("--sweeps", type=int, dest="sampler_sweeps")
    p.add_argument("--burnin", type=int, dest="sampler_burnin")
    p.add_argument("--lists", type=int, dest="n_lists")
    p.add_argument("--seg-sweeps", type=int, dest="seg_sweeps")
    p.add_argument("--object-words", action="store_const", const=True,
                   dest="object_words")
    p.add_argument("--learn-objects", action="store_const", const=True,
                   dest="learn_objects")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run a trial grid")
    p.add_argument("--kind", choices=("methods", "objects", "distance"),
                   required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--j-values", default="3,10,20",
                   help="comma separated object counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full", action="store_true",
                   help="paper-scale grid instead of the quick one")
    p.add_argument("--iters", type=int, dest="outer_iters")
    p.add_argument("--sweeps", type=int, dest="sampler_sweeps")
    p.add_argument("--burnin", type=int, dest="sampler_burnin")
    p.add_argument("--seg-sweeps", type=int, dest="seg_sweeps")
    p.add_argument("--lists", type=int, dest="n_lists")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("eval", help="summarize a results.csv")
    p.add_argument("--results", required=True)
    p.add_argument("--out", help="optional summary JSON path")
    p.set_defaults(func=cmd_eval)
    return parser


def cmd_simulate(args) -> int:
    scenes = simulate_dataset(
        args.n_per_concept,
        args.objects,
        args.seed,
        channel_cfg=ChannelConfig(args.p_sub, args.p_ins, args.p_del),
        object_words=DEFAULT_OBJECT_WORDS if args.object_words else None,
    )
    save_scenes(args.out, scenes)
    print(f"wrote {len(scenes)} scenes to {args.out}")
    return 0


def _config_from_args(args) -> RunConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            base[f.name] = v
    return RunConfig.from_json(base)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_pipeline(cfg)
    save_state(out / "state.json", result)
    save_lexicon(out / "lexicon.json", result)
    if result.lm is not None:
        from .classlm import save_lm

        save_lm(result.lm, out / "lm.json")
    for key in ("ari", "par", "ref_accuracy", "i_r", "n_concepts"):
        print(f"{key}: {result.metrics[key]}")
    print(f"wall_ms: {result.metrics['wall_ms']:.0f}")
    return 0


def cmd_experiment(args) -> int:
    overrides = {}
    for name in ("outer_iters", "sampler_sweeps", "sampler_burnin",
                 "seg_sweeps", "n_lists"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    j_values = tuple(int(x) for x in args.j_values.split(",") if x)
    if not j_values:
        raise ValueError("--j-values must name at least one object count")
    csv_path = run_experiment(
        args.kind,
        args.out_dir,
        trials=args.trials,
        j_values=j_values,
        seed=args.seed,
        full=args.full,
        progress=lambda msg: print(msg, file=sys.stderr),
        **overrides,
    )
    print(f"wrote {csv_path}")
    return 0


def cmd_eval(args) -> int:
    summary = summarize_results(args.results)
    if not summary:
        raise ValueError(f"no successful rows in {args.results}")
    for entry in summary:
        cell = f"{entry['method']} J={entry['J']}"
        if entry["distance_mean"] != 1.0:
            cell += f" d={entry['distance_mean']:g}"
        parts = [f"trials={entry['trials']}"]
        for metric in ("ari", "par", "ref_accuracy"):
            if f"{metric}_mean" in entry:
                parts.append(
                    f"{metric}={entry[f'{metric}_mean']:.3f}"
                    f"±{entry[f'{metric}_sd']:.3f}"
                )
        print(f"{cell}: {', '.join(parts)}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=1)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
