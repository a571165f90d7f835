"""Command line entry points.

  trailsim run --config cfg.json --out results/        run a scenario file
  trailsim run --preset fig4_desk --out results/       run a built-in preset
  trailsim presets                                     list built-in presets
  trailsim audit results/ledger_rep0.csv [...]         recheck ledger dumps

`run` exits nonzero when a safety invariant is violated on a run that
guarantees it (validation on); `audit` exits nonzero when any dump breaks
ownership continuity.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import experiments
from .ledger import check_ownership_continuity, load_records


def _cmd_run(args) -> int:
    if bool(args.config) == bool(args.preset):
        print("run: provide exactly one of --config or --preset", file=sys.stderr)
        return 2
    if args.config:
        try:
            cfg = experiments.load_config(args.config)
        except experiments.ConfigError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 2
    else:
        cfg = experiments.PRESETS.get(args.preset)
        if cfg is None:
            print(f"unknown preset: {args.preset}", file=sys.stderr)
            return 2
        cfg = dataclasses.replace(cfg)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.replicates is not None:
        cfg.replicates = args.replicates
    result = experiments.run(cfg, out_dir=args.out)
    if cfg.mode == "dynamics":
        ok = result.safety_ok
        for rep in result.replicates:
            print(
                f"seed {rep.seed}: started={rep.started_total} "
                f"confirmed={rep.confirmed_total} malicious={rep.malicious_confirmed} "
                f"continuity_violations={rep.continuity_violations}"
            )
        if not ok:
            print("SAFETY VIOLATION", file=sys.stderr)
            return 1
    elif cfg.mode == "throughput":
        for (S, F), m in sorted(result["means"].items()):
            print(f"shards={S} F={F}: throughput={m:.3f}/round")
    elif cfg.mode == "mttf":
        for (S, F, d), m in sorted(
            result["means"].items(), key=lambda kv: (kv[0][0], kv[0][1], -1 if kv[0][2] is None else kv[0][2])
        ):
            dd = "-" if d is None else d
            print(f"shards={S} F={F} d={dd}: mean MTTF={m:.1f}")
    elif cfg.mode == "oracle-compare":
        print(json.dumps(result, indent=2, sort_keys=True))
        if not result["all_match"]:
            print("MODEL MISMATCH", file=sys.stderr)
            return 1
    return 0


def _cmd_presets(args) -> int:
    for name, cfg in experiments.PRESETS.items():
        p = cfg.params
        print(
            f"{name:16s} mode={cfg.mode:14s} S={p.S:<3d} s={p.s:<3d} f={p.f} F={p.F} "
            f"t={p.t} rounds={cfg.rounds} replicates={cfg.replicates} validation={cfg.validation}"
        )
    return 0


def _cmd_audit(args) -> int:
    bad = 0
    for path in args.ledgers:
        rows = load_records(path)
        violation = check_ownership_continuity(rec for _, rec in rows)
        if violation is None:
            print(f"{path}: ok ({len(rows)} records)")
        else:
            print(f"{path}: continuity violation at records {violation}")
            bad += 1
    return 1 if bad else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="trailsim")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario")
    p_run.add_argument("--config", help="path to a JSON scenario config")
    p_run.add_argument("--preset", help="name of a built-in preset")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--replicates", type=int, default=None)
    p_run.add_argument("--out", default=None, help="output directory for CSVs")
    p_run.set_defaults(func=_cmd_run)

    p_presets = sub.add_parser("presets", help="list built-in figure configs")
    p_presets.set_defaults(func=_cmd_presets)

    p_audit = sub.add_parser("audit", help="run the continuity checker on ledger dumps")
    p_audit.add_argument("ledgers", nargs="+")
    p_audit.set_defaults(func=_cmd_audit)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
