"""Experiment runner.

    zopref run.yaml                      train from a config file
    zopref --preset gridworld_desk       train from a shipped preset
    zopref --preset gridworld_desk --seeds 0..4 --out runs/desk
    zopref --diag bounds                 run a diagnostic suite, no training

Training writes, under the output directory: metrics_seed{n}.csv per seed,
checkpoint_seed{n}.json (final policy, plus periodic snapshots when
checkpoint_interval is set), summary.csv, and learning-curve figures.
Diagnostics write diagnostics_{suite}.csv, a margin figure, and print one
line per check.

Exit codes: 0 success, 1 invalid config or usage, 2 diagnostic failure,
3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import diagnostics, reporting
from .config import ConfigError, PRESETS, build, load_config, preset
from .learner import train

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIAG = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; fold those into the validation code
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"error: {message}")


def parse_seeds(text: str) -> list[int]:
    """Seed list syntax: '3', '0,2,5', or the range '0..4' (inclusive)."""
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            lo, hi = int(lo), int(hi)
        except ValueError as err:
            raise ConfigError(f"bad seed range {text!r}") from err
        if hi < lo:
            raise ConfigError(f"bad seed range {text!r}: end before start")
        return list(range(lo, hi + 1))
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as err:
        raise ConfigError(f"bad seed list {text!r}") from err
    if not seeds:
        raise ConfigError("empty seed list")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zopref", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("config", nargs="?", help="path to a run config file")
    parser.add_argument("--preset", choices=sorted(PRESETS),
                        help="use a shipped configuration instead of a file")
    parser.add_argument("--seeds", help="override seeds: '3', '0,2,5', or '0..4'")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--diag", choices=diagnostics.SUITES + ("all",),
                        help="run a diagnostic suite instead of training")
    parser.add_argument("--diag-seed", type=int, default=0,
                        help="seed for the diagnostic suites (default 0)")
    return parser


def _run_training(cfg, out_dir: str) -> int:
    mdp, learner_cfg = build(cfg)
    reporting.run_directory(out_dir)
    interval = cfg.output.checkpoint_interval
    curves: dict[int, list] = {}
    finals: dict[int, float] = {}
    for seed in cfg.seeds:
        snapshots = []
        if interval:
            def on_checkpoint(t, policy, seed=seed, snapshots=snapshots):
                snap = os.path.join(out_dir, f"checkpoint_seed{seed}_iter{t}.json")
                policy.save(snap)
                snapshots.append(snap)
        else:
            on_checkpoint = None
        result = train(mdp, learner_cfg, seed,
                       on_checkpoint=on_checkpoint, checkpoint_every=interval)
        result.policy.save(os.path.join(out_dir, f"checkpoint_seed{seed}.json"))
        reporting.write_metrics(
            os.path.join(out_dir, f"metrics_seed{seed}.csv"), result.rows)
        curves[seed] = result.rows
        finals[seed] = result.rows[-1].ret
        print(f"seed {seed}: final return {finals[seed]:.4f} "
              f"({len(result.rows)} evaluation rows)")
    reporting.write_summary(os.path.join(out_dir, "summary.csv"), finals)
    reporting.learning_curve_figure(
        os.path.join(out_dir, "learning_curve.png"), curves)
    reporting.gradient_norm_figure(
        os.path.join(out_dir, "gradient_norm.png"), curves)
    values = [finals[s] for s in sorted(finals)]
    mean = sum(values) / len(values)
    spread = (sum((v - mean) ** 2 for v in values) / (len(values) - 1)) ** 0.5 \
        if len(values) > 1 else 0.0
    print(f"final return over {len(values)} seed(s): {mean:.4f} +/- {spread:.4f}")
    print(f"artifacts in {out_dir}")
    return EXIT_OK


def _run_diagnostics(suite: str, seed: int, out_dir: str | None) -> int:
    rows = diagnostics.run_suite(suite, seed=seed)
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.suite}/{r.name}: "
              f"{r.lhs:.6g} {r.relation} {r.rhs:.6g}")
    failed = sum(not r.passed for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} checks passed")
    if out_dir:
        reporting.run_directory(out_dir)
        reporting.write_diagnostics(
            os.path.join(out_dir, f"diagnostics_{suite}.csv"), rows)
        reporting.diagnostics_figure(
            os.path.join(out_dir, f"diagnostics_{suite}.png"), rows)
        print(f"report in {out_dir}")
    return EXIT_DIAG if failed else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.diag:
            return _run_diagnostics(args.diag, args.diag_seed, args.out)

        if args.config and args.preset:
            raise ConfigError("give either a config file or --preset, not both")
        if args.config:
            cfg = load_config(args.config)
        elif args.preset:
            cfg = preset(args.preset)
        else:
            raise ConfigError("a config file, --preset, or --diag is required")
        if args.seeds:
            cfg.seeds = parse_seeds(args.seeds)
        out_dir = args.out or cfg.output.directory
        return _run_training(cfg, out_dir)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # noqa: BLE001 - boundary: map to exit code 3
        print(f"runtime error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
