"""Command-line front end.

Subcommands:
    codebook build   -- construct and save a single-beam codebook
    train run        -- one seeded end-to-end training scenario
    sweep <name>     -- accuracy | softhard | farfield | overhead, CSV out

All take --config (flat key=value file) plus --seed / --trials / --out
overrides.  Exits nonzero on any precondition failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .codebook import build_codebook, save_codebook
from .experiments import (emit_csv, parse_config, run_experiment, spec_from_config)
from .geometry import los_channel
from .training import ground_truth_beam, hmb_train, place_base_stations


def _load_spec(args, experiment=None):
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    overrides = {
        "seed": getattr(args, "seed", None),
        "trials": getattr(args, "trials", None),
        "out": getattr(args, "out", None),
        "experiment": experiment,
    }
    return spec_from_config(cfg, **overrides)


def _cmd_codebook_build(args) -> int:
    spec = _load_spec(args, experiment="accuracy")
    book = build_codebook(spec.geometry(), spec.delta, spec.r_min, spec.ring_rule)
    print(f"codebook: {book.n_codewords} codewords "
          f"({spec.m}x{spec.n} array, delta={book.delta}, "
          f"zeta={book.zeta_delta:.6f}, r_min={book.r_min}, rule={book.ring_rule})")
    if args.eta:
        from .codebook import max_cross_projection
        print(f"max cross projection eta = {max_cross_projection(book):.6f}")
    if spec.out_path:
        save_codebook(book, spec.out_path)
        print(f"wrote {spec.out_path}")
    return 0


def _cmd_train_run(args) -> int:
    spec = _load_spec(args, experiment="accuracy")
    geom = spec.geometry()
    book = build_codebook(geom, spec.delta, spec.r_min, spec.ring_rule)
    cfg = spec.scenario(spec.snr_grid_db[0] if args.snr_db is None else args.snr_db,
                        spec.b_grid[0])
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed, 0x9A)))
    poses = place_base_stations(cfg, rng)
    channels = [los_channel(geom, p, cfg.rho0_lin) for p in poses]
    outcome = hmb_train(cfg, channels, book, seed=spec.seed)
    truths = [ground_truth_beam(book, ch) for ch in channels]
    lines = ["# per-rank training result",
             "# columns: rank bs r theta phi beta truth estimate tie slots"]
    correct = 0
    for rank in range(cfg.k_bs):
        bs = int(outcome.rank_to_bs[rank])
        pose = poses[bs]
        est = int(outcome.gamma_hat[rank])
        tie = bool(outcome.ties[rank])
        ok = (est == truths[bs]) and not tie
        correct += ok
        slot_list = ";".join(str(int(q)) for q in outcome.slot_assignment[rank])
        lines.append(f"{rank} {bs} {pose.r:.4f} {pose.theta:.4f} {pose.phi:.4f} "
                     f"{channels[bs].beta:.6e} {truths[bs]} {est} {int(tie)} {slot_list}")
    lines.append(f"# correct {correct}/{cfg.k_bs}  slots_used {outcome.slots_used}  "
                 f"rank_confusions {outcome.rank_confusions}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if spec.out_path:
        with open(spec.out_path, "w", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {spec.out_path}")
    return 0


def _cmd_sweep(args) -> int:
    spec = _load_spec(args, experiment=args.name)
    rows = run_experiment(spec)
    text = emit_csv(rows, spec.out_path or None)
    if spec.out_path:
        print(f"wrote {len(rows)} rows to {spec.out_path}")
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hmbtrain",
                                     description="Near-field hashing multi-arm beam training simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_book = sub.add_parser("codebook", help="codebook operations")
    book_sub = p_book.add_subparsers(dest="subcommand", required=True)
    p_build = book_sub.add_parser("build", help="build and save a codebook")
    _common_flags(p_build)
    p_build.add_argument("--eta", action="store_true",
                         help="also report the max pairwise projection (slow-ish)")
    p_build.set_defaults(func=_cmd_codebook_build)

    p_train = sub.add_parser("train", help="training runs")
    train_sub = p_train.add_subparsers(dest="subcommand", required=True)
    p_run = train_sub.add_parser("run", help="one seeded end-to-end scenario")
    _common_flags(p_run)
    p_run.add_argument("--snr-db", type=float, default=None)
    p_run.set_defaults(func=_cmd_train_run)

    p_sweep = sub.add_parser("sweep", help="Monte Carlo sweeps")
    sweep_sub = p_sweep.add_subparsers(dest="name_sub", required=True)
    for name in ("accuracy", "softhard", "farfield", "overhead"):
        p = sweep_sub.add_parser(name)
        _common_flags(p)
        p.set_defaults(func=_cmd_sweep, name=name)
    return parser


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--out", default=None, help="output path")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
