"""Command-line entry point: train, experiment, replay, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..policy import architecture_for, checkpoint, init, train_bc
from .experiment import SweepConfig, output_dir, run_experiment, write_csv
from .tasks import gen_train_task


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfadapt",
        description="Concept-level counterfactual diagnosis and policy adaptation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="behavior-clone a base policy")
    p_train.add_argument("--domain", required=True, choices=["nav2d", "doorkey"])
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--hidden-dim", type=int, default=128)
    p_train.add_argument("--epochs", type=int, default=300)
    p_train.add_argument("--learning-rate", type=float, default=0.02)
    p_train.add_argument("--out", required=True, help="checkpoint path")

    p_exp = sub.add_parser("experiment", help="run a condition sweep")
    p_exp.add_argument("--config", help="JSON sweep config (defaults apply)")
    p_exp.add_argument("--out", help="output directory (or CFADAPT_OUT)")
    p_exp.add_argument("--csv", action="store_true", help="also write summary.csv")

    p_replay = sub.add_parser("replay", help="inspect a trajectory JSONL file")
    p_replay.add_argument("--trajectory", required=True)

    p_serve = sub.add_parser("serve", help="run the interactive session service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    return parser


def cmd_train(args) -> int:
    from ..policy import TrainConfig

    task = gen_train_task(args.domain, args.seed)
    params = init(architecture_for(args.domain, args.hidden_dim), args.seed)
    cfg = TrainConfig(
        learning_rate=args.learning_rate, epochs=args.epochs, seed=args.seed
    )
    params, losses = train_bc(params, task.demos, cfg)
    checkpoint.save(params, args.out)
    print(f"trained {args.domain} policy: final loss {losses[-1]:.3e} -> {args.out}")
    return 0


def cmd_experiment(args) -> int:
    if args.config:
        cfg = SweepConfig.load(args.config)
    else:
        from .experiment import DEFAULT_CONFIG

        cfg = SweepConfig(dict(DEFAULT_CONFIG))
    out = output_dir(args.out)
    summary = run_experiment(cfg, out)
    if args.csv:
        write_csv(summary, out / "summary.csv")
    for condition, stats in summary["conditions"].items():
        print(
            f"{condition:>10}: post success {stats['post_mean']:.3f} "
            f"+- {stats['post_stderr']:.3f} (n={stats['n']})"
        )
    print(f"records in {out / 'records.jsonl'}")
    return 0


def cmd_replay(args) -> int:
    from ..envs.trajectory import read_jsonl

    doc = read_jsonl(args.trajectory)
    header = doc["header"]
    print(json.dumps({"provenance": header["provenance"], "scene": header["scene"]}, indent=2))
    for t, action in enumerate(doc["actions"]):
        print(f"t={t:3d} action={action}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from ..service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "train": cmd_train,
        "experiment": cmd_experiment,
        "replay": cmd_replay,
        "serve": cmd_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
