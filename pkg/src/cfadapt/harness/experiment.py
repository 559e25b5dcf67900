"""Seeded, resumable experiment sweeps with JSONL records and summaries."""

from __future__ import annotations

import csv
import json
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..policy import PolicyParams, TrainConfig, architecture_for, init, train_bc
from .conditions import ConditionKind, ResultRecord, RunConfig, run_condition
from .tasks import TI_SHIFTS, gen_shift_task, gen_train_task

DEFAULT_CONFIG = {
    "domains": ["nav2d", "doorkey"],
    "shifts": list(TI_SHIFTS),
    "conditions": [
        {"kind": "NHRandom"},
        {"kind": "BaselineH", "accuracy": 0.3},
        {"kind": "CFH", "accuracy": 0.8},
        {"kind": "OracleFB"},
    ],
    "seeds": 20,
    "run_seed": 0,
    "train_seed": 0,
    "hidden_dim": 128,
    "train_epochs": 300,
    "finetune_epochs": 600,
    "learning_rate": 0.02,
    "batch_size": 32,
    "eval_count": 10,
    "workers": 1,
}


@dataclass
class SweepConfig:
    raw: dict

    @staticmethod
    def load(path) -> "SweepConfig":
        with open(path, encoding="utf-8") as f:
            user = json.load(f)
        cfg = dict(DEFAULT_CONFIG)
        cfg.update(user)
        return SweepConfig(cfg)

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def seeds(self) -> list[int]:
        s = self.raw["seeds"]
        return list(range(s)) if isinstance(s, int) else list(s)

    @property
    def conditions(self) -> list[ConditionKind]:
        return [
            ConditionKind(kind=c["kind"], accuracy=c.get("accuracy", 1.0))
            for c in self.raw["conditions"]
        ]

    def train_config(self, finetuning: bool) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.raw["learning_rate"],
            epochs=self.raw["finetune_epochs" if finetuning else "train_epochs"],
            batch_size=self.raw["batch_size"],
            seed=self.raw["train_seed"],
        )


_policy_cache: dict[tuple, PolicyParams] = {}
_policy_lock = threading.Lock()


def base_policy(domain: str, cfg: SweepConfig) -> PolicyParams:
    """Train (or reuse) the behavior-cloned base policy for a domain."""
    key = (
        domain,
        cfg["train_seed"],
        cfg["hidden_dim"],
        cfg["train_epochs"],
        cfg["learning_rate"],
        cfg["batch_size"],
    )
    with _policy_lock:
        if key not in _policy_cache:
            train = gen_train_task(domain, cfg["train_seed"])
            params = init(
                architecture_for(domain, cfg["hidden_dim"]), cfg["train_seed"]
            )
            params, _ = train_bc(params, train.demos, cfg.train_config(False))
            _policy_cache[key] = params
        return _policy_cache[key]


def output_dir(cli_out: Optional[str]) -> Path:
    """CLI flag wins; CFADAPT_OUT overrides the default ./results."""
    out = cli_out or os.environ.get("CFADAPT_OUT") or "results"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _existing_keys(records_path: Path) -> set:
    keys = set()
    if records_path.exists():
        with open(records_path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    d = json.loads(line)
                    keys.add((d["task_id"], d["condition"], d["run_seed"]))
    return keys


def run_experiment(cfg: SweepConfig, out_dir: Path) -> dict:
    """Cartesian sweep over domains x shifts x conditions x seeds.

    Records append to records.jsonl (one cell per line, resumable by key);
    failures are recorded and the sweep continues. Returns the summary.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / "records.jsonl"
    done = _existing_keys(records_path)
    write_lock = threading.Lock()
    records: list[ResultRecord] = []

    cells = [
        (domain, shift, seed, condition)
        for domain in cfg["domains"]
        for shift in cfg["shifts"]
        for seed in cfg.seeds
        for condition in cfg.conditions
    ]

    def run_cell(cell):
        domain, shift, seed, condition = cell
        task = gen_shift_task(gen_train_task(domain, cfg["train_seed"]), shift, seed)
        key = (f"{domain}-{shift}-{seed}", condition.label, cfg["run_seed"])
        if key in done:
            return None
        params = base_policy(domain, cfg)
        run_cfg = RunConfig(
            train=cfg.train_config(True),
            eval_count=cfg["eval_count"],
            run_seed=cfg["run_seed"],
        )
        return run_condition(params, task, condition, run_cfg)

    def handle(cell):
        try:
            rec = run_cell(cell)
        except Exception as e:
            with write_lock, open(records_path, "a", encoding="utf-8") as f:
                domain, shift, seed, condition = cell
                f.write(
                    json.dumps(
                        {
                            "task_id": f"{domain}-{shift}-{seed}",
                            "condition": condition.label,
                            "run_seed": cfg["run_seed"],
                            "error": str(e),
                        }
                    )
                    + "\n"
                )
            return
        if rec is not None:
            with write_lock, open(records_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(rec.to_json()) + "\n")
            records.append(rec)

    workers = int(cfg["workers"])
    # Base policies are trained up front so worker threads only finetune.
    for domain in cfg["domains"]:
        if cfg["shifts"] and cfg.seeds:
            base_policy(domain, cfg)
    if workers <= 1:
        for cell in cells:
            handle(cell)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(handle, cells))

    summary = summarize(records_path)
    with open(out_dir / "summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
    return summary


def summarize(records_path: Path) -> dict:
    """Mean/stderr of post-finetune success per (domain, shift, condition),
    plus the pooled per-condition means."""
    rows = []
    if records_path.exists():
        with open(records_path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    d = json.loads(line)
                    if "error" not in d:
                        rows.append(d)
    cells: dict[tuple, list[dict]] = {}
    pooled: dict[str, list[float]] = {}
    for r in rows:
        cells.setdefault((r["domain"], r["shift_type"], r["condition"]), []).append(r)
        pooled.setdefault(r["condition"], []).append(r["post_success"])
    out = {"cells": [], "conditions": {}}
    for (domain, shift, condition), group in sorted(cells.items()):
        post = [g["post_success"] for g in group]
        pre = [g["pre_success"] for g in group]
        out["cells"].append(
            {
                "domain": domain,
                "shift_type": shift,
                "condition": condition,
                "n": len(group),
                "pre_mean": _mean(pre),
                "post_mean": _mean(post),
                "post_stderr": _stderr(post),
            }
        )
    for condition, vals in sorted(pooled.items()):
        out["conditions"][condition] = {
            "n": len(vals),
            "post_mean": _mean(vals),
            "post_stderr": _stderr(vals),
        }
    return out


def write_csv(summary: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(
            f,
            fieldnames=[
                "domain",
                "shift_type",
                "condition",
                "n",
                "pre_mean",
                "post_mean",
                "post_stderr",
            ],
        )
        writer.writeheader()
        for cell in summary["cells"]:
            writer.writerow(cell)


def _mean(vals: list[float]) -> float:
    return sum(vals) / len(vals) if vals else float("nan")


def _stderr(vals: list[float]) -> float:
    if len(vals) < 2:
        return 0.0
    m = _mean(vals)
    var = sum((v - m) ** 2 for v in vals) / (len(vals) - 1)
    return math.sqrt(var / len(vals))
