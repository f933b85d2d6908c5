"""Command-line auditor: load, search, distill and write evidence reports.

Example::

    dpaudit --input data/compas.csv --fav-column score_text --fav-value Low \\
        --categorical juv_fel_count --mode ie-dt --k 5 --alpha 0.45 --beta 0.55 \\
        --out audit --format text --format dot

Exit status is 0 on success, 2 when only constraint-violating evidence was
found and 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .dataset import CATEGORICAL, CONTINUOUS, DatasetError, encode, load_csv
from .distill import DistillError, translate
from .objective import ObjectiveConfig
from .oracle import enum_search
from .report import emit_dot, enum_block, fingerprint, ie_block, ie_dt_block, rules_text
from .solver import SolverConfig, find_evidence

log = logging.getLogger("dpaudit")

EXIT_OK, EXIT_ERROR, EXIT_WARN = 0, 1, 2
MODES = ("ie", "ie-dt", "enum")
FORMATS = ("json", "text", "dot")


@dataclass
class RunConfig:
    """Everything a run needs; defaults are the case-study settings k=5, alpha=0.45, beta=0.55, lambda=1."""

    input: str
    fav_column: str
    fav_value: str
    sensitive: list[str] | None = None
    categorical: list[str] = field(default_factory=list)
    continuous: list[str] = field(default_factory=list)
    k: int = 5
    alpha: float = 0.45
    beta: float = 0.55
    lam: float = 1.0
    mode: str = "ie-dt"
    seed: int = 0
    seeds: int = 1
    learning_rate: float = 0.1
    iterations: int = 2500
    clip_norm: float = 5.0
    penalty_rounds: int = 5
    mu_init: float = 1.0
    mu_growth: float = 10.0
    column_k: bool = False
    min_leaf: int | None = None
    time_budget: float | None = None
    out: str = "audit_out"
    formats: list[str] = field(default_factory=lambda: ["json"])

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ValueError(f"unknown formats {sorted(bad)}")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")

    def objective(self) -> ObjectiveConfig:
        return ObjectiveConfig(lam=self.lam, k=self.k, alpha=self.alpha, beta=self.beta)

    def solver(self, seed: int) -> SolverConfig:
        return SolverConfig(
            learning_rate=self.learning_rate, iterations=self.iterations,
            clip_norm=self.clip_norm, penalty_rounds=self.penalty_rounds,
            mu_init=self.mu_init, mu_growth=self.mu_growth, seed=seed,
        )


def _best(candidates):
    """Best ``(seed, evidence)``: constraint-satisfying first, then by dscore, then lowest seed."""
    def key(item):
        seed, ev = item
        score = ev.dscore if ev.dscore is not None else -float("inf")
        return (not ev.constraint_ok, -score, seed)
    return min(candidates, key=key)


def build_report(cfg: RunConfig) -> tuple[dict, int]:
    """Run the configured pipeline; return the report and the exit status."""
    hints = {c: CATEGORICAL for c in cfg.categorical}
    hints.update({c: CONTINUOUS for c in cfg.continuous})
    data = load_csv(cfg.input, cfg.fav_column, cfg.fav_value, hints, cfg.sensitive)
    config = asdict(cfg)
    config.pop("out")
    report: dict = {
        "version": __version__,
        "config": config,
        "dataset": {
            "fingerprint": fingerprint(cfg.input),
            "n": data.n,
            "attributes": [a.name for a in data.schema],
            "sensitive": [a.name for a in data.sensitive],
            "fav_rate": float(data.fav.mean()),
        },
    }
    obj_cfg = cfg.objective()
    status = EXIT_OK

    if cfg.mode == "enum":
        res = enum_search(data, cfg.k, cfg.alpha, cfg.beta, cfg.time_budget)
        report["enum"] = enum_block(res)
        if res.dscore is None:
            status = EXIT_WARN
        return report, status

    fm = encode(data, intercept=True)
    seeds = [cfg.seed + i for i in range(cfg.seeds)]

    def one(seed):
        return seed, find_evidence(data.fav, fm, obj_cfg, cfg.solver(seed),
                                   by_attribute=not cfg.column_k)

    workers = min(len(seeds), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, seeds))
    seed, ev = _best(results)
    report["ie"] = ie_block(ev, fm, seed)
    report["ie"]["seeds"] = [
        {"seed": s, "dscore": e.dscore, "size_ratio": e.size_ratio, "constraint_ok": e.constraint_ok}
        for s, e in results
    ]
    if not ev.constraint_ok:
        status = EXIT_WARN

    if cfg.mode == "ie-dt":
        try:
            pt = translate(data.fav, fm, ev, obj_cfg, cfg.min_leaf)
        except DistillError as exc:
            log.warning("decision-tree translation skipped: %s", exc)
            report["ie_dt"] = None
            return report, EXIT_WARN
        report["ie_dt"] = ie_dt_block(pt)
        report["_tree"] = pt
        status = EXIT_OK if pt.constraint_ok else EXIT_WARN
    return report, status


def write_artifacts(report: dict, cfg: RunConfig, elapsed: float) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tree = report.pop("_tree", None)
    report["timing"] = {"wall_clock_secs": elapsed}
    with (out / "report.json").open("w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    if "text" in cfg.formats:
        (out / "rules.txt").write_text(rules_text(report), encoding="utf-8")
    if "dot" in cfg.formats:
        if tree is None:
            log.warning("no decision tree in mode %s; tree.dot not written", cfg.mode)
        else:
            (out / "tree.dot").write_text(emit_dot(tree), encoding="utf-8")


def run(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    try:
        report, status = build_report(cfg)
    except (DatasetError, DistillError, ValueError, OSError) as exc:
        print(f"dpaudit: error: {exc} (input {cfg.input})", file=sys.stderr)
        return EXIT_ERROR
    write_artifacts(report, cfg, time.perf_counter() - t0)
    if status == EXIT_WARN:
        print("dpaudit: warning: only constraint-violating evidence was found", file=sys.stderr)
    return status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dpaudit", description="Find and explain the group most discriminated "
                "by a model's predictions (demographic-parity gap).")
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--fav-column", required=True, help="column holding the model prediction")
    p.add_argument("--fav-value", required=True, help="prediction value that counts as favorable")
    p.add_argument("--sensitive", action="append", help="sensitive attribute (repeatable; default all)")
    p.add_argument("--categorical", action="append", default=[], help="force a column categorical")
    p.add_argument("--continuous", action="append", default=[], help="force a column continuous")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.45)
    p.add_argument("--beta", type=float, default=0.55)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--mode", choices=MODES, default="ie-dt")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="independent restarts; best feasible kept")
    p.add_argument("--lr", dest="learning_rate", type=float, default=0.1)
    p.add_argument("--iters", dest="iterations", type=int, default=2500)
    p.add_argument("--clip-norm", type=float, default=5.0)
    p.add_argument("--penalty-rounds", type=int, default=5)
    p.add_argument("--mu-init", type=float, default=1.0)
    p.add_argument("--mu-growth", type=float, default=10.0)
    p.add_argument("--column-k", action="store_true",
                   help="let k count encoded columns instead of attributes")
    p.add_argument("--min-leaf", type=int, default=None)
    p.add_argument("--time-budget", type=float, default=None, help="seconds (enum mode)")
    p.add_argument("--out", default="audit_out")
    p.add_argument("--format", dest="formats", action="append", choices=FORMATS)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = vars(make_parser().parse_args(argv))
    verbose = args.pop("verbose")
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    args["formats"] = sorted(set(["json"] + (args["formats"] or [])))
    try:
        cfg = RunConfig(**args)
    except ValueError as exc:
        print(f"dpaudit: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
