"""Audit the COMPAS risk classification for a disadvantaged group.

The favorable prediction is a "Low" risk score. The outcome columns
(is_recid, two_year_recid) are kept out of the sensitive set: they describe
what happened after the score, not who the defendant is. Counts of juvenile
offences are few-valued, so they are treated as categories. Prior offences
stay continuous, which is where the tree finds its threshold.

Prepare the data first with: python scripts/prepare_compas.py
Run: python demos/compas_case_study.py
"""

import sys
from pathlib import Path

from dpaudit.cli import RunConfig, run

root = Path(__file__).resolve().parents[1]
csv_path = root / "data" / "compas.csv"
if not csv_path.exists():
    sys.exit("data/compas.csv is missing; run scripts/prepare_compas.py first")

out = root / "demo_output" / "compas"
cfg = RunConfig(
    input=str(csv_path),
    fav_column="score_text",
    fav_value="Low",
    sensitive=["sex", "age_cat", "race", "c_charge_degree", "juv_fel_count",
               "juv_misd_count", "juv_other_count", "priors_count"],
    categorical=["juv_fel_count", "juv_misd_count", "juv_other_count",
                 "is_recid", "two_year_recid"],
    k=5, alpha=0.45, beta=0.55, lam=1.0,
    mode="ie-dt",
    out=str(out),
    formats=["json", "text", "dot"],
)
status = run(cfg)
print((out / "rules.txt").read_text())
print(f"exit status {status}; tree written to {out / 'tree.dot'}")
print("render it with: dot -Tpng tree.dot -o tree.png")
