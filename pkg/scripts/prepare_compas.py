"""Build ``data/compas.csv`` from ProPublica's ``compas-scores-two-years.csv``.

The raw file is shipped inside the ``responsibly`` wheel, so it can be
fetched from any PyPI mirror::

    pip download responsibly==0.1.2 --no-deps -d /tmp/resp
    python scripts/prepare_compas.py /tmp/resp/responsibly-0.1.2-py3-none-any.whl

A plain CSV path is accepted as well. The usual ProPublica filters are
applied (screening within 30 days of arrest, known recidivism, no ordinary
traffic offences, a score present), which leaves 6,172 people. Nine
categorical attributes and ``priors_count`` are kept, together with the
shipped risk classification ``score_text`` as the prediction column.
"""

import csv
import io
import sys
import zipfile
from pathlib import Path

MEMBER = "responsibly/dataset/compas/compas-scores-two-years.csv"

KEEP = [
    "sex",
    "age_cat",
    "race",
    "c_charge_degree",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "is_recid",
    "two_year_recid",
    "priors_count",
    "score_text",
]


def read_raw(source: Path) -> str:
    if source.suffix == ".whl":
        with zipfile.ZipFile(source) as zf:
            return zf.read(MEMBER).decode("utf-8")
    return source.read_text(encoding="utf-8")


def keep_row(row: dict) -> bool:
    days = row["days_b_screening_arrest"]
    return (
        days != ""
        and -30 <= int(days) <= 30
        and row["is_recid"] != "-1"
        and row["c_charge_degree"] != "O"
        and row["score_text"] != "N/A"
    )


def main(argv: list[str]) -> int:
    if len(argv) < 2:
        print(__doc__)
        return 1
    out = Path(argv[2]) if len(argv) > 2 else Path(__file__).parents[1] / "data" / "compas.csv"
    rows = [r for r in csv.DictReader(io.StringIO(read_raw(Path(argv[1])))) if keep_row(r)]
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(KEEP)
        for r in rows:
            writer.writerow([r[c] for c in KEEP])
    print(f"wrote {len(rows)} rows to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
