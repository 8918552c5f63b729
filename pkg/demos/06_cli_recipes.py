"""
Running recipes through the CLI
===============================

Every figure and table has a JSON recipe under ``recipes/``. The same
runner is reachable as ``dmbm <subcommand> --spec <file>`` from a shell;
here it is called in-process and the output is read back.
"""

import tempfile
from pathlib import Path

from dmbm.cli import main
from dmbm.io import read_results

recipes = Path(__file__).resolve().parent.parent / "recipes"
with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "table1.csv"
    main(["complexity", "--spec", str(recipes / "table1_complexity.json"), "--out", str(out)])
    print(out.read_text())

    # A quick, low-budget pass over the eta = 10 comparison
    out = Path(tmp) / "fig7b.csv"
    main(["compare", "--spec", str(recipes / "fig7b_compare_nr4.json"), "--out", str(out),
          "--grid", "0:8:4", "--max-trials", "2000"])
    table, fmt = read_results(out)
    print(table.columns)
    for row in table.rows:
        print(row)
    print("metadata keys:", sorted(table.metadata))
