"""Regenerate garch11_seed42.csv: a simulated GARCH(1,1) price path.

    python tests/data/make_fixture.py
"""
from pathlib import Path

from volcast.cli import main

HERE = Path(__file__).resolve().parent
FIXTURE = HERE / "garch11_seed42.csv"
ARGS = ["simulate", "--spec", "2e-6,0.2,0.7", "--order", "1,1", "--n", "1349", "--seed", "42"]

if __name__ == "__main__":
    raise SystemExit(main(ARGS + ["--out", str(FIXTURE)]))
