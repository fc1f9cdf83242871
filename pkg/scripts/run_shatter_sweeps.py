#!/usr/bin/env python3
"""Run the three worked example specs end to end and print their fitted
shatter slopes; artifacts land in out/<experiment_id>/."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from distalcells.cli import main  # noqa: E402

HERE = pathlib.Path(__file__).resolve().parents[1]

EXAMPLES = [
    "docs/examples/ordered_halfline.json",
    "docs/examples/presburger_parity.json",
    "docs/examples/padic_macintyre.json",
]

if __name__ == "__main__":
    status = 0
    for spec in EXAMPLES:
        spec_path = HERE / spec
        out_dir = HERE / "out" / spec_path.stem
        print(f"== {spec_path.name}")
        status |= main(["run", "--spec", str(spec_path), "--out-dir", str(out_dir)])
    sys.exit(status)
