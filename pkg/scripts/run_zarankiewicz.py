#!/usr/bin/env python3
"""Grid point-line incidence ratio sweep (K_{2,2}-free certified)."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from distalcells.cli import main  # noqa: E402

if __name__ == "__main__":
    out = pathlib.Path(__file__).resolve().parents[1] / "out" / "zarankiewicz"
    sys.exit(main(["zarankiewicz", "--sizes", "64,128,256,512", "--out-dir", str(out)]))
