#!/usr/bin/env python3
"""Sum-product and A + B*B incidence identities over random rational sets."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from distalcells.cli import main  # noqa: E402

if __name__ == "__main__":
    out = pathlib.Path(__file__).resolve().parents[1] / "out" / "sumproduct"
    sys.exit(main([
        "sumproduct", "--trials", "50", "--max-size", "40",
        "--seed", "42", "--out-dir", str(out),
    ]))
