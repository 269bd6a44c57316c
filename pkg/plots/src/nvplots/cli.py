"""Command line: repeatable --input path:label, optional --hline, one output."""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence, Tuple

from .curves import CurveFile, SchemaError, render_learning_curves

__all__ = ["main"]


def _parse_input(text: str) -> Tuple[str, Optional[str]]:
    # Split on the first colon so labels may themselves contain colons.
    path, sep, label = text.partition(":")
    if not sep:
        return text, None
    return path, label


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nvregret-plot",
        description="Render learning-curve figures from nvregret curve CSV files",
    )
    parser.add_argument(
        "--input",
        action="append",
        required=True,
        metavar="PATH[:LABEL]",
        help="curve CSV with an optional legend label (repeatable)",
    )
    parser.add_argument(
        "--hline", type=float, default=None, help="dashed horizontal reference level"
    )
    parser.add_argument("--out", required=True, help="image path to write")
    parser.add_argument(
        "--vector", action="store_true", help="write a PDF instead of the default PNG"
    )
    args = parser.parse_args(argv)
    try:
        curves = []
        for item in args.input:
            path, label = _parse_input(item)
            if not os.path.exists(path):
                raise SchemaError(f"{path}: no such file")
            curves.append(CurveFile.load(path, label))
        render_learning_curves(curves, args.hline, args.out, vector=args.vector)
    except SchemaError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
