"""Curve-file parsing and figure assembly."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from matplotlib.figure import Figure

HEADER = ("n", "value", "mu0_star", "branch", "tolerance")

# Okabe-Ito palette, distinguishable under the common color-vision deficiencies.
PALETTE = ("#0072B2", "#D55E00", "#009E73", "#CC79A7", "#E69F00", "#56B4E9", "#000000")

HLINE_COLOR = "#555555"


class SchemaError(ValueError):
    """A curve file does not match the frozen CLI schema."""


def _header_mismatch(got: Tuple[str, ...]) -> str:
    if len(got) != len(HEADER):
        return f"expected {len(HEADER)} columns, got {len(got)}"
    for idx, (want, have) in enumerate(zip(HEADER, got), start=1):
        if want != have:
            return f"column {idx} should be {want!r}, got {have!r}"
    raise AssertionError("called on a matching header")


@dataclass(frozen=True)
class CurveFile:
    """One parsed curve: the n column, the value column, and a legend label."""

    path: str
    label: str
    ns: Tuple[int, ...]
    values: Tuple[float, ...]

    @classmethod
    def load(cls, path: str, label: Optional[str] = None) -> "CurveFile":
        if label is None:
            label = os.path.splitext(os.path.basename(path))[0]
        with open(path) as fh:
            lines = [line.rstrip("\n") for line in fh if line.strip()]
        if not lines:
            raise SchemaError(f"{path}: empty file, expected header {','.join(HEADER)!r}")
        got = tuple(lines[0].split(","))
        if got != HEADER:
            raise SchemaError(f"{path}: header mismatch: {_header_mismatch(got)}")
        ns = []
        values = []
        for lineno, row in enumerate(lines[1:], start=2):
            parts = row.split(",")
            if len(parts) != len(HEADER):
                raise SchemaError(
                    f"{path}: row {lineno}: expected {len(HEADER)} columns, got {len(parts)}"
                )
            try:
                n = int(parts[0])
            except ValueError:
                raise SchemaError(
                    f"{path}: row {lineno}, column 'n': expected an integer, got {parts[0]!r}"
                )
            try:
                value = float(parts[1])
            except ValueError:
                raise SchemaError(
                    f"{path}: row {lineno}, column 'value': expected a number, got {parts[1]!r}"
                )
            if not math.isfinite(value):
                raise SchemaError(
                    f"{path}: row {lineno}, column 'value': must be finite, got {parts[1]!r}"
                )
            ns.append(n)
            values.append(value)
        if not ns:
            raise SchemaError(f"{path}: no data rows under the header")
        for prev, cur, lineno in zip(ns, ns[1:], range(3, len(ns) + 2)):
            if cur <= prev:
                raise SchemaError(
                    f"{path}: row {lineno}, column 'n': rows must be sorted, "
                    f"{cur} follows {prev}"
                )
        return cls(path=path, label=label, ns=tuple(ns), values=tuple(values))


def build_figure(inputs: Sequence[CurveFile], hline: Optional[float] = None) -> Figure:
    """Assemble the chart: one line per curve, optional dashed reference level.

    The reference level is excluded from autoscaling by matplotlib, so the
    y-range is widened explicitly whenever it would fall outside.
    """
    if not inputs:
        raise SchemaError("at least one curve file is required")
    fig = Figure(figsize=(6.4, 4.0), dpi=150)
    ax = fig.subplots()
    for idx, curve in enumerate(inputs):
        ax.plot(
            curve.ns,
            curve.values,
            color=PALETTE[idx % len(PALETTE)],
            linewidth=1.6,
            label=curve.label,
        )
    if hline is not None:
        ax.axhline(
            hline,
            color=HLINE_COLOR,
            linestyle="--",
            linewidth=1.2,
            label=f"lower bound {hline:g}",
        )
        lo, hi = ax.get_ylim()
        pad = 0.05 * (hi - lo)
        if hline <= lo:
            ax.set_ylim(hline - pad, hi)
        elif hline >= hi:
            ax.set_ylim(lo, hline + pad)
    ax.set_xlabel("samples n")
    ax.set_ylabel("worst-case regret")
    ax.grid(True, alpha=0.25, linewidth=0.5)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def render_learning_curves(
    inputs: Sequence[CurveFile],
    hline: Optional[float],
    out: str,
    *,
    vector: bool = False,
) -> None:
    """Write the chart to `out`: PNG by default, PDF with the vector flag.

    Identical inputs reproduce an identical file; the PDF writer's creation
    timestamp is suppressed for that reason.
    """
    fig = build_figure(inputs, hline)
    if vector:
        fig.savefig(out, format="pdf", metadata={"CreationDate": None})
    else:
        fig.savefig(out, format="png")
