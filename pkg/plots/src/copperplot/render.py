"""Read coppersim CSV artifacts and render them as static charts.

Input schemas are matched exactly against the simulator's documented CSV
headers; anything else is a :class:`SchemaError`, never a guess. Values are
plotted as read — no reordering or aggregation beyond the declared grouping.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# Exact header sets emitted by the simulator's harness.
BAR_SCHEMA = ("scheme", "line", "length_m", "rate_mbps")
LINE_SCHEMAS = {
    "length_sweep": ("length_m", "scheme", "avg_rate_mbps"),
    "interference_sweep": (
        "interferer_psd_dbm_hz",
        "canceler_on",
        "aggregate_mbps",
        "avg_user_mbps",
    ),
}

KINDS = ("bar", "line")


class SchemaError(ValueError):
    """Input CSV does not match any supported schema for the chart kind."""


@dataclass(frozen=True)
class PlotSpec:
    """One chart: a CSV input, a chart kind, and an image output path."""

    input_csv: str | Path
    kind: str
    output_image: str | Path
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"kind must be one of {KINDS}, got {self.kind!r}")


def _read_rows(path):
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"input CSV not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        rows = list(reader)
    if not header:
        raise SchemaError(f"input CSV has no header: {path}")
    if not rows:
        raise SchemaError(f"input CSV has no data rows: {path}")
    return tuple(header), rows


def _require(header, expected, path):
    if tuple(header) != tuple(expected):
        raise SchemaError(
            f"{path}: columns {list(header)} do not match the expected "
            f"schema {list(expected)}"
        )


def _render_bar(rows, ax):
    """Grouped per-line rate bars, one bar per scheme within each group."""
    schemes = list(dict.fromkeys(r["scheme"] for r in rows))
    lines = sorted({int(r["line"]) for r in rows})
    lengths = {int(r["line"]): float(r["length_m"]) for r in rows}
    rates = {(r["scheme"], int(r["line"])): float(r["rate_mbps"]) for r in rows}
    if len(rates) != len(rows):
        raise SchemaError("duplicate (scheme, line) rows in bar-chart input")
    width = 0.8 / len(schemes)
    for pos, scheme in enumerate(schemes):
        xs = [i + (pos - (len(schemes) - 1) / 2) * width for i in range(len(lines))]
        ax.bar(xs, [rates[scheme, ln] for ln in lines], width, label=scheme)
    ax.set_xticks(range(len(lines)))
    ax.set_xticklabels([f"{ln}\n{lengths[ln]:g} m" for ln in lines])
    ax.set_xlabel("line / loop length")
    ax.set_ylabel("rate (Mbps)")
    ax.legend()


def _render_length_sweep(rows, ax):
    """Average user rate versus loop length, one curve per scheme."""
    schemes = list(dict.fromkeys(r["scheme"] for r in rows))
    for scheme in schemes:
        pts = sorted(
            (float(r["length_m"]), float(r["avg_rate_mbps"]))
            for r in rows
            if r["scheme"] == scheme
        )
        ax.plot([x for x, _ in pts], [y for _, y in pts], marker="o", label=scheme)
    ax.set_xlabel("loop length (m)")
    ax.set_ylabel("average user rate (Mbps)")
    ax.legend()


def _render_interference_sweep(rows, ax):
    """Average user rate versus interferer PSD, canceler off and on."""
    for flag, label in (("0", "canceler off"), ("1", "canceler on")):
        pts = sorted(
            (float(r["interferer_psd_dbm_hz"]), float(r["avg_user_mbps"]))
            for r in rows
            if r["canceler_on"] == flag
        )
        if not pts:
            raise SchemaError(f"no rows with canceler_on={flag}")
        ax.plot([x for x, _ in pts], [y for _, y in pts], marker="o", label=label)
    ax.set_xlabel("interferer PSD (dBm/Hz)")
    ax.set_ylabel("average user rate (Mbps)")
    ax.legend()


def render(spec: PlotSpec) -> Path:
    """Render one chart per the spec; returns the written image path."""
    header, rows = _read_rows(spec.input_csv)
    fig, ax = plt.subplots(figsize=(8, 5), dpi=120)
    try:
        if spec.kind == "bar":
            _require(header, BAR_SCHEMA, spec.input_csv)
            _render_bar(rows, ax)
        elif header == LINE_SCHEMAS["length_sweep"]:
            _render_length_sweep(rows, ax)
        elif header == LINE_SCHEMAS["interference_sweep"]:
            _render_interference_sweep(rows, ax)
        else:
            raise SchemaError(
                f"{spec.input_csv}: columns {list(header)} match neither "
                f"line-chart schema "
                f"{[list(s) for s in LINE_SCHEMAS.values()]}"
            )
        if spec.title:
            ax.set_title(spec.title)
        out = Path(spec.output_image)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
        return out
    finally:
        plt.close(fig)
