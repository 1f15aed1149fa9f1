"""Curve rendering: group CSV rows into series, draw a log-log figure with
confidence bands, and write a sidecar JSON of exactly the plotted points.

Golden tests assert on the sidecar JSON, not on pixels; rendering itself is
deterministic (fixed style, no timestamps in the figure metadata).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = ("p", "ler", "ci_low", "ci_high")


class MissingColumnsError(ValueError):
    def __init__(self, columns: Sequence[str], path: str):
        super().__init__("%s is missing columns: %s" % (path, ", ".join(sorted(columns))))
        self.columns = tuple(columns)


@dataclass
class CurveSpec:
    csv_paths: Sequence[str]
    group_keys: Sequence[str] = ("decoder", "schedule")
    out_path: str = "fig.png"
    x_limits: Optional[tuple[float, float]] = None
    y_limits: Optional[tuple[float, float]] = None
    title: str = ""


@dataclass
class Series:
    label: str
    group: dict
    points: list[dict] = field(default_factory=list)


def _read_rows(path: str, group_keys: Sequence[str]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in list(REQUIRED_COLUMNS) + list(group_keys) if c not in header]
        if missing:
            raise MissingColumnsError(missing, path)
        return list(reader)


def _group(rows: list[dict], keys: Sequence[str]) -> list[Series]:
    series: dict[tuple, Series] = {}
    for row in rows:
        key = tuple(row[k] for k in keys)
        if key not in series:
            series[key] = Series(label=", ".join(key), group=dict(zip(keys, key)))
        series[key].points.append(
            {
                "p": float(row["p"]),
                "ler": float(row["ler"]),
                "ci_low": float(row["ci_low"]),
                "ci_high": float(row["ci_high"]),
            }
        )
    out = list(series.values())
    for s in out:
        s.points.sort(key=lambda pt: pt["p"])
    return out


def render(spec: CurveSpec) -> dict:
    """Write the figure and its sidecar JSON; returns the sidecar dict."""
    rows = []
    for path in spec.csv_paths:
        rows.extend(_read_rows(path, spec.group_keys))
    series = _group(rows, spec.group_keys)
    if not series:
        raise ValueError("no data rows after grouping")

    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for s in series:
        p = [pt["p"] for pt in s.points]
        ler = [pt["ler"] for pt in s.points]
        lo = [pt["ci_low"] for pt in s.points]
        hi = [pt["ci_high"] for pt in s.points]
        (line,) = ax.plot(p, ler, marker="o", markersize=3, label=s.label)
        ax.fill_between(p, lo, hi, alpha=0.2, color=line.get_color())
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("logical error rate")
    if spec.x_limits:
        ax.set_xlim(*spec.x_limits)
    if spec.y_limits:
        ax.set_ylim(*spec.y_limits)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150, metadata={"Software": "fbgnn-plot"})
    plt.close(fig)

    sidecar = {
        "group_keys": list(spec.group_keys),
        "series": [
            {"label": s.label, "group": s.group, "points": s.points} for s in series
        ],
    }
    with open(str(spec.out_path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
    return sidecar
