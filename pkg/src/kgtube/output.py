"""Deterministic CSV/JSON writers and static SVG plots."""

from __future__ import annotations

import io
import json
import math
from typing import Any, Iterable, Sequence


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.17g}"
    return str(value)


def to_csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        cells = []
        for col in columns:
            cell = fmt(row.get(col))
            if any(ch in cell for ch in ',"\n'):
                cell = '"' + cell.replace('"', '""') + '"'
            cells.append(cell)
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _clean(value: Any) -> Any:
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.17g}")
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def to_json(command: str, config: dict, rows: list[dict], summary: dict | None = None) -> str:
    payload = {"command": command, "config": config, "rows": rows}
    if summary is not None:
        payload["summary"] = summary
    return json.dumps(_clean(payload), indent=1, allow_nan=False) + "\n"


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "kgtube"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def figure(ncols: int = 1, width: float = 6.0, height: float = 4.5):
    plt = _pyplot()
    fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, height), squeeze=False)
    return fig, list(axes[0])


def to_svg(fig) -> str:
    plt = _pyplot()
    buf = io.StringIO()
    fig.tight_layout()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()
