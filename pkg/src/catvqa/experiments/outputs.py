"""Writing sweep records, aggregates, plot data and threshold reports."""
from __future__ import annotations

import csv
import io
import json
import os
from collections import defaultdict
from pathlib import Path

from .sweep import RECORD_FIELDS
from .threshold import ThresholdReport, aggregate

AGGREGATE_FIELDS = ("model", "p", "n", "L", "count", "mean", "se")


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        w.writerow([_fmt(r[f]) for f in RECORD_FIELDS])
    return buf.getvalue()


def aggregate_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_FIELDS)
    for (model, p, n, L), pt in aggregate(records).items():
        w.writerow([model, _fmt(p), n, L, pt.count, _fmt(pt.mean), _fmt(pt.se)])
    return buf.getvalue()


def series_table(series: dict[str, list[tuple[float, float, float]]], title: str) -> str:
    """Two columns (p, mean cost) per series plus its standard error, padded with nan.

    Column groups are ``p_<name> cost_<name> se_<name>``; comment lines start with '#'.
    """
    names = list(series)
    rows = max((len(v) for v in series.values()), default=0)
    lines = [f"# {title}", "# " + " ".join(f"p_{s} cost_{s} se_{s}" for s in names)]
    for i in range(rows):
        cells = []
        for s in names:
            pts = series[s]
            cells += [_fmt(x) for x in pts[i]] if i < len(pts) else ["nan"] * 3
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def plot_tables(records) -> dict[str, str]:
    """Cost vs p per L (one file per model and n) and per model (one per n and L)."""
    agg = aggregate(records)
    by_L: dict[tuple, dict] = defaultdict(lambda: defaultdict(list))
    by_model: dict[tuple, dict] = defaultdict(lambda: defaultdict(list))
    for (model, p, n, L), pt in agg.items():
        by_L[(model, n)][f"L{L}"].append((p, pt.mean, pt.se))
        by_model[(n, L)][model].append((p, pt.mean, pt.se))
    files = {}
    for (model, n), series in sorted(by_L.items()):
        ordered = dict(sorted(series.items(), key=lambda kv: int(kv[0][1:])))
        files[f"cost_vs_p_by_L_{model}_n{n}.dat"] = series_table(ordered, f"final cost vs p, model {model}, n={n}")
    for (n, L), series in sorted(by_model.items()):
        files[f"cost_vs_p_by_model_n{n}_L{L}.dat"] = series_table(dict(series), f"final cost vs p, n={n}, L={L}")
    return files


def emit_outputs(records, reports: list[ThresholdReport], out_dir: str | os.PathLike) -> list[Path]:
    out = Path(out_dir)
    records = list(records)
    paths = [
        _write(out / "records.csv", records_csv(records)),
        _write(out / "aggregate.csv", aggregate_csv(records)),
        _write(out / "thresholds.json", json.dumps([r.to_dict() for r in reports], indent=2) + "\n"),
    ]
    for name, text in plot_tables(records).items():
        paths.append(_write(out / "plots" / name, text))
    return paths


def read_records_csv(path: str | os.PathLike) -> list[dict]:
    casts = {"p": float, "n": int, "L": int, "instance": int, "final_cost": float,
             "iterations": int, "shots": int, "seed": int, "depth": int}
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return [{k: casts.get(k, str)(v) for k, v in row.items()} for row in rows]
