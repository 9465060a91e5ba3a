"""CSV loading and series aggregation for experiment episode logs.

One CSV file is one seeded run; rows are executed rounds in order.  A
series aggregates several seed files of one method into a mean curve with
a +-1 standard-deviation band.  Metrics address columns by header name; a
missing column is reported with the offending file and column.
"""

from __future__ import annotations

import csv
import glob
import os
from dataclasses import dataclass

import numpy as np

from .specfile import SpecError


@dataclass
class SeriesSpec:
    name: str
    label: str
    files: list


@dataclass
class PlotSpec:
    metric: str
    kind: str  # curve | gap
    series: list
    output: str
    reference: str = ""
    denominator: str = ""
    scale: float = 1.0
    reduce: str = "none"  # none | episode_sum | episode_mean
    smoothing: int = 1
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""


def parse_spec(sections, source="<spec>"):
    if "plot" not in sections:
        raise SpecError(f"{source}: missing [plot] section")
    plot = sections["plot"]
    series = []
    for name, sec in sections.items():
        if not name.startswith("series"):
            continue
        tag = name[len("series") :].strip() or f"series{len(series)}"
        raw = sec.get("files", "")
        files = []
        for token in (t.strip() for t in raw.split(",")):
            if not token:
                continue
            matches = sorted(glob.glob(token))
            if matches:
                files.extend(matches)
            else:
                files.append(token)
        if not files:
            raise SpecError(f"{source}: [series {tag}] lists no files")
        series.append(SeriesSpec(name=tag, label=sec.get("label", tag), files=files))
    if not series:
        raise SpecError(f"{source}: no [series ...] sections")
    unknown = set(plot) - {
        "metric",
        "kind",
        "reference",
        "denominator",
        "scale",
        "reduce",
        "smoothing",
        "output",
        "title",
        "xlabel",
        "ylabel",
    }
    if unknown:
        raise SpecError(f"{source}: unknown [plot] keys: {', '.join(sorted(unknown))}")
    spec = PlotSpec(
        metric=plot.get("metric", "f_value"),
        kind=plot.get("kind", "curve"),
        series=series,
        output=plot.get("output", "figure.png"),
        reference=plot.get("reference", ""),
        denominator=plot.get("denominator", ""),
        scale=float(plot.get("scale", "1.0")),
        reduce=plot.get("reduce", "none"),
        smoothing=int(plot.get("smoothing", "1")),
        title=plot.get("title", ""),
        xlabel=plot.get("xlabel", ""),
        ylabel=plot.get("ylabel", ""),
    )
    if spec.kind not in ("curve", "gap"):
        raise SpecError(f"{source}: unknown kind {spec.kind!r}")
    if spec.reduce not in ("none", "episode_sum", "episode_mean"):
        raise SpecError(f"{source}: unknown reduce {spec.reduce!r}")
    if spec.kind == "gap":
        if not spec.reference:
            raise SpecError(f"{source}: gap panels need a reference series")
        if spec.reference not in {s.name for s in series}:
            raise SpecError(f"{source}: reference {spec.reference!r} is not a series")
    if spec.smoothing < 1:
        raise SpecError(f"{source}: smoothing window must be at least 1")
    return spec


def read_columns(path, columns):
    """Named columns of one CSV as float arrays (empty fields become nan)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SpecError(f"{path}: empty CSV")
        index = {}
        for col in columns:
            if col not in header:
                raise SpecError(f"{path}: column '{col}' not in CSV header")
            index[col] = header.index(col)
        out = {col: [] for col in columns}
        for row in reader:
            if not row:
                continue
            for col in columns:
                field = row[index[col]]
                out[col].append(float(field) if field != "" else np.nan)
    return {col: np.asarray(vals) for col, vals in out.items()}


def metric_values(path, spec):
    """The metric curve of one run file, after ratio/scale and reduction."""
    columns = [spec.metric]
    if spec.denominator:
        columns.append(spec.denominator)
    if spec.reduce != "none":
        columns.append("episode")
    data = read_columns(path, columns)
    values = data[spec.metric]
    if spec.denominator:
        values = values / data[spec.denominator]
    values = values / spec.scale
    if spec.reduce != "none":
        episodes = data["episode"].astype(int)
        ids = np.unique(episodes)
        agg = np.empty(len(ids))
        for j, e in enumerate(ids):
            chunk = values[episodes == e]
            agg[j] = chunk.sum() if spec.reduce == "episode_sum" else chunk.mean()
        values = agg
    return values


def smooth(values, window):
    """Centered moving average with shrinking windows at the edges."""
    if window <= 1:
        return values
    half = window // 2
    out = np.empty_like(values)
    for i in range(len(values)):
        lo = max(0, i - half)
        hi = min(len(values), i + half + 1)
        out[i] = values[lo:hi].mean()
    return out


def aggregate_series(series, spec):
    """Per-series (x, mean, std) over seed files, truncated to equal length."""
    runs = [metric_values(path, spec) for path in series.files]
    n = min(len(r) for r in runs)
    if n == 0:
        raise SpecError(f"series {series.name}: no data rows")
    stack = np.vstack([r[:n] for r in runs])
    mean = stack.mean(axis=0)
    std = stack.std(axis=0)
    return np.arange(1, n + 1), smooth(mean, spec.smoothing), smooth(std, spec.smoothing)


def gap_curves(spec):
    """Average-gap panels: (1/t) * sum_{tau<=t} (reference - method).

    When the reference and method have the same seed count, the gap is
    computed per seed pair (sorted file order) and averaged, giving a
    honest band; otherwise it is computed on the seed-mean curves with a
    zero band.
    """
    by_name = {s.name: s for s in spec.series}
    ref = by_name[spec.reference]
    ref_runs = [metric_values(p, spec) for p in ref.files]
    out = {}
    for s in spec.series:
        if s.name == spec.reference:
            continue
        runs = [metric_values(p, spec) for p in s.files]
        n = min(min(len(r) for r in runs), min(len(r) for r in ref_runs))
        t = np.arange(1, n + 1)
        if len(runs) == len(ref_runs):
            gaps = np.vstack(
                [np.cumsum(rr[:n] - mr[:n]) / t for rr, mr in zip(ref_runs, runs)]
            )
            mean, std = gaps.mean(axis=0), gaps.std(axis=0)
        else:
            ref_mean = np.vstack([r[:n] for r in ref_runs]).mean(axis=0)
            run_mean = np.vstack([r[:n] for r in runs]).mean(axis=0)
            mean = np.cumsum(ref_mean - run_mean) / t
            std = np.zeros(n)
        out[s.name] = (t, smooth(mean, spec.smoothing), smooth(std, spec.smoothing))
    return out
