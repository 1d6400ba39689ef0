"""Render figures from rswlab output files.

Three figure kinds:

* waveform   -- one or more snapshot CSVs (columns x, field...) overlaid
* invariants -- series.csv drift curves, one panel per diagnostic
* slopes     -- study.csv points on log-log axes, the least-squares line at
                the slope stored in study.json, and a reference line with
                the theorem's target exponent

Physics is never recomputed here: every number comes from the input files.
In particular the printed slope is study.json's fitted_slope verbatim.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class SchemaError(Exception):
    """An input file does not match the rswlab CSV/JSON schema."""


FIGURE_KINDS = ("waveform", "invariants", "slopes")


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str
    target_slope: float | None = None
    title: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choices {FIGURE_KINDS}")
        if not self.inputs:
            raise SchemaError("figure needs at least one input file")


def read_csv(path: str, required: tuple = ()) -> dict:
    """Columns of a CSV file as float arrays keyed by header name."""
    if not os.path.exists(path):
        raise SchemaError(f"input file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    for name in required:
        if name not in header:
            raise SchemaError(f"{path}: missing column {name!r}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    cols = {name: np.empty(len(rows)) for name in header}
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} fields, "
                              f"header has {len(header)}")
        for name, value in zip(header, row):
            try:
                cols[name][i] = float(value) if value else np.nan
            except ValueError:
                raise SchemaError(f"{path}: non-numeric value {value!r} in "
                                  f"column {name!r}") from None
    return cols


def read_study_json(path: str) -> dict:
    if not os.path.exists(path):
        raise SchemaError(f"input file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    for key in ("fitted_slope", "mu_values", "errors"):
        if key not in payload:
            raise SchemaError(f"{path}: missing key {key!r}")
    return payload


def _plot_waveform(spec: FigureSpec, ax) -> dict:
    for path in spec.inputs:
        cols = read_csv(path, required=("x",))
        x = cols.pop("x")
        label_base = os.path.splitext(os.path.basename(path))[0]
        for name, vals in cols.items():
            suffix = f" {name}" if len(cols) > 1 else ""
            ax.plot(x, vals, lw=1.2, label=f"{label_base}{suffix}")
    ax.set_xlabel("x")
    ax.set_ylabel("field")
    ax.legend(fontsize=7, ncol=2)
    return {}


def _plot_invariants(spec: FigureSpec, fig) -> dict:
    cols = read_csv(spec.inputs[0], required=("t",))
    t = cols.pop("t")
    names = [n for n in cols if np.isfinite(cols[n]).any()]
    axes = fig.subplots(len(names), 1, sharex=True)
    if len(names) == 1:
        axes = [axes]
    for ax, name in zip(axes, names):
        ref = cols[name][0]
        ax.plot(t, cols[name] - ref, lw=1.2)
        ax.set_ylabel(f"{name} drift", fontsize=8)
        ax.axhline(0.0, color="0.6", lw=0.6)
    axes[-1].set_xlabel("t")
    return {}


def _plot_slopes(spec: FigureSpec, ax) -> dict:
    csv_path = next((p for p in spec.inputs if p.endswith(".csv")), None)
    json_path = next((p for p in spec.inputs if p.endswith(".json")), None)
    if csv_path is None or json_path is None:
        raise SchemaError("slopes figure needs one study.csv and one study.json")
    cols = read_csv(csv_path, required=("mu", "error"))
    report = read_study_json(json_path)
    mu, err = cols["mu"], cols["error"]
    ax.loglog(mu, err, "o", ms=5, label="measured")

    slope = report["fitted_slope"]
    if slope is not None:
        # anchor the drawn line with a least-squares intercept at the stored
        # slope; the slope value itself is the report's, untouched
        logmu = np.log(mu)
        intercept = float(np.mean(np.log(err) - slope * logmu))
        ax.loglog(mu, np.exp(intercept + slope * logmu), "-",
                  label=f"fit: slope {slope:.3f}")
    target = spec.target_slope
    if target is None:
        target = report.get("expected_slope")
    if target is not None:
        anchor = err[int(np.argmax(mu))] / mu[int(np.argmax(mu))] ** target
        ax.loglog(mu, anchor * mu ** target, "--", color="0.4",
                  label=f"target: slope {target:g}")
    verdict = report.get("passed")
    if verdict is not None:
        ax.set_title(("PASS" if verdict else "FAIL")
                     + (f"  ({report.get('status')})" if report.get("status") not in (None, "ok") else ""),
                     fontsize=10)
    ax.set_xlabel("mu")
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    return {"annotated_slope": slope, "passed": verdict}


def plot(spec: FigureSpec) -> dict:
    """Render the figure and return the annotation payload (stored slope,
    verdict) for the caller's bookkeeping."""
    fig = plt.figure(figsize=(6.0, 4.0), dpi=130)
    try:
        if spec.kind == "invariants":
            info = _plot_invariants(spec, fig)
        else:
            ax = fig.subplots()
            info = _plot_waveform(spec, ax) if spec.kind == "waveform" \
                else _plot_slopes(spec, ax)
        if spec.title:
            fig.suptitle(spec.title, fontsize=11)
        fig.tight_layout()
        outdir = os.path.dirname(os.path.abspath(spec.output))
        os.makedirs(outdir, exist_ok=True)
        fig.savefig(spec.output)
    finally:
        plt.close(fig)
    return info
