"""The four figure families rendered from experiment CSVs.

Kinds and their source schemas:

* arm-dist: per-repetition optimal-arm pull counts by policy
  (arm_distribution CSV) as overlaid histograms;
* phase: medians across the instability index against the predicted
  count and its confidence band (phase_sweep CSV), log-log axes,
  four series: UCB median, UCB-V median, prediction line, band;
* regret: mean pseudo-regret against the optimal arm's sd with spread
  bars and the analytic bound (regret CSV), log-log axes;
* zstat: studentized-deviation densities by policy with the standard
  normal overlay (zstat CSV sample rows).

Validation happens before any figure is created, so a failed render
writes nothing. Columns outside the documented schema are ignored
with a warning; missing required columns raise SchemaMismatchError
naming the first offender.
"""

from __future__ import annotations

import math
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .csvin import read_experiment_csv

FIGURE_KINDS = ("arm-dist", "phase", "regret", "zstat")

_REQUIRED = {
    "arm-dist": ("policy", "n_1"),
    "phase": ("lambda", "ucb_median_n1", "ucbv_median_n1", "n1_star", "n1_low", "n1_high"),
    "regret": ("sigma1", "mean_regret", "stdev_regret", "bound"),
    "zstat": ("row_type", "policy", "z_2"),
}

_DOCUMENTED = {
    "arm-dist": ("policy", "rep_index", "seed", "n_1", "n_2", "regret"),
    "phase": (
        "lambda", "gap",
        "ucb_median_n1", "ucb_q30_n1", "ucbv_median_n1", "ucbv_q30_n1",
        "n1_star", "n1_low", "n1_high",
    ),
    "regret": (
        "sigma1_requested", "sigma1", "sigma2", "mean_regret", "stdev_regret", "bound",
    ),
    "zstat": ("row_type", "policy", "rep_index", "seed", "z_2", "ks", "n_defined"),
}


class SchemaMismatchError(ValueError):
    """CSV columns do not fit the figure kind's schema."""

    def __init__(self, message: str, column: str):
        super().__init__(message)
        self.column = column


class EmptyDataError(ValueError):
    """CSV carries a header but no usable data rows."""


def _check_schema(kind: str, header: list[str]):
    for column in _REQUIRED[kind]:
        if column not in header:
            raise SchemaMismatchError(
                f"column {column!r} required for kind {kind!r} is missing", column
            )
    extra = [c for c in header if c not in _DOCUMENTED[kind]]
    if extra:
        warnings.warn(
            f"ignoring columns outside the {kind!r} schema: {', '.join(extra)}",
            stacklevel=3,
        )


def _cell_float(row: dict, column: str) -> float:
    raw = row[column]
    try:
        return float(raw)
    except ValueError:
        raise SchemaMismatchError(
            f"non-numeric value {raw!r} in column {column!r}", column
        ) from None


def _title(base: str, config: dict | None) -> str:
    if config and "horizon" in config:
        return f"{base} (T = {config['horizon']})"
    return base


def _build_arm_dist(config, rows):
    groups: dict[str, list[float]] = {}
    for row in rows:
        groups.setdefault(row["policy"], []).append(_cell_float(row, "n_1"))
    fig, ax = plt.subplots()
    for policy in sorted(groups):
        ax.hist(groups[policy], bins=40, alpha=0.6, label=policy)
    ax.set_xlabel("optimal-arm pulls")
    ax.set_ylabel("repetitions")
    ax.set_title(_title("pull-count distribution", config))
    ax.legend()
    return fig


def _build_phase(config, rows):
    rows = sorted(rows, key=lambda r: _cell_float(r, "lambda"))
    lam = [_cell_float(r, "lambda") for r in rows]
    ucb = [_cell_float(r, "ucb_median_n1") for r in rows]
    ucbv = [_cell_float(r, "ucbv_median_n1") for r in rows]
    star = [_cell_float(r, "n1_star") for r in rows]
    low = [_cell_float(r, "n1_low") for r in rows]
    high = [_cell_float(r, "n1_high") for r in rows]
    fig, ax = plt.subplots()
    ax.fill_between(lam, low, high, alpha=0.25, label="confidence band")
    ax.plot(lam, star, linestyle=":", label="prediction")
    ax.plot(lam, ucbv, marker="o", label="UCB-V median")
    ax.plot(lam, ucb, marker="s", label="UCB median")
    ax.set_xscale("log")  # the transition at 1 is multiplicative
    ax.set_yscale("log")
    ax.set_xlabel("instability index")
    ax.set_ylabel("optimal-arm pulls")
    ax.set_title(_title("phase transition", config))
    ax.legend()
    return fig


def _build_regret(config, rows):
    rows = sorted(rows, key=lambda r: _cell_float(r, "sigma1"))
    sigma1 = [_cell_float(r, "sigma1") for r in rows]
    mean = [_cell_float(r, "mean_regret") for r in rows]
    sd = [_cell_float(r, "stdev_regret") for r in rows]
    bound = [_cell_float(r, "bound") for r in rows]
    fig, ax = plt.subplots()
    ax.errorbar(sigma1, mean, yerr=sd, marker="o", capsize=3, label="mean regret")
    ax.plot(sigma1, bound, linestyle="--", label="bound")
    if min(sigma1) > 0.0:
        ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("optimal-arm sd")
    ax.set_ylabel("pseudo-regret")
    ax.set_title(_title("regret against optimal-arm sd", config))
    ax.legend()
    return fig


def _build_zstat(config, rows):
    groups: dict[str, list[float]] = {}
    for row in rows:
        if row["row_type"] != "sample" or row["z_2"] == "":
            continue
        groups.setdefault(row["policy"], []).append(_cell_float(row, "z_2"))
    if not groups:
        raise EmptyDataError("no sample rows with a defined deviation")
    fig, ax = plt.subplots()
    for policy in sorted(groups):
        ax.hist(groups[policy], bins=40, density=True, histtype="step", label=policy)
    span = max(4.0, max(abs(v) for vals in groups.values() for v in vals))
    xs = [(-span + i * span / 100.0) for i in range(201)]
    pdf = [math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi) for x in xs]
    ax.plot(xs, pdf, linestyle=":", label="standard normal")
    ax.set_xlabel("studentized deviation")
    ax.set_ylabel("density")
    ax.set_title(_title("deviation density", config))
    ax.legend()
    return fig


_BUILDERS = {
    "arm-dist": _build_arm_dist,
    "phase": _build_phase,
    "regret": _build_regret,
    "zstat": _build_zstat,
}


def build_figure(figure_kind: str, config, header, rows):
    """Validate the table against the kind's schema and build the figure."""
    if figure_kind not in _BUILDERS:
        raise ValueError(
            f"unknown figure kind {figure_kind!r}; choose from {', '.join(FIGURE_KINDS)}"
        )
    _check_schema(figure_kind, header)
    if not rows:
        raise EmptyDataError("CSV has a header but no data rows")
    return _BUILDERS[figure_kind](config, rows)


def render(csv_path, figure_kind: str, out_path) -> Path:
    """Render one CSV into one image; nothing is written on failure."""
    config, header, rows = read_experiment_csv(csv_path)
    fig = build_figure(figure_kind, config, header, rows)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(out_path)
    finally:
        plt.close(fig)
    return out_path
