"""Render figure analogs from simulator CSV bundles.

This package is a pure consumer of the simulator's documented bundle
format (CSV tables + manifest/metadata JSON); it never recomputes
physics, so a golden bundle renders identically regardless of the
simulator version that produced it.

Table naming in a bundle directory follows ``figNN_<case>...csv``; the
catalog below groups tables into panels by filename pattern and column
prefix.  Styling is deterministic: fixed figure geometry, fixed color
order keyed by the sorted case labels.
"""

from __future__ import annotations

import csv
import json
import os
import re
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["RenderError", "EmptyDataError", "FigureSpec", "FIGURE_SPECS",
           "load_bundle", "render"]

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


class RenderError(RuntimeError):
    """Missing tables/columns or malformed bundle contents."""


class EmptyDataError(RenderError):
    """All selected series were empty; a 'no data' placeholder was drawn."""


@dataclass(frozen=True)
class PanelSpec:
    """One axes: tables matched by pattern, series chosen by column rule."""

    table_pattern: str
    x_column: str
    series: str              # "columns:<a,b,...>" | "prefix:<p>" | "magnitude:<p>"
    title: str
    x_label: str
    y_label: str
    log_y: bool = False
    log_x: bool = False


@dataclass(frozen=True)
class FigureSpec:
    fig: int
    panels: tuple[PanelSpec, ...]
    caption: str


def _chi_panel(pattern, title):
    return PanelSpec(table_pattern=pattern, x_column="t_ps",
                     series="magnitude:chi_eep",
                     title=title, x_label="time (ps)",
                     y_label="|map tensor element|")


FIGURE_SPECS: dict[int, FigureSpec] = {
    1: FigureSpec(1, (
        PanelSpec("fig01_gap_scan", "delta_cm1",
                  "columns:gamma_eeprime_per_ps,r_bb_eeprime_per_ps",
                  "coherence decay vs donor-acceptor gap",
                  "energy gap (cm^-1)", "rate (1/ps)"),),
        "radiative decay rate of the single-exciton coherence vs gap, with "
        "the tensor-element estimate overlaid"),
    2: FigureSpec(2, (
        PanelSpec("fig02_coupling_scan", "ratio_coupling_over_gap",
                  "columns:gamma_eeprime_per_ps,r_bb_eeprime_per_ps",
                  "coherence decay vs coupling/gap",
                  "coupling / gap", "rate (1/ps)"),),
        "same quantities against the scaled coupling strength"),
    3: FigureSpec(3, (
        PanelSpec("fig03_mu_scan", "mu_scale",
                  "columns:re_L_eeprime_per_ps,im_L_eeprime_radps,"
                  "r_bb_eeprime_per_ps,two_r_bb_eeprime_per_ps",
                  "tracked eigenvalue vs dipole scaling",
                  "dipole scale", "rate (1/ps)", log_x=True),
        _chi_panel(r"fig03_chi_tb_lambda\d+", "phonon-driven map elements"),
        _chi_panel(r"fig03_chi_bb_mu\d+", "radiation-driven map elements"),),
        "regime scan plus the map-tensor elements feeding the single-exciton "
        "coherence for each bath separately"),
    4: FigureSpec(4, (
        _chi_panel(r"fig04_chi_tbbb_lambda\d+", "map elements, both baths"),),
        "map-tensor elements with phonons and radiation acting together"),
    5: FigureSpec(5, (
        PanelSpec(r"fig05_lambda\d+_exciton", "t_ps", "prefix:pop_",
                  "eigenstate populations", "time (ps)", "population"),
        PanelSpec(r"fig05_lambda\d+_exciton", "t_ps", "magnitude:coh_",
                  "eigenstate coherences", "time (ps)", "|coherence|"),
        PanelSpec(r"fig05_lambda\d+_site", "t_ps", "prefix:pop_site",
                  "site populations", "time (ps)", "population"),
        PanelSpec(r"fig05_lambda\d+_site", "t_ps", "magnitude:coh_site",
                  "site coherences", "time (ps)", "|coherence|"),),
        "sudden illumination from the ground state in both bases"),
    6: FigureSpec(6, (
        PanelSpec(r"fig06_lambda0_site", "t_ps", "prefix:pop_site",
                  "MBV decoupled, no phonons", "time (ps)", "population",
                  log_y=True),
        PanelSpec(r"fig06_lambda13_site", "t_ps", "prefix:pop_site",
                  "MBV decoupled, phonons on", "time (ps)", "population",
                  log_y=True),),
        "site populations with MBV sites decoupled from the light; log scale"),
    7: FigureSpec(7, (
        PanelSpec(r"fig07_lambda130_site", "t_ps", "prefix:pop_site",
                  "MBV decoupled, strong phonons", "time (ps)", "population",
                  log_y=True),),
        "as figure 6 at reorganization energy 130 cm^-1; log scale"),
    8: FigureSpec(8, (
        PanelSpec(r"fig08_lambda\d+_exciton", "t_ps", "prefix:pop_",
                  "eigenstate populations", "time (ps)", "population"),
        PanelSpec(r"fig08_lambda\d+_exciton", "t_ps", "magnitude:coh_",
                  "eigenstate coherences", "time (ps)", "|coherence|"),
        PanelSpec(r"fig08_lambda\d+_site", "t_ps", "prefix:pop_site",
                  "site populations", "time (ps)", "population"),
        PanelSpec(r"fig08_lambda\d+_site", "t_ps", "magnitude:coh_site",
                  "site coherences", "time (ps)", "|coherence|"),),
        "evolution from the artificially prepared eigenstate"),
    9: FigureSpec(9, (
        PanelSpec("fig09_trace_distance", "t_ps", "prefix:trace_distance",
                  "radiation on vs off", "time (ps)", "trace distance"),),
        "distinguishability of the radiation-on and radiation-off evolutions"),
    10: FigureSpec(10, (
        PanelSpec(r"fig10_alpha\d+_exciton", "t_ps", "prefix:pop_",
                  "populations per turn-on", "time (ps)", "population"),
        PanelSpec(r"fig10_alpha\d+_exciton", "t_ps", "magnitude:coh_",
                  "coherences per turn-on", "time (ps)", "|coherence|"),),
        "slow turn-on: the slower the ramp the smaller the coherences"),
}


def load_bundle(bundle_dir: str) -> tuple[dict, dict]:
    """Read every CSV table and the metadata sidecars of a bundle.

    Returns (tables, metadata) where tables maps the table name (file
    stem) to (column names, column arrays).
    """
    if not os.path.isdir(bundle_dir):
        raise RenderError(f"bundle directory not found: {bundle_dir}")
    tables = {}
    for name in sorted(os.listdir(bundle_dir)):
        if not name.endswith(".csv"):
            continue
        path = os.path.join(bundle_dir, name)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise RenderError(f"{name}: empty file, missing header row")
            rows = [[float(x) for x in row] for row in reader]
        data = np.array(rows) if rows else np.empty((0, len(header)))
        tables[name[:-4]] = (header, {h: data[:, i] for i, h in enumerate(header)})
    metadata = {}
    for side in ("metadata.json", "manifest.json"):
        path = os.path.join(bundle_dir, side)
        if os.path.exists(path):
            with open(path) as fh:
                metadata.update(json.load(fh))
    return tables, metadata


def _match_tables(tables: dict, pattern: str) -> list[str]:
    rx = re.compile(pattern + r"\Z")
    return sorted(name for name in tables if rx.match(name))


def _series_from(header, cols, rule, table_label):
    """Yield (label, y-array) per the panel's series rule."""
    out = []
    if rule.startswith("columns:"):
        for col in rule[len("columns:"):].split(","):
            if col not in cols:
                raise RenderError(f"{table_label}: missing required column {col!r}")
            out.append((col, cols[col]))
    elif rule.startswith("prefix:"):
        prefix = rule[len("prefix:"):]
        names = [h for h in header if h.startswith(prefix)]
        if not names:
            raise RenderError(f"{table_label}: no columns with prefix {prefix!r}")
        for h in names:
            out.append((h, cols[h]))
    elif rule.startswith("magnitude:"):
        prefix = rule[len("magnitude:"):]
        pairs = [h[3:] for h in header if h.startswith(f"re_{prefix}")]
        if not pairs:
            raise RenderError(f"{table_label}: no re_/im_ pairs with prefix {prefix!r}")
        for tag in pairs:
            if f"im_{tag}" not in cols:
                raise RenderError(f"{table_label}: missing column im_{tag}")
            out.append((f"|{tag}|", np.hypot(cols[f"re_{tag}"], cols[f"im_{tag}"])))
    else:  # pragma: no cover - catalog is static
        raise RenderError(f"unknown series rule {rule!r}")
    return out


def render(bundle_dir: str, fig: int, out_path: str) -> dict:
    """Render one catalogued figure from a bundle to an image file.

    Returns a summary dict with the number of drawn series.  Raises
    RenderError for missing tables/columns; raises EmptyDataError after
    writing an explicit "no data" placeholder when every selected series
    is empty.
    """
    if fig not in FIGURE_SPECS:
        raise RenderError(f"unknown figure id {fig}; expected 1..10")
    spec = FIGURE_SPECS[fig]
    tables, metadata = load_bundle(bundle_dir)

    n = len(spec.panels)
    ncols = 2 if n > 1 else 1
    nrows = (n + ncols - 1) // ncols
    fig_obj, axes = plt.subplots(nrows, ncols, figsize=(6.4 * ncols, 4.2 * nrows),
                                 squeeze=False)
    drawn = 0
    try:
        for k, panel in enumerate(spec.panels):
            ax = axes[k // ncols][k % ncols]
            names = _match_tables(tables, panel.table_pattern)
            if not names:
                raise RenderError(f"figure {fig}: no tables match {panel.table_pattern!r}")
            color_index = 0
            for tname in names:
                header, cols = tables[tname]
                if panel.x_column not in cols:
                    raise RenderError(f"{tname}: missing required column {panel.x_column!r}")
                x = cols[panel.x_column]
                case = tname.split("_", 1)[1] if "_" in tname else tname
                for label, y in _series_from(header, cols, panel.series, tname):
                    if x.size == 0:
                        continue
                    full = f"{case}:{label}" if len(names) > 1 else label
                    ax.plot(x, y, lw=1.2, color=_COLORS[color_index % len(_COLORS)],
                            label=full)
                    color_index += 1
                    drawn += 1
            ax.set_title(panel.title, fontsize=10)
            ax.set_xlabel(panel.x_label)
            ax.set_ylabel(panel.y_label)
            if panel.log_y:
                ax.set_yscale("log")
            if panel.log_x:
                ax.set_xscale("log")
            if drawn and color_index:
                ax.legend(fontsize=6, loc="best")
        for k in range(n, nrows * ncols):
            axes[k // ncols][k % ncols].axis("off")
        if drawn == 0:
            for row in axes:
                for ax in row:
                    ax.text(0.5, 0.5, "no data", ha="center", va="center",
                            transform=ax.transAxes, fontsize=18, color="crimson")
            fig_obj.savefig(out_path, dpi=130)
            raise EmptyDataError(f"figure {fig}: all selected series were empty")
        fig_obj.suptitle(spec.caption, fontsize=10)
        fig_obj.tight_layout(rect=(0, 0, 1, 0.96))
        fig_obj.savefig(out_path, dpi=130)
    finally:
        plt.close(fig_obj)
    return {"figure": fig, "series": drawn, "panels": n, "out": out_path,
            "bundle_tool": metadata.get("tool")}
