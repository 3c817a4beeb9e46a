#!/usr/bin/env python3
"""Render static figures from the simulator CLI's CSV outputs.

Usage:
    render_figure.py --figure <name> --inputs <csv...> --out <path>

Input files are recognised by their header columns, not by filename, so
any mix of trajectory, spectrum, scar, thermal, summary and
deviation-evolution CSVs can be passed in one --inputs list. Curves are
labelled by the parent directory and stem of their file. Horizontal
thermal reference lines are always taken from a thermal CSV among the
inputs, never hard-coded; the value used is echoed on stdout. Images are
byte-stable: embedded timestamps are disabled for every output format.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PURPLE = "#7b3294"
GREEN = "#66c2a5"
CYCLE = [PURPLE, GREEN, "#d7301f", "#2b8cbe", "#e7a118", "#555555"]

FIGURES = {}


class FigureError(RuntimeError):
    pass


def register(name):
    def wrap(fn):
        FIGURES[name] = fn
        return fn
    return wrap


def read_table(path):
    """CSV -> dict of column name -> list of strings. Header row mandatory."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FigureError(f"{path}: empty file, no header row")
    header = rows[0]
    data = {name: [] for name in header}
    for row in rows[1:]:
        for name, value in zip(header, row):
            data[name].append(value)
    return data


def floats(table, column, path):
    if column not in table:
        raise FigureError(f"{path}: missing column {column!r}")
    values = [float(v) for v in table[column]]
    if not values:
        raise FigureError(f"{path}: column {column!r} has no data rows")
    return values


def label_of(path):
    stem = os.path.splitext(os.path.basename(path))[0]
    parent = os.path.basename(os.path.dirname(os.path.abspath(path)))
    return f"{parent}/{stem}" if parent else stem


def split_roles(paths):
    """Sort the input files into roles by their header columns."""
    roles = {"trajectory": [], "thermal": [], "spectrum": [], "scars": [],
             "summary": [], "deviation": []}
    for path in paths:
        table = read_table(path)
        if "sigma_z_thermal" in table:
            roles["thermal"].append((path, table))
        elif "vacuum_overlap" in table:
            roles["spectrum"].append((path, table))
        elif "is_scar" in table:
            roles["scars"].append((path, table))
        elif "scar_projection" in table:
            roles["summary"].append((path, table))
        elif "delta_loschmidt" in table and "step" in table:
            roles["deviation"].append((path, table))
        elif "loschmidt" in table and "step" in table:
            roles["trajectory"].append((path, table))
        else:
            raise FigureError(f"{path}: unrecognised header {sorted(table)}")
    return roles


def thermal_value(roles):
    """Reference magnetization from a thermal CSV (zero-momentum row)."""
    if not roles["thermal"]:
        raise FigureError("no input provides the column 'sigma_z_thermal'")
    path, table = roles["thermal"][0]
    values = floats(table, "sigma_z_thermal", path)
    ensembles = table.get("ensemble", [])
    for i, kind in enumerate(ensembles):
        if kind == "zero_momentum":
            return values[i]
    return values[0]


def need(roles, role, figure):
    if not roles[role]:
        raise FigureError(f"{figure} needs at least one {role} CSV input")
    return roles[role]


def draw_thermal_line(ax, value):
    ax.axhline(value, color="black", linewidth=1.2, linestyle=":",
               label=f"thermal {value:.3f}")
    print(f"thermal_reference={value!r}")


@register("fig2-magnetization")
def fig2(roles, ax_grid):
    (ax,) = ax_grid(1)
    for i, (path, table) in enumerate(need(roles, "trajectory", "fig2-magnetization")):
        ax.plot(floats(table, "time", path), floats(table, "sigma_z_21", path),
                color=CYCLE[i % len(CYCLE)], label=label_of(path))
    draw_thermal_line(ax, thermal_value(roles))
    ax.set_xlabel("time")
    ax.set_ylabel("local magnetization")
    ax.legend(fontsize=7)


@register("fig3-spectrum-panels")
def fig3(roles, ax_grid):
    axes = ax_grid(3)
    spath, table = need(roles, "spectrum", "fig3-spectrum-panels")[0]
    energy = floats(table, "energy", spath)
    entropy = floats(table, "entropy_nats", spath)
    overlap = floats(table, "vacuum_overlap", spath)
    sigma = floats(table, "sigma_z_21", spath)
    scar_mask = [False] * len(energy)
    if roles["scars"]:
        (cpath, scars) = roles["scars"][0]
        flags = floats(scars, "is_scar", cpath)
        scar_mask = [f > 0.5 for f in flags]
    colors = [PURPLE if s else GREEN for s in scar_mask]
    sizes = [22 if s else 7 for s in scar_mask]

    axes[0].scatter(energy, entropy, c=colors, s=sizes)
    axes[0].set_ylabel("entanglement entropy")
    keep = [i for i, o in enumerate(overlap) if o >= 1e-12]  # plotting cutoff
    axes[1].scatter([energy[i] for i in keep], [overlap[i] for i in keep],
                    c=[colors[i] for i in keep], s=[sizes[i] for i in keep])
    axes[1].set_yscale("log")
    axes[1].set_ylabel("overlap with vacuum")
    axes[2].scatter(energy, sigma, c=colors, s=sizes)
    if roles["thermal"]:
        draw_thermal_line(axes[2], thermal_value(roles))
    axes[2].set_ylabel("local magnetization")
    axes[2].set_xlabel("energy")


@register("fig4-sequential-vs-exact")
def fig4(roles, ax_grid):
    (ax,) = ax_grid(1)
    for i, (path, table) in enumerate(need(roles, "trajectory", "fig4-sequential-vs-exact")):
        style = "--" if "sequential" in os.path.basename(path) else "-"
        ax.plot(floats(table, "time", path), floats(table, "sigma_z_21", path),
                style, color=CYCLE[(i // 2) % len(CYCLE)], label=label_of(path))
    ax.set_xlabel("time")
    ax.set_ylabel("local magnetization")
    ax.legend(fontsize=7)


@register("fig5-deviation-vs-projection")
def fig5(roles, ax_grid):
    axes = ax_grid(2)
    entries = need(roles, "summary", "fig5-deviation-vs-projection")
    for quantity, ax in zip(("sigma_z", "loschmidt"), axes):
        for i, (path, table) in enumerate(entries):
            x = floats(table, "scar_projection", path)
            y = floats(table, f"delta_{quantity}_mean", path)
            err = floats(table, f"delta_{quantity}_err", path)
            state = table.get("state", [label_of(path)] * len(x))
            ax.errorbar(x, y, yerr=err, fmt="o", capsize=3,
                        color=CYCLE[i % len(CYCLE)], label=state[0])
        ax.set_ylabel(f"deviation of {quantity}")
        ax.legend(fontsize=7)
    axes[-1].set_xlabel("projection on the scar sector")


@register("fig6-deviation-evolution")
def fig6(roles, ax_grid):
    (ax,) = ax_grid(1)
    for i, (path, table) in enumerate(need(roles, "deviation", "fig6-deviation-evolution")):
        ax.plot(floats(table, "time", path), floats(table, "delta_loschmidt", path),
                color=CYCLE[i % len(CYCLE)], label=label_of(path))
    ax.set_xlabel("time")
    ax.set_ylabel("deviation of the Loschmidt echo")
    ax.legend(fontsize=7)


@register("fig7-entropy-evolution")
def fig7(roles, ax_grid):
    (ax,) = ax_grid(1)
    for i, (path, table) in enumerate(need(roles, "trajectory", "fig7-entropy-evolution")):
        ax.plot(floats(table, "time", path), floats(table, "entropy_nats", path),
                color=CYCLE[i % len(CYCLE)], label=label_of(path))
    ax.set_xlabel("time")
    ax.set_ylabel("half-chain entanglement entropy")
    ax.legend(fontsize=7)


@register("fig8-magnetization-evolution")
def fig8(roles, ax_grid):
    (ax,) = ax_grid(1)
    for i, (path, table) in enumerate(need(roles, "trajectory", "fig8-magnetization-evolution")):
        ax.plot(floats(table, "time", path), floats(table, "sigma_z_21", path),
                color=CYCLE[i % len(CYCLE)], label=label_of(path))
    draw_thermal_line(ax, thermal_value(roles))
    ax.set_xlabel("time")
    ax.set_ylabel("local magnetization")
    ax.legend(fontsize=7)


def save(fig, out):
    ext = os.path.splitext(out)[1].lower()
    metadata = None
    if ext == ".pdf":
        metadata = {"CreationDate": None}
    elif ext == ".svg":
        metadata = {"Date": None}
    fig.savefig(out, dpi=150, metadata=metadata)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--figure", required=True, choices=sorted(FIGURES))
    parser.add_argument("--inputs", required=True, nargs="+")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        roles = split_roles(args.inputs)
        n_axes = {"fig3-spectrum-panels": 3, "fig5-deviation-vs-projection": 2}.get(args.figure, 1)
        fig, axes = plt.subplots(n_axes, 1, figsize=(6.4, 2.6 * n_axes), squeeze=False,
                                 sharex=(n_axes > 1))
        flat = [ax for row in axes for ax in row]

        def ax_grid(n):
            return flat[:n]

        FIGURES[args.figure](roles, ax_grid)
        fig.tight_layout()
        save(fig, args.out)
        plt.close(fig)
    except (FigureError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
