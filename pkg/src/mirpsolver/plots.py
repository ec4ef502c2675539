"""Figure rendering for report, sweep and dump files.

Everything draws through the Agg backend and writes PNG files next to
the delimited output; nothing here affects solver results.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

STAGE_ORDER = ("bs", "ls", "ils")
STAGE_LABEL = {"bs": "After BS", "ls": "After LS", "ils": "After ILS"}


def _boxplot(groups: dict[str, list[float]], title: str, ylabel: str,
             path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    labels = list(groups)
    ax.boxplot([groups[k] for k in labels], tick_labels=labels)
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(plot_rows: list[list[str]], out_dir) -> list[Path]:
    """Box plots of cost (and gap, when available) by stage and by (N, stage)
    from the plot-data rows (Instance, N, Class, Seed, Stage, Cost, Gap,
    TimeSeconds)."""
    out = Path(out_dir)
    written: list[Path] = []
    if not plot_rows:
        return written
    by_stage_cost: dict[str, list[float]] = {}
    by_stage_gap: dict[str, list[float]] = {}
    by_n_stage_cost: dict[str, list[float]] = {}
    widths = sorted({row[1] for row in plot_rows}, key=int)
    for stage in STAGE_ORDER:
        for row in plot_rows:
            if row[4] != stage:
                continue
            label = STAGE_LABEL[stage]
            by_stage_cost.setdefault(label, []).append(float(row[5]))
            if row[6]:
                by_stage_gap.setdefault(label, []).append(float(row[6]))
    for n in widths:
        for stage in STAGE_ORDER:
            values = [float(row[5]) for row in plot_rows
                      if row[1] == n and row[4] == stage]
            if values:
                by_n_stage_cost[f"N={n}\n{STAGE_LABEL[stage]}"] = values
    if by_stage_cost:
        written.append(_boxplot(by_stage_cost, "Total cost by stage",
                                "Total cost", out / "cost_by_stage.png"))
    if by_stage_gap:
        written.append(_boxplot(by_stage_gap, "Objective gap by stage",
                                "Gap (%)", out / "gap_by_stage.png"))
    if len(widths) > 1 and by_n_stage_cost:
        written.append(_boxplot(by_n_stage_cost, "Total cost by beam width and stage",
                                "Total cost", out / "cost_by_width_stage.png"))
    return written


def render_sweep_figure(rows, param: str, out_path) -> Path:
    """Average and median metric against the swept parameter value."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [float(r.value) for r in rows]
    ax.plot(xs, [r.average for r in rows], marker="o", label="average")
    ax.plot(xs, [r.median_value for r in rows], marker="s", label="median")
    ax.set_xlabel(param)
    ax.set_ylabel(rows[0].metric)
    ax.set_title(f"Sweep over {param}")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def render_ils_convergence(dump_path, out_path) -> Path:
    """Current/best cost per iteration from an ILS dump CSV."""
    import csv

    iters, current, best = [], [], []
    with open(dump_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            iters.append(int(row["iter"]))
            current.append(float(row["current_cost"]))
            best.append(float(row["best_cost"]))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(iters, current, alpha=0.6, label="current")
    ax.plot(iters, best, linewidth=2, label="best")
    ax.set_xlabel("iteration")
    ax.set_ylabel("total cost")
    ax.set_title("ILS convergence")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def render_beam_levels(dump_path, out_path) -> Path:
    """Node scores and pool best per beam level from a beam dump CSV."""
    import csv

    levels, scores = [], []
    pool_levels, pool_best = [], []
    seen_levels = set()
    with open(dump_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            level = int(row["level"])
            levels.append(level)
            scores.append(float(row["score"]))
            if row["pool_best"] and level not in seen_levels:
                seen_levels.add(level)
                pool_levels.append(level)
                pool_best.append(float(row["pool_best"]))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.scatter(levels, scores, s=12, alpha=0.5, label="node score")
    if pool_levels:
        ax.plot(pool_levels, pool_best, color="C1", marker="o", label="pool best")
    ax.set_xlabel("level")
    ax.set_ylabel("total cost")
    ax.set_title("Beam levels")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)
