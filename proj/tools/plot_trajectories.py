#!/usr/bin/env python3
"""Plot the CSV trajectories written by `dmd simulate`.

Continuous runs (columns t, z_*, x_*, V, residual) are drawn in the action
plane when the game has two coordinates, otherwise as x_i(t). Discrete runs
(columns k, x_*, residual) are drawn against the iteration counter.
"""

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def action_columns(frame):
    return [c for c in frame.columns if c.startswith("x_")]


def plot_run(ax, frame, label):
    xs = action_columns(frame)
    if len(xs) == 2:
        (line,) = ax.plot(frame[xs[0]], frame[xs[1]], label=label)
        ax.plot(frame[xs[0]].iloc[-1], frame[xs[1]].iloc[-1], "o", ms=4, color=line.get_color())
        ax.set_xlabel("x_1")
        ax.set_ylabel("x_2")
    else:
        clock = "t" if "t" in frame.columns else "k"
        for c in xs[:8]:
            ax.plot(frame[clock], frame[c], label=f"{label}:{c}")
        ax.set_xlabel(clock)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=Path, help="directory holding summary.json")
    parser.add_argument("--output", type=Path, default=None, help="PNG path")
    args = parser.parse_args()

    summary = json.loads((args.out_dir / "summary.json").read_text())
    fig, (ax_path, ax_res) = plt.subplots(1, 2, figsize=(11, 4.5))
    for run in summary["runs"]:
        frame = pd.read_csv(args.out_dir / run["file"])
        plot_run(ax_path, frame, run["label"])
        clock = "t" if "t" in frame.columns else "k"
        ax_res.semilogy(frame[clock], frame["residual"].clip(lower=1e-16), label=run["label"])
    target = summary.get("target") or {}
    if "point" in target:
        ax_path.plot(*target["point"][:2], "*", ms=12, color="green", label="target")
    ax_path.set_title(summary["experiment"])
    ax_res.set_title("Nash residual")
    ax_path.legend(fontsize=7)
    ax_res.legend(fontsize=7)
    fig.tight_layout()
    output = args.output or args.out_dir / "trajectories.png"
    fig.savefig(output, dpi=120)
    print(output)


if __name__ == "__main__":
    main()
