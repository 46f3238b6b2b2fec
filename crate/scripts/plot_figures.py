#!/usr/bin/env python3
"""Plot the CSVs written by `mmd-classify simulate`.

Usage: python3 scripts/plot_figures.py OUT_DIR [--save DIR]

Needs pandas and matplotlib. Figures whose CSVs are missing are skipped.
"""

import argparse
import pathlib

import matplotlib.pyplot as plt
import pandas as pd


def load(out_dir, name):
    path = out_dir / f"{name}.csv"
    if not path.exists():
        return None
    return pd.read_csv(path, comment="#")


def curves(out_dir, names, x, y, ax, logy=True):
    drawn = False
    for label, name in names:
        df = load(out_dir, name)
        if df is None:
            continue
        df = df.sort_values(x)
        ax.plot(df[x], df[y], marker="o", ms=3, label=label)
        drawn = True
    if drawn:
        if logy:
            ax.set_yscale("log")
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
    return drawn


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--save", type=pathlib.Path)
    args = ap.parse_args()
    d = args.out_dir
    designs = [("fixed-length", "fixed"), ("sequential", "sequential"), ("two-phase", "two_phase")]

    panels = [
        ("fig1", "misclassification vs E[tau]", [(l, f"fig1_{n}") for l, n in designs], "expected_tau", "error_prob"),
        ("fig2", "running time vs E[tau]", [(l, f"fig1_{n}") for l, n in designs], "expected_tau", "mean_wall_time_s"),
        ("fig3", "misclassification vs running time", [(l, f"fig1_{n}") for l, n in designs], "mean_wall_time_s", "error_prob"),
        ("fig4a", "misclassification with a null option", [(l, f"fig4a_{n}") for l, n in designs], "expected_tau", "error_prob"),
        ("fig4b", "false alarm", [(l, f"fig4b_{n}") for l, n in designs], "expected_tau", "error_prob"),
        (
            "fig5",
            "misclassification vs delta (n = 25)",
            [
                ("fixed, simple", "fig5_fixed_simple"),
                ("fixed, general", "fig5_fixed_general"),
                ("two-phase, simple", "fig5_two_phase_simple"),
                ("two-phase, general", "fig5_two_phase_general"),
            ],
            "x_value",
            "error_prob",
        ),
    ]
    for key, title, names, x, y in panels:
        fig, ax = plt.subplots(figsize=(5, 4))
        if not curves(d, names, x, y, ax):
            plt.close(fig)
            continue
        ax.set_title(title)
        ax.set_xlabel("delta" if key == "fig5" else x)
        ax.set_ylabel(y)
        fig.tight_layout()
        if args.save:
            args.save.mkdir(parents=True, exist_ok=True)
            fig.savefig(args.save / f"{key}.png", dpi=150)
    if not args.save:
        plt.show()


if __name__ == "__main__":
    main()
