#!/usr/bin/env python3
"""Quick look at a jjqj output directory.

ensemble output: histogram.csv against master.csv.
simulate output: switching current against ramp index, coloured by label.
"""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def read(path):
    return pd.read_csv(path, comment="#")


def main(directory, save=None):
    d = Path(directory)
    fig, ax = plt.subplots(figsize=(7, 4))
    if (d / "histogram.csv").exists():
        h = read(d / "histogram.csv")
        width = h.bin_hi_uA - h.bin_lo_uA
        ax.bar(h.bin_lo_uA, h["count"] / (h["count"].sum() * width), width=width, align="edge", alpha=0.5,
               label="trajectories")
        m = read(d / "master.csv")
        ax.plot(m.I_uA, m.density_per_uA, "r-", label="master equation")
        ax.set_xlabel("I_s (uA)")
        ax.set_ylabel("P(I_s) (1/uA)")
        ax.legend()
    else:
        r = read(d / "records.csv")
        if (d / "labels.csv").exists():
            lab = read(d / "labels.csv")
            for name, colour in (("upper", "tab:blue"), ("lower", "tab:orange")):
                sel = lab.branch == name
                ax.plot(r.ramp_index[sel], r.I_s_uA[sel], ".", ms=2, color=colour, label=name)
            ax.legend()
        else:
            ax.plot(r.ramp_index, r.I_s_uA, ".", ms=2)
        ax.set_xlabel("ramp")
        ax.set_ylabel("I_s (uA)")
    fig.tight_layout()
    if save:
        fig.savefig(save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit("usage: plot_output.py OUTPUT_DIR [IMAGE]")
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else None)
