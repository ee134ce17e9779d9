#!/usr/bin/env python3
"""Quick-look plots of trapdeco CSV output.

    trapdeco rabi --config configs/rabi_140khz.toml --out rabi.csv
    python3 scripts/plot.py rabi.csv -o rabi.png

The first column is the x axis; every other column is drawn against it.
Pass --y to pick columns. Needs pandas and matplotlib.
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--y", nargs="+", help="columns to plot (default: all but the first)")
    ap.add_argument("--logx", action="store_true")
    ap.add_argument("--logy", action="store_true")
    ap.add_argument("-o", "--output", help="image path (default: <csv stem>.png)")
    args = ap.parse_args()

    df = pd.read_csv(args.csv)
    x = df.columns[0]
    ys = args.y or [c for c in df.columns[1:] if c != "mc_stderr"]

    fig, ax = plt.subplots(figsize=(6, 4))
    for col in ys:
        style = "o" if len(df) < 40 else "-"
        ax.plot(df[x], df[col], style, ms=3, label=col)
    ax.set_xlabel(x)
    if args.logx:
        ax.set_xscale("log")
    if args.logy:
        ax.set_yscale("log")
    if len(ys) > 1:
        ax.legend()
    fig.tight_layout()
    out = args.output or args.csv.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
