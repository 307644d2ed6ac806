'''
  @ Date: 2026/10/19 01:45
'''
import os

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from chirikov.data import read_csv


def draw_decay(series, rates, title):
    plt.figure(figsize=(8, 6), dpi=80)
    for realization, group in series.groupby("realization"):
        plt.semilogy(group["n"], group["norm"], lw=1, alpha=0.7, label="realization {0}".format(realization))
    n = np.arange(series["n"].max() + 1)
    mean_rate = rates["rate"].mean()
    plt.semilogy(n, series["norm"].iloc[0] * np.exp(-mean_rate * n), "k--", lw=2,
                 label="mean fit, rate {0:.3g} per period".format(mean_rate))
    plt.xlabel("period n")
    plt.ylabel("norm")
    plt.title(title)
    plt.legend(loc="upper right", fontsize=8)


def main(prefix="mix", out="results", image=None):
    """Plot <out>/<prefix>_series.csv against the fitted rates of <out>/<prefix>_rates.csv."""
    series = read_csv(os.path.join(out, prefix + "_series.csv"))
    rates = read_csv(os.path.join(out, prefix + "_rates.csv"))
    draw_decay(series, rates, "{0}: {1} realizations".format(prefix, series["realization"].nunique()))
    image = image or os.path.join(out, prefix + "_decay.png")
    plt.savefig(image)
    print("Saved: {0}".format(image))
    return image


if __name__ == '__main__':
    import fire
    fire.Fire(main)
