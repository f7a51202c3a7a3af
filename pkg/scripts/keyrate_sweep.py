#!/usr/bin/env python3
"""Sweep the key generation rate over signal strength for both Eve models.

Prints a CSV of S versus rate (bits/s) at a fixed line rate, illustrating
the collapse of the rate once the signal is strong enough for Eve too.
"""

import argparse

import numpy as np

from alphaeta.keyrate import KEYRATE_EVE_STRATEGIES, key_rate_vs_s


def run(s_min, s_max, steps, line_rate):
    grid = list(np.linspace(s_min, s_max, steps))
    columns = {name: key_rate_vs_s(grid, name, line_rate)
               for name in KEYRATE_EVE_STRATEGIES}
    print("S," + ",".join(KEYRATE_EVE_STRATEGIES))
    for i, s in enumerate(grid):
        rates = ",".join(f"{columns[name][i].rate:.6e}"
                         for name in KEYRATE_EVE_STRATEGIES)
        print(f"{s},{rates}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s-min", type=float, default=0.5)
    ap.add_argument("--s-max", type=float, default=30.0)
    ap.add_argument("--steps", type=int, default=60)
    ap.add_argument("--line-rate", type=float, default=1e9)
    args = ap.parse_args()
    run(args.s_min, args.s_max, args.steps, args.line_rate)
