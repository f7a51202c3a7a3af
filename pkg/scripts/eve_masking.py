#!/usr/bin/env python3
"""Show how the no-key Helstrom error grows with the number of bases.

Sweeps M for a few signal strengths and both bit mappings, printing one
CSV block per (S, mapping) pair.
"""

import argparse

from alphaeta.cipher import MAPPINGS, Constellation
from alphaeta.receivers import eve_nokey_helstrom


def run(s_values, m_values):
    for s in s_values:
        for mapping in MAPPINGS:
            print(f"# S={s}, mapping={mapping}")
            print("M,p_e")
            for m in m_values:
                pe = eve_nokey_helstrom(s, Constellation(m, mapping))
                print(f"{m},{pe:.6e}")
            print()


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s-values", default="1,4,7",
                    help="comma list of mean photon numbers")
    ap.add_argument("--m-values", default="1,2,4,8,16,32,64",
                    help="comma list of basis counts (powers of two)")
    args = ap.parse_args()
    run([float(x) for x in args.s_values.split(",")],
        [int(x) for x in args.m_values.split(",")])
