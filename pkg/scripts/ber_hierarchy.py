#!/usr/bin/env python3
"""Print the receiver BER hierarchy over a mean-photon-number sweep.

Usage: python scripts/ber_hierarchy.py [--s-min 0] [--s-max 10] [--steps 21]
"""

import sys

from alphaeta.cli import main

if __name__ == "__main__":
    sys.exit(main(["ber-table", *sys.argv[1:]]))
