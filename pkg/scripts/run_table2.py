#!/usr/bin/env python3
"""Reproduce the dominance rejection-rate table (1000 replications per
cell at alpha = 0.1 by default; takes a few minutes).

Equivalent to `ineqtest --command table2`.
"""

import sys

from ineqtest.cli import main

if __name__ == "__main__":
    sys.exit(main(["--command", "table2", *sys.argv[1:]]))
