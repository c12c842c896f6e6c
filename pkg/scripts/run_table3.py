#!/usr/bin/env python3
"""Reproduce the translog curvature rejection-rate table (500
replications, 200 posterior draws per cell by default).

Equivalent to `ineqtest --command table3`.
"""

import sys

from ineqtest.cli import main

if __name__ == "__main__":
    sys.exit(main(["--command", "table3", *sys.argv[1:]]))
