#!/usr/bin/env python3
"""Reproduce the fixed-design dominance table (p-values and posteriors).

Equivalent to `ineqtest --command table1`; kept as a script so the table
can be regenerated with one call and tweaked in place.
"""

import sys

from ineqtest.cli import main

if __name__ == "__main__":
    sys.exit(main(["--command", "table1", *sys.argv[1:]]))
