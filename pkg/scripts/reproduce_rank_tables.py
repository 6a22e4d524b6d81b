#!/usr/bin/env python3
"""Score the two built-in worked link matrices with all three ranking
algorithms and print the comparison tables."""

import sys

from trackmine.cli import main

if __name__ == "__main__":
    sys.exit(main(["tables"] + sys.argv[1:]))
