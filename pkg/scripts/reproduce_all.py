#!/usr/bin/env python3
"""Run every named claim suite and write evidence CSVs.

Usage: python scripts/reproduce_all.py [--seed N] [--out DIR]
Exit code 0 if every suite passes, 1 otherwise.
"""

import argparse
import sys

from oddoneout.cli import main as cli_main


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="results/suites")
    args = parser.parse_args()
    sys.exit(cli_main(["reproduce", "all", "--seed", str(args.seed), "--out", args.out]))
