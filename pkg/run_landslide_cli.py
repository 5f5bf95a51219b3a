#!/usr/bin/env python3
import sys

from landslide_cli import run_cli

if __name__ == "__main__":
    sys.exit(run_cli(sys.argv[1:]))
