"""Exits with the requested code after complaining on stderr."""

import argparse
import sys

parser = argparse.ArgumentParser()
parser.add_argument("--code", type=int, default=1)
parser.add_argument("--manifest", required=True)
args = parser.parse_args()

print(f"deliberate failure, exiting {args.code}", file=sys.stderr)
sys.exit(args.code)
