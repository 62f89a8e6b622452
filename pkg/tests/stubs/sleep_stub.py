"""Sleeps long enough to trip a task timeout."""

import argparse
import time

parser = argparse.ArgumentParser()
parser.add_argument("--seconds", type=float, default=10.0)
parser.add_argument("--manifest", required=True)
args = parser.parse_args()

time.sleep(args.seconds)
