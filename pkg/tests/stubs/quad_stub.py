"""Synthetic objective: f = -(x - 0.7)^2 over the x parameter."""

import argparse
import json
import pathlib

parser = argparse.ArgumentParser()
parser.add_argument("--manifest", required=True)
args = parser.parse_args()

manifest = json.loads(pathlib.Path(args.manifest).read_text())
x = float(manifest["params"]["x"])
value = -((x - 0.7) ** 2)
out = pathlib.Path(manifest["output_dir"]) / "result.json"
out.write_text(json.dumps({"outputs": {}, "metrics": {"f": value}}))
