"""Task stub that succeeds with no outputs or metrics."""

import argparse
import json
import pathlib

parser = argparse.ArgumentParser()
parser.add_argument("--manifest", required=True)
args = parser.parse_args()

manifest = json.loads(pathlib.Path(args.manifest).read_text())
out = pathlib.Path(manifest["output_dir"]) / "result.json"
out.write_text(json.dumps({"outputs": {}, "metrics": {}}))
