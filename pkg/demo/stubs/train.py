"""Training stand-in: records the chosen model variant and learning rate."""

import argparse
import json
import pathlib

parser = argparse.ArgumentParser()
parser.add_argument("--model", required=True)
parser.add_argument("--manifest", required=True)
args = parser.parse_args()

manifest = json.loads(pathlib.Path(args.manifest).read_text())
out_dir = pathlib.Path(manifest["output_dir"])
(out_dir / "model.json").write_text(
    json.dumps({"model": args.model, "lr": manifest["params"]["lr"]})
)
(out_dir / "result.json").write_text(
    json.dumps({"outputs": {"model": "model.json"}, "metrics": {}})
)
