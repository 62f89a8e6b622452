"""Evaluation stand-in: fixed accuracy table keyed by (model, lr)."""

import argparse
import json
import pathlib

TABLE = {
    ("snn", "0.001"): 0.62,
    ("snn", "0.01"): 0.70,
    ("snn", "0.1"): 0.55,
    ("rnn", "0.001"): 0.74,
    ("rnn", "0.01"): 0.81,
    ("rnn", "0.1"): 0.66,
    ("cnn", "0.001"): 0.78,
    ("cnn", "0.01"): 0.88,
    ("cnn", "0.1"): 0.72,
}

parser = argparse.ArgumentParser()
parser.add_argument("--manifest", required=True)
args = parser.parse_args()

manifest = json.loads(pathlib.Path(args.manifest).read_text())
out_dir = pathlib.Path(manifest["output_dir"])
model_file = out_dir.parent / "train_model" / "model.json"
model = json.loads(model_file.read_text())
accuracy = TABLE[(model["model"], format(model["lr"], "g"))]
(out_dir / "result.json").write_text(
    json.dumps({"outputs": {}, "metrics": {"accuracy": accuracy}})
)
