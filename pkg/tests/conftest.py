"""Shared fixtures: the 5-task predictive-maintenance experiment and stubs."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

from xpengine.dsl import parse_experiment
from xpengine.storage import RunStore

STUBS = Path(__file__).parent / "stubs"
PY = sys.executable

# accuracy per (model, lr) emitted by eval_stub.py; winner is cnn @ 0.01
STUB_TABLE = {
    ("snn", 0.001): 0.62,
    ("snn", 0.01): 0.70,
    ("snn", 0.1): 0.55,
    ("rnn", 0.001): 0.74,
    ("rnn", 0.01): 0.81,
    ("rnn", 0.1): 0.66,
    ("cnn", 0.001): 0.78,
    ("cnn", 0.01): 0.88,
    ("cnn", 0.1): 0.72,
}


def stub(name: str, *args: str) -> str:
    parts = [PY, str(STUBS / name), *args]
    return " ".join(parts)


def fixture_source(
    data_dir: Path,
    name: str = "predictive_maintenance",
    strategy: str = "strategy grid;",
    extra_sections: str = "",
) -> str:
    """DSL source for the canonical 5-task chain with 3 models x 3 rates."""
    data_dir.mkdir(parents=True, exist_ok=True)
    raw = data_dir / "sensor.csv"
    if not raw.exists():
        raw.write_text("t,v\n1,0.5\n2,0.7\n")
    models = ", ".join(f'"{stub("train_stub.py", "--model", m)}"' for m in ("snn", "rnn", "cnn"))
    return f"""
experiment {name} {{
  intent maximize accuracy;
  workflow {{
    task read_data impl "{stub('pass_stub.py')}" inputs (raw = "{raw}");
    task add_padding impl "{stub('pass_stub.py')}";
    task split_data impl "{stub('pass_stub.py')}";
    task train_model abstract params (lr = 0.01);
    task evaluate_model impl "{stub('eval_stub.py')}";
    read_data -> add_padding -> split_data -> train_model -> evaluate_model;
  }}
  variability {{
    vp model: impl(train_model) in {{{models}}};
    vp learning_rate: param(train_model.lr) in {{0.001, 0.01, 0.1}};
  }}
  {strategy}
  metrics {{
    metric accuracy output(evaluate_model);
  }}
{extra_sections}}}
"""


def parse_fixture(data_dir: Path, **kwargs):
    spec = parse_experiment(fixture_source(data_dir, **kwargs))
    assert not isinstance(spec, list), f"fixture source failed to parse: {spec}"
    return spec


@pytest.fixture
def store(tmp_path: Path) -> RunStore:
    return RunStore(tmp_path / "store")


@pytest.fixture
def fixture_spec(tmp_path: Path):
    return parse_fixture(tmp_path / "data")
