import json
import os
import sys
from pathlib import Path

import pytest

from chipgravity.cli import main

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

sys.path.insert(0, str(Path(__file__).resolve().parent))


def run_cli(experiment, config, out, *extra):
    """Run one CLI invocation in-process; returns (exit code, summary dict or None)."""
    code = main([experiment, "--config", str(config), "--out", str(out), *extra])
    path = os.path.join(out, "summary.json")
    summary = None
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            summary = json.load(fh)
    return code, summary


@pytest.fixture
def cli(tmp_path):
    def invoke(experiment, config, *extra, out=None):
        return run_cli(experiment, config, out or tmp_path / "out", *extra)
    return invoke


@pytest.fixture
def write_config(tmp_path):
    def write(text, name="run.toml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write
