from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tsbench.core import Dataset  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def seasonal_dataset():
    t = np.arange(600)
    a = np.sin(2 * np.pi * t / 24) + 0.001 * t
    b = np.cos(2 * np.pi * t / 24) + 0.1 * np.sin(t / 7.0)
    return Dataset.from_array("synthetic", np.column_stack([a, b]), seasonal_period=24,
                              frequency_label="hourly", channel_names=["a", "b"])


def write_csv(path: Path, header, rows) -> Path:
    lines = [",".join(header)] + [",".join(str(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
