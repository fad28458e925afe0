import os
from pathlib import Path

import numpy as np
import pytest

from vawmkl.rff import Family, KernelSpec

DATA_DIR = Path(os.environ.get("VAWMKL_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))

_acceptance_lines: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def _report(criterion: str, ok: bool, detail: str = "") -> bool:
        _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f": {detail}" if detail else ""))
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gauss():
    return KernelSpec(Family.GAUSSIAN, 1.0)


@pytest.fixture
def laplace():
    return KernelSpec(Family.LAPLACIAN, 1.0)
