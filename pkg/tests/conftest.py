import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gada.harness.data import calibrate_verifier, default_model, gen_data  # noqa: E402
from gada.oracle import VerifierConfig  # noqa: E402


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture(scope="session")
def verifier():
    cfg, _ = calibrate_verifier(VerifierConfig())
    return cfg


@pytest.fixture(scope="session")
def small_data(model, verifier):
    return gen_data(0, 6, model=model, verifier=verifier)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def report():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def add(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
