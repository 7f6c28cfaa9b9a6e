import sys
from pathlib import Path

import pytest

from qudiff.scenarios import get_scenario

# Make the sibling oracle/factory modules importable regardless of how
# pytest assembles sys.path.
sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture()
def fig1():
    return get_scenario("fig1")


@pytest.fixture()
def fig9():
    return get_scenario("fig9")


@pytest.fixture()
def fig10():
    return get_scenario("fig10")
