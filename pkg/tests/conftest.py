import json

import pytest

from cellrw import builtin_rules
from helpers import DATA


@pytest.fixture
def registry():
    return builtin_rules()


@pytest.fixture(scope="session")
def passthrough_cells():
    with open(DATA / "passthrough_cells.json") as f:
        cells = json.load(f)
    assert len(cells) >= 50
    return cells
