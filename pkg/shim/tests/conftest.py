import pytest

from cellrw_shim import SessionState


@pytest.fixture
def session(tmp_path):
    # generous timeout: the suite must not flake on a slow interpreter start
    return SessionState(history_path=str(tmp_path / "history.py"), timeout=15.0)
