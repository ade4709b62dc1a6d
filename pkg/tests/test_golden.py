import importlib.util
from pathlib import Path

import pytest

from faultline import corpus

_SCRIPT = Path(__file__).resolve().parent.parent / "scripts" / "make_goldens.py"
_spec = importlib.util.spec_from_file_location("make_goldens", _SCRIPT)
mg = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(mg)


@pytest.mark.parametrize("name", corpus.names(suite_only=True))
def test_golden_report_is_reproduced(name):
    path = mg.GOLDEN_DIR / f"{name}.json"
    assert path.exists(), "run scripts/make_goldens.py"
    assert mg.dump(mg.golden_for(name)) == path.read_text()
