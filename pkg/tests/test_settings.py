import json

import pytest

from core.domain import FLOATS, INTEGERS, POLYNOMIALS, IntPoly
from core.errors import ConfigError, InvalidSpecError
from utils.settings import EngineSettings, SettingsManager, worker_override
from utils.text_utils import format_element, format_vector, parse_worker_counts


def test_missing_file_gives_defaults(tmp_path):
    manager = SettingsManager(str(tmp_path / "settings.json"))
    settings = manager.load_settings()
    assert settings == EngineSettings()
    assert settings.worker_counts == [1, 2, 4, 8]
    assert settings.repetitions == 3


def test_save_and_load(tmp_path):
    path = tmp_path / "settings.json"
    manager = SettingsManager(str(path))
    manager.update(topology_mode="shared_queue", granularity=64)
    assert json.loads(path.read_text())["granularity"] == 64
    reloaded = SettingsManager(str(path)).load_settings()
    assert reloaded.topology_mode == "shared_queue"
    assert reloaded.granularity == 64


@pytest.mark.parametrize("content", [
    '{"repetitions": 2}',
    '{"leaf_order": 24}',
    '{"worker_counts": [4, 2]}',
    '{"prime_bits": 70}',
    '{"topology_mode": "ring"}',
    'not json',
])
def test_invalid_files(tmp_path, content):
    path = tmp_path / "settings.json"
    path.write_text(content)
    with pytest.raises(ConfigError):
        SettingsManager(str(path)).load_settings()


def test_invalid_update(tmp_path):
    with pytest.raises(ConfigError):
        SettingsManager(str(tmp_path / "s.json")).update(granularity=0)


def test_worker_override(monkeypatch):
    monkeypatch.delenv("PYQUADMAT_WORKERS", raising=False)
    assert worker_override() is None
    monkeypatch.setenv("PYQUADMAT_WORKERS", "4")
    assert worker_override() == 4
    monkeypatch.setenv("PYQUADMAT_WORKERS", "0")
    with pytest.raises(ConfigError):
        worker_override()


def test_parse_worker_counts():
    assert parse_worker_counts("1,2,4") == [1, 2, 4]
    assert parse_worker_counts(" 8 ") == [8]
    for bad in ("", "1,x", "0,1", "4,2", "2,2"):
        with pytest.raises(InvalidSpecError):
            parse_worker_counts(bad)


def test_formatting():
    assert format_element(INTEGERS, -3) == "-3"
    assert format_element(FLOATS, 0.25) == "0.25"
    assert format_vector(INTEGERS, [1, 0, -2]) == "1 0 -2"
    assert format_vector(POLYNOMIALS, [IntPoly([1, 1]), IntPoly()]) == "[x + 1] [0]"
