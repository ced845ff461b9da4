import json

import pytest

from src.core.errors import InvalidPrior, ValidationError
from src.db.data_store import (
    RunSettings,
    get_default_settings_path,
    load_run_settings,
    save_run_settings,
)


def test_defaults_without_path():
    settings = load_run_settings(None)

    assert settings.estimation.prior == "acp"
    assert settings.forecast.horizon == 13
    assert settings.forecast.quantiles == [5, 16, 50, 84, 95]
    settings.validate()


def test_default_path_is_bundled_settings():
    assert get_default_settings_path().name == "settings.json"


def test_save_and_load_roundtrip(tmp_path):
    settings = RunSettings()
    settings.estimation.prior = "niw"
    settings.estimation.kappa1 = 0.1
    settings.data.start = "1976Q3"
    path = tmp_path / "settings.json"

    assert save_run_settings(settings, path)
    loaded = load_run_settings(path)

    assert loaded.estimation.prior == "niw"
    assert loaded.estimation.kappa1 == 0.1
    assert loaded.data.start == "1976Q3"
    assert loaded.to_dict() == settings.to_dict()


def test_nested_lists_are_typed(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(
        json.dumps(
            {
                "bench": {"configs": [{"n": 8, "p": 2, "h": 5, "n_o": 3}]},
                "data": {"series": [{"mnemonic": "GS10", "transformation": "level"}]},
            }
        ),
        encoding="utf-8",
    )

    settings = load_run_settings(path)

    assert settings.bench.configs[0].n_o == 3
    assert settings.data.series[0].mnemonic == "GS10"


def test_validate_rejects_bad_sections():
    settings = RunSettings()
    settings.estimation.prior = "flat"
    with pytest.raises(InvalidPrior):
        settings.validate()

    settings = RunSettings()
    settings.forecast.quantiles = [50, 16]
    with pytest.raises(ValidationError):
        settings.validate()


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"forecast": {"horizons": 4}}), encoding="utf-8")

    with pytest.raises(ValidationError):
        load_run_settings(path)
