import pytest

from qtradeoff.config import ConfigError, load_config, optimizer_config


@pytest.fixture
def settings_file(tmp_path):
    def write(text):
        path = tmp_path / "settings.yaml"
        path.write_text(text)
        return str(path)
    return write


def test_packaged_defaults():
    settings = load_config()
    assert settings["optimizer"]["restarts"] == 64
    assert settings["optimizer"]["tol"] == 1e-9
    assert settings["verify"]["samples"] == 1000
    assert settings["verify"]["tol_inequality"] == 1e-8
    assert settings["verify"]["optimizer"]["restarts"] == 8
    assert settings["sweep"]["steps"] == 181


def test_user_file_is_merged(settings_file):
    settings = load_config(settings_file("optimizer:\n  restarts: 10\nverify:\n  optimizer:\n    restarts: 3\n"))
    assert settings["optimizer"]["restarts"] == 10
    assert settings["optimizer"]["max_iters"] == 2000
    assert settings["verify"]["optimizer"]["restarts"] == 3
    assert settings["verify"]["optimizer"]["restarts_per_dim"] == 4


def test_empty_user_file(settings_file):
    assert load_config(settings_file("")) == load_config()


def test_unknown_section(settings_file):
    with pytest.raises(ConfigError, match="unknown settings sections"):
        load_config(settings_file("broker:\n  port: 4003\n"))


def test_malformed_yaml(settings_file):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(settings_file("optimizer: [unclosed\n"))


def test_top_level_must_be_mapping(settings_file):
    with pytest.raises(ConfigError, match="mapping"):
        load_config(settings_file("- 1\n- 2\n"))


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/settings.yaml")


def test_optimizer_config_overrides():
    cfg = optimizer_config(load_config(), restarts=5, seed=None)
    assert cfg.restarts == 5
    assert cfg.seed == 42
    assert cfg.bloch_grid == (721, 1441)


def test_optimizer_config_rejects_bad_values():
    with pytest.raises(ConfigError, match="bad optimizer settings"):
        optimizer_config({"optimizer": {"learning_rate": 0.1}})
    with pytest.raises(ConfigError, match="restarts"):
        optimizer_config({}, restarts=0)
