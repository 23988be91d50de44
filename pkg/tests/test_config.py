from __future__ import annotations

from pathlib import Path

import pytest

from smartframe import (
    Config,
    ConfigurationError,
    LiveBackend,
    RagBackend,
    ReplayBackend,
    config_from_env,
    configure,
    get_config,
    make_backend,
    use_config,
)


def test_defaults():
    config = Config()
    assert config.backend == "replay"
    assert config.safe_mode is False
    assert config.temperature == 0.0
    assert config.validation_mode == "excerpt"


def test_exactly_one_backend_kind():
    with pytest.raises(ConfigurationError):
        Config(backend="both")


def test_env_mirrors(monkeypatch, tmp_path):
    monkeypatch.setenv("SMARTFRAME_BACKEND", "live")
    monkeypatch.setenv("SMARTFRAME_SAFE_MODE", "true")
    monkeypatch.setenv("SMARTFRAME_CACHE_DIR", str(tmp_path / "c"))
    monkeypatch.setenv("SMARTFRAME_MODEL", "my-model")
    monkeypatch.setenv("SMARTFRAME_TEMPERATURE", "0.7")
    monkeypatch.setenv("SMARTFRAME_MAX_OUTPUT_TOKENS", "2048")
    monkeypatch.setenv("SMARTFRAME_FIXTURES", str(tmp_path / "f"))
    monkeypatch.setenv("SMARTFRAME_CORPUS_DIR", str(tmp_path / "corp"))
    config = config_from_env()
    assert config.backend == "live"
    assert config.safe_mode is True
    assert config.cache_dir == tmp_path / "c"
    assert config.model == "my-model"
    assert config.temperature == 0.7
    assert config.max_output_tokens == 2048
    assert config.fixture_dir == tmp_path / "f"
    assert config.corpus_dir == tmp_path / "corp"


def test_configure_updates_the_active_config(tmp_path):
    with use_config(Config(cache_dir=tmp_path)):
        configure(safe_mode=True)
        assert get_config().safe_mode is True
        assert get_config().cache_dir == Path(tmp_path)


def test_make_backend_resolves_kinds(tmp_path):
    assert isinstance(
        make_backend(Config(backend="replay", fixture_dir=tmp_path)), ReplayBackend
    )
    assert isinstance(make_backend(Config(backend="live")), LiveBackend)
    rag = make_backend(Config(backend="rag"))
    assert isinstance(rag, RagBackend)
    assert isinstance(rag.inner, LiveBackend)


def test_explicit_backend_instance_wins(tmp_path):
    replay = ReplayBackend(tmp_path)
    config = Config(backend="live", backend_instance=replay)
    assert make_backend(config) is replay


def test_backend_params_reflect_config():
    params = Config(model="m2", temperature=0.3).backend_params()
    assert (params.model, params.temperature, params.max_output_tokens) == (
        "m2",
        0.3,
        8192,
    )
