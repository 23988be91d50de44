from __future__ import annotations

from smartframe import CodeCache, build_state_key
from smartframe.cli import main
from smartframe.metadata import initial_metadata

import frames_util as frames


def _populate_cache(cache_dir, n=3):
    from types import SimpleNamespace

    cache = CodeCache(cache_dir)
    metadata = initial_metadata(frames.build_facilities(), "cli test")
    state = SimpleNamespace(metadata=metadata, history=[])
    keys = []
    for i in range(n):
        key = build_state_key(state, f"q{i}", {"pandas"}, {"int"})
        cache.set(key, f"code {i}")
        keys.append(key)
    return keys


# ---------------------------------------------------------------------------
# cache-reset
# ---------------------------------------------------------------------------

def test_cache_reset_on_empty_cache(tmp_path, capsys):
    code = main(["--cache-dir", str(tmp_path / "cache"), "cache-reset"])
    assert code == 0
    assert "0 removed" in capsys.readouterr().out


def test_cache_reset_counts_entries(tmp_path, capsys):
    cache_dir = tmp_path / "cache"
    _populate_cache(cache_dir, 3)
    code = main(["--cache-dir", str(cache_dir), "cache-reset"])
    assert code == 0
    assert "3 removed" in capsys.readouterr().out
    assert CodeCache(cache_dir).entries() == []


def test_cache_reset_io_failure_exits_2(tmp_path, capsys, monkeypatch):
    cache_dir = tmp_path / "cache"
    _populate_cache(cache_dir, 1)
    import shutil

    def broken_rmtree(*args, **kwargs):
        raise OSError("disk says no")

    monkeypatch.setattr(shutil, "rmtree", broken_rmtree)
    code = main(["--cache-dir", str(cache_dir), "cache-reset"])
    assert code == 2
    assert "disk says no" in capsys.readouterr().err


def test_cache_reset_instance_scope(tmp_path, capsys):
    cache_dir = tmp_path / "cache"
    keys = _populate_cache(cache_dir, 2)
    code = main(
        [
            "--cache-dir",
            str(cache_dir),
            "cache-reset",
            "--instance",
            keys[0].instance,
        ]
    )
    assert code == 0
    assert "2 removed" in capsys.readouterr().out  # same instance for both


# ---------------------------------------------------------------------------
# corpus-index
# ---------------------------------------------------------------------------

VALID_EXAMPLE = "---\ntask: Do something useful\ntags: [pandas]\n---\ncode here\n"


def test_corpus_index_counts_valid_files(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for i in range(3):
        (corpus / f"example-{i}.md").write_text(VALID_EXAMPLE)
    code = main(["corpus-index", str(corpus)])
    assert code == 0
    assert "indexed 3" in capsys.readouterr().out
    assert (corpus / "corpus.index.json").exists()


def test_corpus_index_empty_directory(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    assert main(["corpus-index", str(corpus)]) == 0
    assert "indexed 0" in capsys.readouterr().out


def test_corpus_index_lists_malformed_files(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "good.md").write_text(VALID_EXAMPLE)
    (corpus / "bad.md").write_text("no front matter\n")
    code = main(["corpus-index", str(corpus)])
    assert code == 1
    err = capsys.readouterr().err
    assert "bad.md" in err
    assert "good.md" not in err


def test_corpus_index_missing_directory_is_user_error(tmp_path, capsys):
    assert main(["corpus-index", str(tmp_path / "nope")]) == 1


# ---------------------------------------------------------------------------
# config-show
# ---------------------------------------------------------------------------

def test_config_show_defaults_to_replay(capsys, monkeypatch):
    monkeypatch.delenv("SMARTFRAME_BACKEND", raising=False)
    assert main(["config-show"]) == 0
    out = capsys.readouterr().out
    assert "backend: replay" in out
    assert "api_key: (unset)" in out


def test_config_show_reflects_env_override(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("SMARTFRAME_CACHE_DIR", str(tmp_path / "elsewhere"))
    assert main(["config-show"]) == 0
    assert str(tmp_path / "elsewhere") in capsys.readouterr().out


def test_config_show_masks_credentials(capsys, monkeypatch):
    monkeypatch.setenv("SMARTFRAME_API_KEY", "super-secret-token")
    assert main(["config-show"]) == 0
    out = capsys.readouterr().out
    assert "****" in out
    assert "super-secret-token" not in out


def test_cli_flags_override_env(capsys, monkeypatch):
    monkeypatch.setenv("SMARTFRAME_BACKEND", "replay")
    assert main(["--backend", "live", "config-show"]) == 0
    assert "backend: live" in capsys.readouterr().out
