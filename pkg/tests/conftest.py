from __future__ import annotations

import matplotlib

matplotlib.use("Agg", force=True)

import pytest

from smartframe import Config, reset_counters, use_config

import scripted_util


@pytest.fixture(autouse=True)
def _isolated_config(tmp_path):
    """Every test runs with a fresh config rooted in its own tmp directories."""
    config = Config(
        cache_dir=tmp_path / "cache",
        fixture_dir=tmp_path / "fixtures",
        ai_module_dir=tmp_path,
    )
    reset_counters()
    with use_config(config):
        yield config


@pytest.fixture(scope="session")
def tutorial_fixture_dir(tmp_path_factory):
    """Replay fixtures for Listing 1 and the flooded-areas tutorial,
    recorded once per session from the scripted answers."""
    fixture_dir = tmp_path_factory.mktemp("tutorial-fixtures")
    scratch = tmp_path_factory.mktemp("tutorial-recording")
    scripted_util.record_tutorial_fixtures(fixture_dir, scratch)
    return fixture_dir
