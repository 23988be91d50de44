"""Replay-level checks of the recorded tutorial beyond the acceptance gates:
fixture identity of the refinement chain, the inspect listing shape, the
export side effect, whole-run replay determinism, and cache entry bounds."""

from __future__ import annotations

import filecmp

from smartframe import CodeCache, Config, InstrumentedBackend, ReplayBackend

import frames_util as frames
import scripted_util as scripted


def _replay(tutorial_fixture_dir, root):
    cache = root / "cache"
    work = root / "work"
    work.mkdir(parents=True, exist_ok=True)
    config = scripted.replay_config(tutorial_fixture_dir, cache, work)
    with scripted.working_directory(work):
        result = scripted.run_tutorial(config)
        listing = scripted.run_listing_1(config)
    return result, listing, config, work


def test_highways_refinement_chain_reaches_the_scrollable_fixture(
    tutorial_fixture_dir, tmp_path
):
    result, _, _, _ = _replay(tutorial_fixture_dir, tmp_path)
    highways = result["highways"]
    assert len(highways.state.history) == 3
    assert highways.state.history[2].code == scripted.HIGHWAYS_PLOT_V3
    assert highways.state.history[0].code == scripted.HIGHWAYS_PLOT_V1
    # every roads step auto-executed to a figure
    for step in result["roads_results"]:
        assert step.output.kind == "figure"


def test_inspect_renders_the_flooded_conversation(tutorial_fixture_dir, tmp_path):
    result, _, _, _ = _replay(tutorial_fixture_dir, tmp_path)
    transcript = result["facilities"].inspect()
    assert transcript.startswith("Prompt 1: Add a Flooded column")
    assert "Code 1:" in transcript
    assert "def execute(df_1, df_2):" in transcript


def test_export_step_is_side_effect_only(tutorial_fixture_dir, tmp_path):
    result, _, _, work = _replay(tutorial_fixture_dir, tmp_path)
    export = result["export_result"]
    assert export.output.kind == "none"
    assert export.output.value is None
    exported = work / "Out" / "floodedSchools.gpkg"
    assert exported.exists()
    text = exported.read_text()
    # only flooded facilities were exported
    flooded_names = [
        row[0]
        for row, flag in zip(frames.FACILITY_ROWS, frames.oracle_flooded_flags())
        if flag
    ]
    dry_names = [
        row[0]
        for row, flag in zip(frames.FACILITY_ROWS, frames.oracle_flooded_flags())
        if not flag
    ]
    assert all(name in text for name in flooded_names)
    assert all(name not in text for name in dry_names)


def test_full_replay_is_deterministic(tutorial_fixture_dir, tmp_path):
    first, listing_a, config_a, work_a = _replay(
        tutorial_fixture_dir, tmp_path / "run-a"
    )
    second, listing_b, config_b, work_b = _replay(
        tutorial_fixture_dir, tmp_path / "run-b"
    )

    def histories(result, listing):
        stib = listing[0]
        collected = {}
        for name in ("flooded", "facilities", "highways"):
            collected[name] = [
                (e.query, e.code, e.cache_key) for e in result[name].state.history
            ]
        collected["stib"] = [
            (e.query, e.code, e.cache_key) for e in stib.state.history
        ]
        return collected

    assert histories(first, listing_a) == histories(second, listing_b)

    # cache contents are byte-identical
    entries_a = CodeCache(config_a.cache_dir).entries()
    entries_b = CodeCache(config_b.cache_dir).entries()
    assert entries_a == entries_b and entries_a
    for instance, digest in entries_a:
        assert (config_a.cache_dir / instance / digest).read_bytes() == (
            config_b.cache_dir / instance / digest
        ).read_bytes()

    # injected modules are byte-identical
    with scripted.working_directory(work_a):
        path_a = listing_a[0].inject("plot_network")
    with scripted.working_directory(work_b):
        path_b = listing_b[0].inject("plot_network")
    assert filecmp.cmp(path_a, path_b, shallow=False)

    # exported files are byte-identical
    assert (work_a / "Out" / "floodedSchools.gpkg").read_bytes() == (
        work_b / "Out" / "floodedSchools.gpkg"
    ).read_bytes()


def test_cache_entries_stay_under_the_output_budget(
    tutorial_fixture_dir, tmp_path
):
    # 8192 output tokens at ~4 chars/token bound a snippet at 32768 chars
    _, _, config, _ = _replay(tutorial_fixture_dir, tmp_path)
    cache = CodeCache(config.cache_dir)
    entries = cache.entries()
    assert entries
    for instance, digest in entries:
        size = (config.cache_dir / instance / digest).stat().st_size
        assert size <= 32768


def test_replay_makes_no_type_calls_on_cache_hits(tutorial_fixture_dir, tmp_path):
    # first replay warms the cache; a second one answers without any backend
    _replay(tutorial_fixture_dir, tmp_path)
    spy = InstrumentedBackend(ReplayBackend(tutorial_fixture_dir))
    config = Config(
        backend_instance=spy,
        cache_dir=tmp_path / "cache",
        fixture_dir=tutorial_fixture_dir,
        ai_module_dir=tmp_path / "work",
    )
    with scripted.working_directory(tmp_path / "work"):
        scripted.run_tutorial(config)
    assert spy.call_count == 0
