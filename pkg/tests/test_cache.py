from __future__ import annotations

from dataclasses import dataclass, field

import pytest
from hypothesis import given, settings, strategies as st

from smartframe import CodeCache, build_state_key
from smartframe.metadata import initial_metadata

import frames_util as frames


@dataclass
class _Entry:
    query: str
    code: str


@dataclass
class _State:
    metadata: object
    history: list = field(default_factory=list)


def _state(history=(), description="d"):
    metadata = initial_metadata(frames.build_facilities(), description)
    return _State(metadata=metadata, history=[_Entry(q, c) for q, c in history])


TOOLSET = {"pandas", "matplotlib"}
RETURNS = {"int", "list"}


def test_same_inputs_same_key():
    a = build_state_key(_state(), "count rows", TOOLSET, RETURNS)
    b = build_state_key(_state(), "count rows", TOOLSET, RETURNS)
    assert a == b
    assert len(a.digest) == 64 and a.digest == a.digest.lower()


def test_toolset_and_return_types_are_order_insensitive():
    a = build_state_key(_state(), "q", ["pandas", "matplotlib"], ["int", "list"])
    b = build_state_key(_state(), "q", ["matplotlib", "pandas"], ["list", "int"])
    assert a.digest == b.digest


def test_changing_an_earlier_query_changes_the_key():
    history = [("q1", "c1"), ("q2", "c2")]
    base = build_state_key(_state(history), "q3", TOOLSET, RETURNS)
    mutated = build_state_key(
        _state([("q1-changed", "c1"), ("q2", "c2")]), "q3", TOOLSET, RETURNS
    )
    assert base.digest != mutated.digest


@pytest.mark.parametrize("position", [0, 1, 2])
@pytest.mark.parametrize("part", ["query", "code"])
def test_prefix_sensitivity_every_position_and_part(position, part):
    history = [("q1", "c1"), ("q2", "c2"), ("q3", "c3")]
    base = build_state_key(_state(history), "next", TOOLSET, RETURNS)
    mutated_history = list(history)
    q, c = mutated_history[position]
    mutated_history[position] = (q + "*", c) if part == "query" else (q, c + "*")
    mutated = build_state_key(_state(mutated_history), "next", TOOLSET, RETURNS)
    assert base.digest != mutated.digest


def test_metadata_description_enters_the_key():
    a = build_state_key(_state(description="one"), "q", TOOLSET, RETURNS)
    b = build_state_key(_state(description="two"), "q", TOOLSET, RETURNS)
    assert a.digest != b.digest
    assert a.instance != b.instance


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.tuples(st.text(max_size=12), st.text(max_size=12)), max_size=4),
    st.text(min_size=1, max_size=20),
)
def test_key_is_deterministic_for_arbitrary_histories(history, query):
    a = build_state_key(_state(history), query, TOOLSET, RETURNS)
    b = build_state_key(_state(history), query, TOOLSET, RETURNS)
    assert a == b


# ---------------------------------------------------------------------------
# storage
# ---------------------------------------------------------------------------

def test_set_get_round_trip_byte_identical(tmp_path):
    cache = CodeCache(tmp_path)
    key = build_state_key(_state(), "q", TOOLSET, RETURNS)
    code = "def execute(df_1):\n    return 1  # exacté bytes\n"
    cache.set(key, code)
    assert cache.get(key) == code


def test_get_unknown_key_is_a_miss(tmp_path):
    cache = CodeCache(tmp_path)
    key = build_state_key(_state(), "unknown", TOOLSET, RETURNS)
    assert cache.get(key) is None


def test_entries_survive_a_new_cache_instance(tmp_path):
    key = build_state_key(_state(), "q", TOOLSET, RETURNS)
    CodeCache(tmp_path).set(key, "code")
    assert CodeCache(tmp_path).get(key) == "code"


def test_no_temp_files_left_behind(tmp_path):
    cache = CodeCache(tmp_path)
    key = build_state_key(_state(), "q", TOOLSET, RETURNS)
    cache.set(key, "code")
    leftovers = [p for p in tmp_path.rglob("*") if p.name.endswith(".tmp")]
    assert leftovers == []


def test_reset_all_purges_everything(tmp_path):
    cache = CodeCache(tmp_path)
    keys = [
        build_state_key(_state(), f"q{i}", TOOLSET, RETURNS) for i in range(3)
    ]
    for i, key in enumerate(keys):
        cache.set(key, f"code{i}")
    assert cache.reset_all() == 3
    assert all(cache.get(key) is None for key in keys)
    assert cache.entries() == []


def test_instance_scoped_reset_leaves_other_instances_alone(tmp_path):
    cache = CodeCache(tmp_path)
    key_a = build_state_key(_state(description="a"), "q", TOOLSET, RETURNS)
    key_b = build_state_key(_state(description="b"), "q", TOOLSET, RETURNS)
    cache.set(key_a, "code-a")
    cache.set(key_b, "code-b")
    assert cache.reset_instance(key_a.instance) == 1
    assert cache.get(key_a) is None
    assert cache.get(key_b) == "code-b"


def test_reset_keys_removes_exactly_those_keys(tmp_path):
    cache = CodeCache(tmp_path)
    state = _state()
    first = build_state_key(state, "q1", TOOLSET, RETURNS)
    second = build_state_key(state, "q2", TOOLSET, RETURNS)
    cache.set(first, "c1")
    cache.set(second, "c2")
    assert cache.reset_keys([first]) == 1
    assert cache.get(first) is None
    assert cache.get(second) == "c2"


def test_concurrent_writers_and_readers_never_see_partial_writes(tmp_path):
    import threading

    cache = CodeCache(tmp_path)
    key = build_state_key(_state(), "contended", TOOLSET, RETURNS)
    # each writer repeats its own marker; a torn write would mix markers
    payloads = [f"# writer {i}\n" + (f"line-{i}\n" * 200) for i in range(4)]
    seen_bad = []
    stop = threading.Event()

    def writer(payload):
        while not stop.is_set():
            cache.set(key, payload)

    def reader():
        while not stop.is_set():
            value = cache.get(key)
            if value is not None and value not in payloads:
                seen_bad.append(value)

    threads = [threading.Thread(target=writer, args=(p,)) for p in payloads]
    threads += [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    import time

    time.sleep(0.5)
    stop.set()
    for t in threads:
        t.join()
    assert seen_bad == []  # last-writer-wins, never a torn value
    assert cache.get(key) in payloads
