"""Process-wide configuration.

One global Config object controls backend selection, safe mode, the cache
and fixture directories, the active descriptor, and provider parameters.
Every field has an environment-variable mirror (SMARTFRAME_*) so the CLI
flags and library behave identically.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

from .backends import Backend, BackendParams, LiveBackend, ReplayBackend
from .errors import ConfigurationError
from .metadata import Descriptor, PublicDescriptor

ENV_PREFIX = "SMARTFRAME"

BACKEND_KINDS = ("replay", "live", "rag")


def default_cache_dir() -> Path:
    return Path(os.path.expanduser("~/.cache/smartframe"))


@dataclass
class Config:
    """Effective library configuration; exactly one backend kind is active."""

    backend: str = "replay"
    backend_instance: Backend | None = None
    safe_mode: bool = False
    cache_dir: Path = field(default_factory=default_cache_dir)
    fixture_dir: Path = field(default_factory=lambda: Path("fixtures"))
    corpus_dir: Path | None = None
    descriptor: Descriptor = field(default_factory=PublicDescriptor)
    validation_mode: str = "excerpt"
    model: str = "default"
    temperature: float = 0.0
    max_output_tokens: int = 8192
    base_url: str = "http://localhost:8000/v1"
    api_key_env: str = f"{ENV_PREFIX}_API_KEY"
    template_dir: Path | None = None
    ai_module_dir: Path = field(default_factory=lambda: Path("."))
    rag_top_k: int = 3

    def __post_init__(self):
        if self.backend not in BACKEND_KINDS:
            raise ConfigurationError(
                f"backend must be one of {list(BACKEND_KINDS)}, got {self.backend!r}"
            )
        self.cache_dir = Path(self.cache_dir)
        self.fixture_dir = Path(self.fixture_dir)
        if self.corpus_dir is not None:
            self.corpus_dir = Path(self.corpus_dir)
        if self.template_dir is not None:
            self.template_dir = Path(self.template_dir)
        self.ai_module_dir = Path(self.ai_module_dir)

    def backend_params(self) -> BackendParams:
        return BackendParams(
            model=self.model,
            temperature=self.temperature,
            max_output_tokens=self.max_output_tokens,
        )


def _env(name: str) -> str | None:
    return os.environ.get(f"{ENV_PREFIX}_{name}")


def _env_bool(name: str) -> bool | None:
    raw = _env(name)
    if raw is None:
        return None
    return raw.strip().lower() in ("1", "true", "yes", "on")


def config_from_env(base: Config | None = None) -> Config:
    """Overlay SMARTFRAME_* environment variables on a base configuration."""
    config = base if base is not None else Config()
    updates: dict = {}
    if _env("BACKEND"):
        updates["backend"] = _env("BACKEND")
    safe = _env_bool("SAFE_MODE")
    if safe is not None:
        updates["safe_mode"] = safe
    if _env("CACHE_DIR"):
        updates["cache_dir"] = Path(_env("CACHE_DIR"))
    if _env("FIXTURES"):
        updates["fixture_dir"] = Path(_env("FIXTURES"))
    if _env("CORPUS_DIR"):
        updates["corpus_dir"] = Path(_env("CORPUS_DIR"))
    if _env("MODEL"):
        updates["model"] = _env("MODEL")
    if _env("TEMPERATURE"):
        updates["temperature"] = float(_env("TEMPERATURE"))
    if _env("MAX_OUTPUT_TOKENS"):
        updates["max_output_tokens"] = int(_env("MAX_OUTPUT_TOKENS"))
    if _env("BASE_URL"):
        updates["base_url"] = _env("BASE_URL")
    if _env("TEMPLATE_DIR"):
        updates["template_dir"] = Path(_env("TEMPLATE_DIR"))
    if _env("AI_DIR"):
        updates["ai_module_dir"] = Path(_env("AI_DIR"))
    if _env("RAG_TOP_K"):
        updates["rag_top_k"] = int(_env("RAG_TOP_K"))
    return replace(config, **updates) if updates else config


_active: Config | None = None


def get_config() -> Config:
    """The active configuration (created from the environment on first use)."""
    global _active
    if _active is None:
        _active = config_from_env()
    return _active


def set_config(config: Config) -> None:
    global _active
    _active = config


def configure(**updates) -> Config:
    """Update fields on the active configuration; returns the new Config."""
    new = replace(get_config(), **updates)
    set_config(new)
    return new


@contextmanager
def use_config(config: Config):
    """Temporarily install a configuration (restores the previous on exit)."""
    global _active
    previous = _active
    _active = config
    try:
        yield config
    finally:
        _active = previous


def make_backend(config: Config) -> Backend:
    """Resolve the configured backend to an instance.

    An explicit backend_instance always wins; otherwise the kind selects a
    replay, live, or RAG-wrapped-live backend.
    """
    if config.backend_instance is not None:
        return config.backend_instance
    if config.backend == "replay":
        return ReplayBackend(config.fixture_dir)
    if config.backend == "live":
        return LiveBackend(config.base_url, api_key_env=config.api_key_env)
    if config.backend == "rag":
        from .corpus import CorpusIndex, RagBackend

        index = (
            CorpusIndex.build(config.corpus_dir)
            if config.corpus_dir is not None
            else CorpusIndex.bundled()
        )
        inner = LiveBackend(config.base_url, api_key_env=config.api_key_env)
        return RagBackend(inner, index, top_k=config.rag_top_k)
    raise ConfigurationError(f"unknown backend kind {config.backend!r}")
