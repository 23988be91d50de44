"""Operational command line: cache management, corpus indexing, config display.

Exit codes: 0 success, 1 user error, 2 I/O error. Every flag has an
environment-variable mirror (SMARTFRAME_*); flags win over the environment.
The CLI never touches anything outside the configured cache, corpus, and
fixture directories.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .cache import CodeCache
from .config import Config, config_from_env
from .corpus import CorpusIndex, parse_example_file
from .errors import CacheError, CorpusFormatError, SmartFrameError

EXIT_OK = 0
EXIT_USER = 1
EXIT_IO = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smartframe",
        description="Manage the smartframe cache, corpus index, and configuration.",
    )
    parser.add_argument("--cache-dir", help="Cache directory (SMARTFRAME_CACHE_DIR).")
    parser.add_argument("--corpus-dir", help="Corpus directory (SMARTFRAME_CORPUS_DIR).")
    parser.add_argument("--fixtures", help="Replay fixture directory (SMARTFRAME_FIXTURES).")
    parser.add_argument(
        "--backend",
        choices=["replay", "live", "rag"],
        help="Backend kind (SMARTFRAME_BACKEND).",
    )
    parser.add_argument(
        "--safe-mode",
        action="store_true",
        default=None,
        help="Never execute generated code automatically (SMARTFRAME_SAFE_MODE).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    reset = sub.add_parser("cache-reset", help="Remove cached generations.")
    reset.add_argument(
        "--scope",
        choices=["global"],
        default="global",
        help="Reset scope; only the global purge is addressable offline.",
    )
    reset.add_argument(
        "--instance",
        help="Restrict the reset to one instance digest (cache subdirectory).",
    )

    index = sub.add_parser("corpus-index", help="Validate and index a corpus directory.")
    index.add_argument(
        "path",
        nargs="?",
        help="Corpus directory; defaults to the configured corpus dir.",
    )

    sub.add_parser("config-show", help="Print the effective configuration.")
    return parser


def _effective_config(args: argparse.Namespace) -> Config:
    config = config_from_env()
    updates = {}
    if args.cache_dir:
        updates["cache_dir"] = Path(args.cache_dir)
    if args.corpus_dir:
        updates["corpus_dir"] = Path(args.corpus_dir)
    if args.fixtures:
        updates["fixture_dir"] = Path(args.fixtures)
    if args.backend:
        updates["backend"] = args.backend
    if args.safe_mode is not None:
        updates["safe_mode"] = args.safe_mode
    return replace(config, **updates) if updates else config


def cmd_cache_reset(config: Config, instance: str | None) -> int:
    cache = CodeCache(config.cache_dir)
    try:
        removed = (
            cache.reset_instance(instance) if instance else cache.reset_all()
        )
    except CacheError as exc:
        print(f"cache reset failed: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{removed} removed")
    return EXIT_OK


def cmd_corpus_index(config: Config, path: str | None) -> int:
    directory = Path(path) if path else config.corpus_dir
    if directory is None:
        print("no corpus directory given or configured", file=sys.stderr)
        return EXIT_USER
    if not directory.is_dir():
        print(f"corpus directory not found: {directory}", file=sys.stderr)
        return EXIT_USER

    malformed: list[str] = []
    valid = []
    for file in sorted(directory.iterdir()):
        if not (file.is_file() and file.suffix in (".md", ".txt")):
            continue
        try:
            valid.append(parse_example_file(file))
        except CorpusFormatError as exc:
            malformed.append(f"{file.name}: {exc}")
    if malformed:
        print("malformed corpus files:", file=sys.stderr)
        for line in malformed:
            print(f"  {line}", file=sys.stderr)
        return EXIT_USER

    index = CorpusIndex(valid)
    try:
        index.save(directory / "corpus.index.json")
    except OSError as exc:
        print(f"could not write index: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"indexed {len(index)}")
    return EXIT_OK


def cmd_config_show(config: Config) -> int:
    api_key = os.environ.get(config.api_key_env, "")
    rows = [
        ("backend", config.backend),
        ("safe_mode", config.safe_mode),
        ("cache_dir", config.cache_dir),
        ("fixture_dir", config.fixture_dir),
        ("corpus_dir", config.corpus_dir if config.corpus_dir else "(bundled)"),
        ("descriptor", type(config.descriptor).__name__),
        ("validation_mode", config.validation_mode),
        ("model", config.model),
        ("temperature", config.temperature),
        ("max_output_tokens", config.max_output_tokens),
        ("base_url", config.base_url),
        ("api_key", "****" if api_key else "(unset)"),
        ("template_dir", config.template_dir if config.template_dir else "(bundled)"),
        ("ai_module_dir", config.ai_module_dir),
        ("rag_top_k", config.rag_top_k),
    ]
    for name, value in rows:
        print(f"{name}: {value}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _effective_config(args)
    except SmartFrameError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USER

    if args.command == "cache-reset":
        return cmd_cache_reset(config, args.instance)
    if args.command == "corpus-index":
        return cmd_corpus_index(config, args.path)
    if args.command == "config-show":
        return cmd_config_show(config)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
