"""Persistent, content-addressed cache over generated code.

The cache key digests the canonical serialization of everything that drives
a generation step: the previous state's metadata digest (automated metadata,
user description, and linked summaries), the full prior history of
(query, code) pairs in order, the new query, and the sorted toolset and
return-type sets. Raw frame rows never enter the key; they are represented
through the automated metadata.

Storage is one file per key (filename = key digest) grouped under a
per-instance subdirectory, written atomically via write-then-rename. There
is no eviction policy; only explicit resets remove entries.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import CacheError
from .metadata import instance_digest, metadata_digest

KEY_VERSION = 1


@dataclass(frozen=True)
class CacheKey:
    """Deterministic digest of one generation step, plus its instance scope."""

    digest: str
    instance: str


def build_state_key(prev, query: str, toolset, return_types) -> CacheKey:
    """Build the cache key for generating code from state ``prev`` and ``query``.

    ``prev`` is a state snapshot exposing ``metadata`` (FrameMetadata) and
    ``history`` (entries with ``query`` and ``code``). The key is
    order-insensitive in toolset and return types (sets) and order-sensitive
    in the history.
    """
    payload = {
        "version": KEY_VERSION,
        "metadata": metadata_digest(prev.metadata),
        "history": [[entry.query, entry.code] for entry in prev.history],
        "query": query,
        "toolset": sorted(toolset),
        "return_types": sorted(return_types),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(
        bytes([KEY_VERSION]) + blob.encode("utf-8")
    ).hexdigest()
    return CacheKey(digest=digest, instance=instance_digest(prev.metadata))


class CodeCache:
    """File-backed get/set store, safe for concurrent processes.

    Writes are atomic (write to a temp name, then rename); reads are
    lock-free; last writer wins.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def _path(self, key: CacheKey) -> Path:
        return self.root / key.instance / key.digest

    def get(self, key: CacheKey) -> str | None:
        """Exact bytes stored by the latest set for this key, or None."""
        path = self._path(key)
        try:
            return path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        except OSError as exc:
            raise CacheError(f"cache read failed for {path}: {exc}") from exc

    def set(self, key: CacheKey, code: str) -> None:
        """Store code under the key atomically (write-then-rename)."""
        path = self._path(key)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            # unique per call so concurrent writers (same process included)
            # never share a temp file; the final rename is last-writer-wins
            tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex}.tmp")
            tmp.write_text(code, encoding="utf-8")
            os.replace(tmp, path)
        except OSError as exc:
            raise CacheError(f"cache write failed for {path}: {exc}") from exc

    # --- resets ---

    def reset_keys(self, keys: Iterable[CacheKey]) -> int:
        """Remove specific keys; missing entries are skipped. Returns count."""
        removed = 0
        for key in keys:
            path = self._path(key)
            try:
                path.unlink()
                removed += 1
            except FileNotFoundError:
                pass
            except OSError as exc:
                raise CacheError(f"cache delete failed for {path}: {exc}") from exc
        return removed

    @staticmethod
    def _is_entry(path: Path) -> bool:
        # dotted names are in-flight temp files, not entries
        return path.is_file() and not path.name.startswith(".")

    def reset_instance(self, instance: str) -> int:
        """Remove every key of one instance digest. Returns count removed."""
        directory = self.root / instance
        if not directory.is_dir():
            return 0
        count = sum(1 for p in directory.iterdir() if self._is_entry(p))
        try:
            shutil.rmtree(directory)
        except OSError as exc:
            raise CacheError(f"cache reset failed for {directory}: {exc}") from exc
        return count

    def reset_all(self) -> int:
        """Empty the whole cache directory. Returns count of entries removed."""
        if not self.root.is_dir():
            return 0
        count = 0
        errors: list[str] = []
        for sub in sorted(self.root.iterdir()):
            if sub.is_dir():
                count += sum(1 for p in sub.iterdir() if self._is_entry(p))
                try:
                    shutil.rmtree(sub)
                except OSError as exc:  # best-effort: keep purging
                    errors.append(str(exc))
            elif sub.is_file():
                count += 1 if self._is_entry(sub) else 0
                try:
                    sub.unlink()
                except OSError as exc:
                    errors.append(str(exc))
        if errors:
            raise CacheError("cache purge incomplete: " + "; ".join(errors))
        return count

    def entries(self) -> list[tuple[str, str]]:
        """All (instance digest, key digest) pairs currently stored."""
        if not self.root.is_dir():
            return []
        found = []
        for sub in sorted(self.root.iterdir()):
            if sub.is_dir():
                for path in sorted(sub.iterdir()):
                    if self._is_entry(path):
                        found.append((sub.name, path.name))
        return found
