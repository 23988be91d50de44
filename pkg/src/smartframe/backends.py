"""Backend-agnostic AI-service abstraction.

A backend is anything that maps a message list to an answer containing code.
Three implementations ship here: a live OpenAI-compatible HTTP client (any
provider or local model exposing /chat/completions), a deterministic replay
backend over recorded fixtures (the test workhorse), and a recording wrapper
that persists fixtures from a live session for later replay. An
instrumentation wrapper records every outbound request, which is how the
privacy invariants are audited.
"""

from __future__ import annotations

import hashlib
import json
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

from .errors import BackendError, FixtureMissingError
from .templating import Message, messages_to_payload


@dataclass(frozen=True)
class BackendParams:
    """Request parameters forwarded to the AI service."""

    model: str
    temperature: float
    max_output_tokens: int


@dataclass(frozen=True)
class BackendRequest:
    """One completion request: ordered messages plus parameters."""

    messages: tuple[Message, ...]
    params: BackendParams

    def __post_init__(self):
        if not self.messages:
            raise BackendError("a backend request must contain messages")


def request_digest(request: BackendRequest) -> str:
    """Deterministic digest of a request; the replay fixture key."""
    payload = {
        "messages": [[m.role, m.content] for m in request.messages],
        "params": {
            "model": request.params.model,
            "temperature": request.params.temperature,
            "max_output_tokens": request.params.max_output_tokens,
        },
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Backend(ABC):
    """Anything capable of producing an answer text from a prompt."""

    @abstractmethod
    def complete(self, request: BackendRequest) -> str:
        """Return the full answer text for the request."""


class LiveBackend(Backend):
    """OpenAI-compatible chat-completions client.

    Works against any provider or local model that speaks the
    /chat/completions protocol. The credential is resolved from the
    environment variable named by ``api_key_env`` at call time and is never
    stored.
    """

    def __init__(
        self,
        base_url: str,
        api_key_env: str = "SMARTFRAME_API_KEY",
        timeout: float = 120.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout = timeout

    def complete(self, request: BackendRequest) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": request.params.model,
            "temperature": request.params.temperature,
            "max_tokens": request.params.max_output_tokens,
            "messages": messages_to_payload(request.messages),
        }
        try:
            response = httpx.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=self.timeout,
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise BackendError(f"AI service request failed: {exc}") from exc
        except (KeyError, IndexError, ValueError) as exc:
            raise BackendError(f"malformed AI service response: {exc}") from exc


class ReplayBackend(Backend):
    """Deterministic backend answering from recorded fixture files.

    With this backend the whole library is a pure function of its inputs and
    fixtures: identical runs produce identical answers, histories, and cache
    contents.
    """

    def __init__(self, fixture_dir: Path | str):
        self.fixture_dir = Path(fixture_dir)

    def _fixture_path(self, digest: str) -> Path:
        return self.fixture_dir / f"{digest}.json"

    def complete(self, request: BackendRequest) -> str:
        digest = request_digest(request)
        path = self._fixture_path(digest)
        if not path.is_file():
            known = sorted(
                p.stem for p in self.fixture_dir.glob("*.json")
            ) if self.fixture_dir.is_dir() else []
            raise FixtureMissingError(digest, known[:5])
        payload = json.loads(path.read_text(encoding="utf-8"))
        return payload["answer"]


def record_fixture(
    fixture_dir: Path | str, request: BackendRequest, answer: str
) -> Path:
    """Persist a (request, answer) pair for later replay; returns the path."""
    directory = Path(fixture_dir)
    directory.mkdir(parents=True, exist_ok=True)
    digest = request_digest(request)
    payload = {
        "digest": digest,
        "request": {
            "messages": messages_to_payload(request.messages),
            "params": {
                "model": request.params.model,
                "temperature": request.params.temperature,
                "max_output_tokens": request.params.max_output_tokens,
            },
        },
        "answer": answer,
    }
    path = directory / f"{digest}.json"
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    os.replace(tmp, path)
    return path


class RecordingBackend(Backend):
    """Delegates to an inner backend and records every exchange as a fixture."""

    def __init__(self, inner: Backend, fixture_dir: Path | str):
        self.inner = inner
        self.fixture_dir = Path(fixture_dir)

    def complete(self, request: BackendRequest) -> str:
        answer = self.inner.complete(request)
        record_fixture(self.fixture_dir, request, answer)
        return answer


class InstrumentedBackend(Backend):
    """Delegates to an inner backend while recording all outbound requests.

    Useful for auditing exactly what text leaves the process (the privacy
    invariant) and for exact call-count assertions.
    """

    def __init__(self, inner: Backend):
        self.inner = inner
        self.requests: list[BackendRequest] = []

    @property
    def call_count(self) -> int:
        return len(self.requests)

    def outbound_texts(self) -> list[str]:
        """Content of every message sent across all recorded requests."""
        return [
            message.content
            for request in self.requests
            for message in request.messages
        ]

    def complete(self, request: BackendRequest) -> str:
        self.requests.append(request)
        return self.inner.complete(request)
