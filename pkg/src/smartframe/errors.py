"""Exception hierarchy for the smartframe library.

Backend transport failures (BackendError) are deliberately distinct from
generation failures (GenerationError): the code-generation retry loop retries
the latter but never the former.
"""

from __future__ import annotations


class SmartFrameError(Exception):
    """Base class for every error raised by this library."""


class FrameConstructionError(SmartFrameError):
    """The object passed as a frame does not expose a geometry attribute."""


class UsageError(SmartFrameError):
    """An operation was called in a state that does not permit it."""


# --- templating ---

class TemplateError(SmartFrameError):
    """Base class for template parsing and rendering problems."""


class TemplateParseError(TemplateError):
    """The raw template text is not well-formed JSON."""


class TemplateSchemaError(TemplateError):
    """The template JSON violates the fixed message schema."""

    def __init__(self, message: str, index: int | None = None):
        if index is not None:
            message = f"message {index}: {message}"
        super().__init__(message)
        self.index = index


class UnboundSlotError(TemplateError):
    """A template slot has no binding."""

    def __init__(self, slot: str):
        super().__init__(f"no binding for template slot {slot!r}")
        self.slot = slot


# --- code generation ---

class GenerationError(SmartFrameError):
    """Base class for code-generation failures."""


class CodeExtractionError(GenerationError):
    """No conforming code block could be extracted from a backend answer."""


class EntrySignatureError(GenerationError):
    """The extracted code defines an entry function with the wrong arity."""


class TypeResolutionError(GenerationError):
    """The backend answer named no permitted return type, even after a retry."""


class GenerationExhausted(GenerationError):
    """All generation attempts failed.

    Carries the last candidate code and last error, plus the full attempt
    transcript.
    """

    def __init__(self, last_code: str | None, last_error: str | None, attempts):
        super().__init__(
            "code generation failed after %d attempt(s); last error: %s"
            % (len(attempts), last_error)
        )
        self.last_code = last_code
        self.last_error = last_error
        self.attempts = list(attempts)


# --- sandbox ---

class SandboxError(SmartFrameError):
    """Base class for failures while running generated code."""


class ExecutionError(SandboxError):
    """Generated code raised; carries the exception transcript."""

    def __init__(self, message: str, transcript: str):
        super().__init__(message)
        self.transcript = transcript


class KindMismatchError(SandboxError):
    """The result of generated code matched none of the expected kinds."""

    def __init__(self, observed: str, expected):
        super().__init__(
            f"result kind {observed!r} not in expected kinds {sorted(expected)}"
        )
        self.observed = observed
        self.expected = frozenset(expected)


class IsolationError(SandboxError):
    """Generated code tried to import a tool outside the permitted toolset."""

    def __init__(self, name: str):
        super().__init__(f"import of {name!r} is not permitted by the toolset")
        self.name = name


# --- cache / backends / configuration ---

class CacheError(SmartFrameError):
    """Persistent cache I/O failed; callers fall back to generation."""


class BackendError(SmartFrameError):
    """The AI service could not be reached or returned a transport error."""


class FixtureMissingError(BackendError):
    """The replay backend has no fixture for a request digest."""

    def __init__(self, digest: str, known: list[str]):
        hint = ", ".join(known) if known else "(no fixtures recorded)"
        super().__init__(
            f"no replay fixture for request digest {digest}; "
            f"nearest recorded digests: {hint}"
        )
        self.digest = digest
        self.known = known


class ConfigurationError(SmartFrameError):
    """The library is configured in a way that cannot work."""


class CorpusFormatError(SmartFrameError):
    """A corpus example file has malformed front matter."""

    def __init__(self, path, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InjectionError(SmartFrameError):
    """Materializing a function into the ai module failed (e.g. name taken)."""
