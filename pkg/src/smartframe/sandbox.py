"""Constrained evaluation of generated code.

Generated code runs in a fresh namespace per call whose imports are
restricted to the permitted toolset plus the standard library. Candidate
code is first validated against small stand-in frames (an excerpt of the
real data, or synthetic frames produced by the configured descriptor)
before it ever touches the real frames.

Isolation level: in-process namespace plus import restriction. This is a
deliberate, documented security boundary limitation: it stops accidental
tool usage outside the toolset, not a determined attacker. Run untrusted
backends with safe_mode on and inspect code before executing.
"""

from __future__ import annotations

import builtins
import sys
import traceback
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .errors import (
    ConfigurationError,
    ExecutionError,
    IsolationError,
    KindMismatchError,
)
from .kinds import classify_value, match_kind
from .metadata import Descriptor, FrameMetadata, derive_automated_metadata


@dataclass
class ExecutionOutput:
    """A typed execution result: the return kind plus the opaque value."""

    kind: str
    value: Any


@dataclass
class ExecutionCounters:
    """Process-wide instrumentation: how often generated code actually ran."""

    validation_runs: int = 0
    real_runs: int = 0
    last_traceback: str | None = None


_counters = ExecutionCounters()


def get_counters() -> ExecutionCounters:
    return _counters


def reset_counters() -> None:
    _counters.validation_runs = 0
    _counters.real_runs = 0
    _counters.last_traceback = None


# ---------------------------------------------------------------------------
# validation frames
# ---------------------------------------------------------------------------

@dataclass
class ValidationFrames:
    """Small stand-ins mirroring the (primary, linked...) frame schemas."""

    frames: list[Any]
    mode: str  # "excerpt" | "synthetic"


def make_validation_frames(
    frames: Sequence[Any],
    descriptor: Descriptor,
    mode: str = "excerpt",
    metadata: Sequence[FrameMetadata] | None = None,
) -> ValidationFrames:
    """Build validation stand-ins for every frame, in order.

    Excerpt mode takes the first N rows (N = the descriptor's excerpt size,
    at least 1 when the source is non-empty), which preserves the schema by
    construction. Synthetic mode delegates to the descriptor's generator and
    fails with a configuration error when there is none.
    """
    if mode == "excerpt":
        rows = max(1, descriptor.excerpt_size)
        stand_ins = [frame.head(min(rows, len(frame))) for frame in frames]
    elif mode == "synthetic":
        stand_ins = []
        for position, frame in enumerate(frames):
            frame_metadata = (
                metadata[position]
                if metadata is not None
                else FrameMetadata(derive_automated_metadata(frame), "", ())
            )
            stand_ins.append(descriptor.generate_synthetic(frame, frame_metadata))
    else:
        raise ConfigurationError(f"unknown validation mode {mode!r}")
    return ValidationFrames(frames=stand_ins, mode=mode)


# ---------------------------------------------------------------------------
# restricted execution
# ---------------------------------------------------------------------------

def _guarded_builtins(allowed_roots: frozenset[str]) -> dict:
    real_import = builtins.__import__

    def guarded_import(name, globals=None, locals=None, fromlist=(), level=0):
        root = name.split(".")[0]
        if level == 0 and root not in allowed_roots:
            raise IsolationError(root)
        return real_import(name, globals, locals, fromlist, level)

    namespace = dict(vars(builtins))
    namespace["__import__"] = guarded_import
    return namespace


def run_code(
    source: str,
    frames: Sequence[Any],
    expected_kinds: Iterable[str],
    toolset: Iterable[str],
    purpose: str = "real",
) -> ExecutionOutput:
    """Run generated code on the given frames and type-check the result.

    The snippet is evaluated in a fresh namespace (no bindings survive
    between calls) whose importable roots are the toolset plus the standard
    library. The entry function is invoked positionally with the frames. The
    result must satisfy one of the expected kinds; the distinguished "none"
    kind accepts an absent result.
    """
    expected = frozenset(expected_kinds)
    allowed = frozenset(toolset) | frozenset(sys.stdlib_module_names)
    namespace: dict[str, Any] = {"__builtins__": _guarded_builtins(allowed)}

    if purpose == "validation":
        _counters.validation_runs += 1
    else:
        _counters.real_runs += 1

    try:
        exec(compile(source, "<generated>", "exec"), namespace)
        entry = namespace.get("execute")
        if not callable(entry):
            raise ExecutionError(
                "generated code defines no callable 'execute' function",
                transcript="",
            )
        result = entry(*frames)
    except IsolationError:
        raise
    except ExecutionError:
        raise
    except BaseException as exc:
        transcript = traceback.format_exc()
        _counters.last_traceback = transcript
        raise ExecutionError(
            f"generated code raised {type(exc).__name__}: {exc}", transcript
        ) from exc

    kind = match_kind(result, expected)
    if kind is None:
        observed = classify_value(result) or type(result).__name__
        _counters.last_traceback = None
        raise KindMismatchError(observed=observed, expected=expected)
    return ExecutionOutput(kind=kind, value=result)


@dataclass
class ValidationRunner:
    """Bundles validation frames and toolset for the generation retry loop."""

    validation: ValidationFrames
    toolset: frozenset[str]

    def validate(self, source: str, expected_kinds: Iterable[str]):
        """Run candidate code on the validation frames; raises on failure."""
        return run_code(
            source,
            self.validation.frames,
            expected_kinds,
            self.toolset,
            purpose="validation",
        )


def gate_auto_execute(config) -> bool:
    """Whether chat/improve may execute generated code automatically.

    False when safe_mode is set; chat/improve then print the generated code
    instead and the user must call execute() explicitly.
    """
    return not config.safe_mode
