"""The smart frame: a conversational, stateful wrapper around a dataframe.

A SmartFrame owns the state tuple (frame, metadata, history, toolset,
return types) and the five public state-evolution operations:

- chat()    starts (or restarts) a conversation: the state is reset first,
            so the history always has exactly one entry afterwards;
- improve() refines the latest code, appending to the history;
- execute() runs the latest code on the real frames without modifying the
            state; frame-kind results come back wrapped as a fresh
            SmartFrame in its initial state;
- inspect() renders the full (prompt, code) transcript;
- inject()  materializes the latest code as a named function in the local
            ``ai`` module.

chat/improve mutate the receiving smart frame in place and return a
ChatResult handle that carries the execution output and delegates follow-up
calls back to the conversation (or, for frame results, to the new frame).
By default generated code is executed automatically; with safe_mode on it
is printed instead and execute() must be called explicitly.
"""

from __future__ import annotations

import hashlib
import json
import keyword
from dataclasses import dataclass, field
from typing import Any, Optional

from .cache import CacheKey, CodeCache, build_state_key
from .codegen import Attempt, GenerationContext, format_history, generate
from .config import Config, get_config, make_backend
from .errors import UsageError
from .inject import injection_instructions, materialize
from .kinds import (
    DEFAULT_RETURN_TYPES,
    GEODATAFRAME_KIND,
    normalize_return_types,
)
from .metadata import (
    FrameMetadata,
    build_utd,
    geometry_column,
    initial_metadata,
    instance_digest,
    merge_linked_metadata,
    metadata_payload,
)
from .sandbox import (
    ExecutionOutput,
    ValidationRunner,
    gate_auto_execute,
    make_validation_frames,
    run_code,
)

DEFAULT_TOOLSET = frozenset(
    {"contextily", "pandas", "matplotlib", "folium", "geopandas"}
)


class _Unset:
    def __repr__(self):
        return "<unset>"


UNSET = _Unset()


def _normalize_toolset(value) -> frozenset[str]:
    if isinstance(value, str):
        return frozenset({value})
    toolset = frozenset(str(tool) for tool in value)
    if not toolset:
        raise UsageError("toolset must not be empty")
    return toolset


@dataclass
class HistoryEntry:
    """One interaction: the query, the accepted code, the attempt transcript,
    and the cache key the code was stored under (used for chat-wise resets)."""

    query: str
    code: str
    attempts: tuple[Attempt, ...] = ()
    cache_key: str = ""


@dataclass
class SmartFrameState:
    """The state tuple plus the last execution output handle."""

    frame: Any
    metadata: FrameMetadata
    history: list[HistoryEntry] = field(default_factory=list)
    toolset: frozenset[str] = DEFAULT_TOOLSET
    return_types: frozenset[str] = DEFAULT_RETURN_TYPES
    linked: list[Any] = field(default_factory=list)
    last_output: Optional[ExecutionOutput] = None


def state_digest(state: SmartFrameState) -> str:
    """Digest over (metadata, history, toolset, return types).

    The frame itself and the last output handle are excluded; execute() must
    leave this digest unchanged.
    """
    payload = {
        "metadata": metadata_payload(state.metadata),
        "history": [
            [
                entry.query,
                entry.code,
                entry.cache_key,
                [[a.candidate, a.error] for a in entry.attempts],
            ]
            for entry in state.history
        ],
        "toolset": sorted(state.toolset),
        "return_types": sorted(state.return_types),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ChatResult:
    """Handle returned by chat/improve.

    Carries the execution output (None under safe_mode) and delegates
    improve/inspect/inject/execute back to the originating conversation.
    When the output kind is a frame, ``frame`` is the fresh SmartFrame and
    subsequent chat() calls address it, so results can be chained and
    conversed with like any other smart frame.
    """

    def __init__(self, origin: "SmartFrame", output: Optional[ExecutionOutput]):
        self._origin = origin
        self.output = output
        self.frame: Optional[SmartFrame] = None
        if output is not None and output.kind == GEODATAFRAME_KIND:
            self.frame = output.value

    @property
    def value(self) -> Any:
        return self.output.value if self.output is not None else None

    def chat(self, query: str, *linked, **options) -> "ChatResult":
        target = self.frame if self.frame is not None else self._origin
        return target.chat(query, *linked, **options)

    def improve(self, query: str, *linked, **options) -> "ChatResult":
        return self._origin.improve(query, *linked, **options)

    def inspect(self) -> str:
        return self._origin.inspect()

    def inject(self, function_name: str, overwrite: bool = False):
        return self._origin.inject(function_name, overwrite=overwrite)

    def execute(self) -> ExecutionOutput:
        return self._origin.execute()


class SmartFrame:
    """A geospatial dataframe with an embedded conversational code assistant."""

    def __init__(
        self,
        frame: Any,
        description: str | None = None,
        *,
        config: Config | None = None,
    ):
        geometry_column(frame)  # rejects frames without a geometry attribute
        self._config_override = config
        self._base_metadata = initial_metadata(frame, description)
        self._linked_pairs: list[tuple[Any, FrameMetadata]] = []
        self.state = SmartFrameState(
            frame=frame,
            metadata=self._base_metadata,
        )

    # --- configuration plumbing ---

    def _config(self) -> Config:
        return (
            self._config_override
            if self._config_override is not None
            else get_config()
        )

    @property
    def description(self) -> str:
        return self._base_metadata.description

    # --- conversation ---

    def chat(
        self,
        query: str,
        *linked,
        toolset=None,
        return_type=UNSET,
    ) -> ChatResult:
        """Start a conversation over, generating code for a fresh request.

        The state is reset first: omitted toolset/return types fall back to
        the defaults, not to previous values. Linked smart frames are passed
        positionally and map to df_2, df_3, ... in the generated signature.
        """
        if not query or not query.strip():
            raise UsageError("chat requires a non-empty query")
        state = self.state
        state.history = []
        state.last_output = None
        state.toolset = (
            DEFAULT_TOOLSET if toolset is None else _normalize_toolset(toolset)
        )
        state.return_types = (
            DEFAULT_RETURN_TYPES
            if isinstance(return_type, _Unset)
            else normalize_return_types(return_type)
        )
        self._linked_pairs = self._normalize_linked(linked)
        self._apply_linked()
        return self._converse("chat", query)

    def improve(
        self,
        query: str,
        *linked,
        toolset=None,
        return_type=UNSET,
    ) -> ChatResult:
        """Refine the conversation; omitted options inherit previous values."""
        if not query or not query.strip():
            raise UsageError("improve requires a non-empty query")
        if not self.state.history:
            raise UsageError(
                "improve requires an existing conversation; call chat() first"
            )
        state = self.state
        if toolset is not None:
            state.toolset = _normalize_toolset(toolset)
        if not isinstance(return_type, _Unset):
            state.return_types = normalize_return_types(return_type)
        if linked:
            self._linked_pairs = self._normalize_linked(linked)
        self._apply_linked()
        return self._converse("improve", query)

    def _normalize_linked(self, linked) -> list[tuple[Any, FrameMetadata]]:
        pairs = []
        for item in linked:
            if isinstance(item, ChatResult):
                if item.frame is None:
                    raise UsageError(
                        "a linked chat result carries no frame output"
                    )
                item = item.frame
            if isinstance(item, SmartFrame):
                pairs.append((item.state.frame, item._base_metadata))
            else:
                pairs.append((item, initial_metadata(item, None)))
        return pairs

    def _apply_linked(self) -> None:
        self.state.linked = [frame for frame, _ in self._linked_pairs]
        self.state.metadata = merge_linked_metadata(
            self._base_metadata, self._linked_pairs
        )

    def _converse(self, kind: str, query: str) -> ChatResult:
        config = self._config()
        state = self.state
        utd = build_utd(config.descriptor, state.frame, state.metadata)
        key = build_state_key(state, query, state.toolset, state.return_types)
        ctx = GenerationContext(
            kind=kind,
            utd=utd,
            history=tuple(state.history),
            toolset=state.toolset,
            return_types=state.return_types,
            query=query,
            linked_count=len(state.linked),
            params=config.backend_params(),
            cache_key=key,
            template_dir=config.template_dir,
        )
        cache = CodeCache(config.cache_dir)
        backend = make_backend(config)
        validation = make_validation_frames(
            [state.frame, *state.linked],
            config.descriptor,
            config.validation_mode,
        )
        runner = ValidationRunner(validation, state.toolset)
        outcome = generate(ctx, cache, backend, runner)
        state.history.append(
            HistoryEntry(
                query=query,
                code=outcome.code.source,
                attempts=tuple(outcome.attempts),
                cache_key=key.digest,
            )
        )
        if gate_auto_execute(config):
            output = self.execute()
        else:
            print(outcome.code.source)
            output = None
        return ChatResult(self, output)

    # --- execution and inspection ---

    def execute(self) -> ExecutionOutput:
        """Run the latest code on the real frames; the state is not modified.

        Frame-kind results are wrapped as a new SmartFrame in its initial
        state (empty history, default toolset and return types, freshly
        derived metadata).
        """
        state = self.state
        if not state.history:
            raise UsageError("execute requires an existing conversation")
        output = run_code(
            state.history[-1].code,
            [state.frame, *state.linked],
            state.return_types,
            state.toolset,
            purpose="real",
        )
        if output.kind == GEODATAFRAME_KIND:
            output = ExecutionOutput(
                kind=GEODATAFRAME_KIND,
                value=SmartFrame(output.value, config=self._config_override),
            )
        state.last_output = output
        return output

    def inspect(self) -> str:
        """Print and return the (prompt, code) transcript in call order."""
        text = format_history(self.state.history)
        print(text)
        return text

    def inject(self, function_name: str, overwrite: bool = False):
        """Write the latest code as ``function_name`` into the ai module.

        Refuses name collisions unless overwrite is set; prints the manual
        injection instructions and returns the module path.
        """
        if not self.state.history:
            raise UsageError("inject requires an existing conversation")
        if not function_name.isidentifier() or keyword.iskeyword(function_name):
            raise UsageError(
                f"{function_name!r} is not a valid Python function name"
            )
        config = self._config()
        target = config.ai_module_dir / "ai.py"
        path = materialize(
            self.state.history[-1].code, function_name, target, overwrite
        )
        print(injection_instructions(function_name))
        return path

    # --- cache management ---

    def reset_cache(self, chat_wise: bool = True) -> int:
        """Clear cached generations for this instance.

        chat_wise=True removes only the current conversation's keys;
        otherwise every key recorded for this instance's metadata digest is
        dropped. Returns the number of entries removed.
        """
        config = self._config()
        cache = CodeCache(config.cache_dir)
        instance = instance_digest(self._base_metadata)
        if chat_wise:
            keys = [
                CacheKey(digest=entry.cache_key, instance=instance)
                for entry in self.state.history
                if entry.cache_key
            ]
            return cache.reset_keys(keys)
        return cache.reset_instance(instance)


def reset_cache_global(config: Config | None = None) -> int:
    """Purge every cached generation in the configured cache directory."""
    active = config if config is not None else get_config()
    return CodeCache(active.cache_dir).reset_all()
