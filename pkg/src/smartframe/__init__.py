"""smartframe: conversational smart dataframes with deterministic caching.

Wrap a geospatial dataframe in a SmartFrame and converse with it: chat()
generates and runs code for a request, improve() refines it, inspect()
shows the full transcript, execute() re-runs the latest code, and inject()
materializes accepted code into a reusable ``ai`` module. Generation is
cached on the full conversation state, so identical conversations replay
deterministically without further backend calls.
"""

from .backends import (
    Backend,
    BackendParams,
    BackendRequest,
    InstrumentedBackend,
    LiveBackend,
    RecordingBackend,
    ReplayBackend,
    record_fixture,
    request_digest,
)
from .cache import CacheKey, CodeCache, build_state_key
from .codegen import (
    Attempt,
    GeneratedCode,
    GenerationContext,
    GenerationOutcome,
    determine_type,
    extract_code,
    generate,
)
from .config import (
    Config,
    config_from_env,
    configure,
    get_config,
    make_backend,
    set_config,
    use_config,
)
from .corpus import (
    CorpusExample,
    CorpusIndex,
    RagBackend,
    augment_prompt,
    retrieve_examples,
)
from .errors import (
    BackendError,
    CacheError,
    CodeExtractionError,
    ConfigurationError,
    CorpusFormatError,
    EntrySignatureError,
    ExecutionError,
    FixtureMissingError,
    FrameConstructionError,
    GenerationError,
    GenerationExhausted,
    InjectionError,
    IsolationError,
    KindMismatchError,
    SandboxError,
    SmartFrameError,
    TemplateError,
    TemplateParseError,
    TemplateSchemaError,
    TypeResolutionError,
    UnboundSlotError,
    UsageError,
)
from .kinds import DEFAULT_RETURN_TYPES, NONE_KIND, normalize_return_types
from .metadata import (
    AutomatedMetadata,
    Descriptor,
    FrameMetadata,
    PublicDescriptor,
    RedactingDescriptor,
    build_utd,
    derive_automated_metadata,
    merge_linked_metadata,
)
from .sandbox import (
    ExecutionOutput,
    ValidationFrames,
    gate_auto_execute,
    get_counters,
    make_validation_frames,
    reset_counters,
    run_code,
)
from .state import (
    DEFAULT_TOOLSET,
    ChatResult,
    HistoryEntry,
    SmartFrame,
    SmartFrameState,
    reset_cache_global,
    state_digest,
)
from .templating import Message, PromptTemplate, load_template, parse_template, render

__version__ = "0.1.0"

__all__ = [
    "SmartFrame",
    "ChatResult",
    "SmartFrameState",
    "HistoryEntry",
    "ExecutionOutput",
    "state_digest",
    "reset_cache_global",
    "DEFAULT_TOOLSET",
    "DEFAULT_RETURN_TYPES",
    "NONE_KIND",
    "normalize_return_types",
    "Config",
    "configure",
    "get_config",
    "set_config",
    "use_config",
    "config_from_env",
    "make_backend",
    "Backend",
    "BackendParams",
    "BackendRequest",
    "LiveBackend",
    "ReplayBackend",
    "RecordingBackend",
    "InstrumentedBackend",
    "record_fixture",
    "request_digest",
    "RagBackend",
    "CorpusExample",
    "CorpusIndex",
    "retrieve_examples",
    "augment_prompt",
    "CacheKey",
    "CodeCache",
    "build_state_key",
    "Attempt",
    "GeneratedCode",
    "GenerationContext",
    "GenerationOutcome",
    "determine_type",
    "extract_code",
    "generate",
    "AutomatedMetadata",
    "FrameMetadata",
    "Descriptor",
    "PublicDescriptor",
    "RedactingDescriptor",
    "build_utd",
    "derive_automated_metadata",
    "merge_linked_metadata",
    "ValidationFrames",
    "make_validation_frames",
    "run_code",
    "gate_auto_execute",
    "get_counters",
    "reset_counters",
    "Message",
    "PromptTemplate",
    "parse_template",
    "render",
    "load_template",
    "SmartFrameError",
    "FrameConstructionError",
    "UsageError",
    "TemplateError",
    "TemplateParseError",
    "TemplateSchemaError",
    "UnboundSlotError",
    "GenerationError",
    "CodeExtractionError",
    "EntrySignatureError",
    "TypeResolutionError",
    "GenerationExhausted",
    "SandboxError",
    "ExecutionError",
    "KindMismatchError",
    "IsolationError",
    "CacheError",
    "BackendError",
    "FixtureMissingError",
    "ConfigurationError",
    "CorpusFormatError",
    "InjectionError",
]
