"""The three-step code generation protocol.

1. Return-type resolution: when the permitted return-type set has more
   than one member, a dedicated prompt asks the AI service to pick one;
   the answer is parsed from a fixed ``TYPE: <identifier>`` line.
2. Prompt compilation: the chat/improve template is filled with the resolved
   type, the unified textual description, the toolset and return types, and
   (for improve) the full interaction history.
3. Extraction, validation, retries: the code block is extracted from the
   answer, checked against the required entry signature, and validated by
   running it on stand-in frames. Failures compile a retry prompt embedding
   the failing code and its traceback and are appended to the working
   conversation. At most five total attempts; then generation fails with the
   last candidate attached.

The cache is consulted before any of this; a hit answers with zero backend
calls.
"""

from __future__ import annotations

import ast
import re
import textwrap
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .backends import Backend, BackendParams, BackendRequest
from .cache import CacheKey, CodeCache
from .errors import (
    CacheError,
    CodeExtractionError,
    EntrySignatureError,
    ExecutionError,
    GenerationError,
    GenerationExhausted,
    SandboxError,
    TypeResolutionError,
)
from .kinds import normalize_kind
from .sandbox import ValidationRunner
from .templating import Message, load_template, render

MAX_ATTEMPTS = 5

ENTRY_NAME = "execute"

TYPE_ANSWER_RE = re.compile(r"^TYPE:\s*(\S+)\s*$", re.MULTILINE)

FENCE_RE = re.compile(r"```[ \t]*[A-Za-z0-9_+-]*[ \t]*\n(.*?)```", re.DOTALL)


@dataclass
class Attempt:
    """One generation attempt: the candidate code (or raw answer when no
    code could be extracted) and the error text, None for the success."""

    candidate: str | None
    error: str | None


@dataclass(frozen=True)
class GeneratedCode:
    """Validated generated source defining exactly one entry function."""

    source: str
    entry_arity: int


@dataclass
class GenerationContext:
    """Everything one generation step depends on."""

    kind: str  # "chat" | "improve"
    utd: str
    history: Sequence
    toolset: frozenset[str]
    return_types: frozenset[str]
    query: str
    linked_count: int
    params: BackendParams
    cache_key: CacheKey
    template_dir: Path | None = None
    resolved_type: str | None = None


@dataclass
class GenerationOutcome:
    """Result of generate(): the code plus its provenance."""

    code: GeneratedCode
    attempts: list[Attempt] = field(default_factory=list)
    resolved_type: str | None = None
    from_cache: bool = False


def entry_signature(arity: int) -> str:
    """The required entry signature for a given total frame count."""
    names = ", ".join(f"df_{i + 1}" for i in range(arity))
    return f"def {ENTRY_NAME}({names})"


def format_history(entries: Sequence) -> str:
    """Render (query, code) pairs as numbered Prompt/Code blocks."""
    blocks = []
    for position, entry in enumerate(entries, start=1):
        blocks.append(
            f"Prompt {position}: {entry.query}\nCode {position}:\n\n{entry.code}"
        )
    return "\n\n".join(blocks)


# ---------------------------------------------------------------------------
# step 1: return-type resolution
# ---------------------------------------------------------------------------

def parse_type_answer(answer: str, return_types: frozenset[str]) -> str | None:
    """First permitted identifier named on a TYPE: line, else None."""
    for match in TYPE_ANSWER_RE.finditer(answer):
        raw = match.group(1)
        if raw in return_types:
            return raw
        normalized = normalize_kind(raw)
        if normalized in return_types:
            return normalized
    return None


def determine_type(
    query: str,
    return_types: frozenset[str],
    backend: Backend,
    params: BackendParams,
    template_dir: Path | None = None,
) -> str:
    """Ask the AI service which permitted return type fits the request.

    Only meaningful when more than one type is permitted (callers bypass
    this for singletons). One retry on an unparseable answer, then a
    type-resolution error.
    """
    template = load_template("determine_type", template_dir)
    choices = ", ".join(sorted(return_types))
    messages = render(template, {"choices": choices, "prompt": query})

    answer = backend.complete(BackendRequest(tuple(messages), params))
    resolved = parse_type_answer(answer, return_types)
    if resolved is not None:
        return resolved

    nudge = Message(
        role="user",
        content=(
            "Your previous answer did not name a permitted type. "
            f"Reply with exactly one line: TYPE: <one of: {choices}>"
        ),
    )
    answer = backend.complete(BackendRequest(tuple(messages) + (nudge,), params))
    resolved = parse_type_answer(answer, return_types)
    if resolved is not None:
        return resolved
    raise TypeResolutionError(
        f"backend named no permitted return type (permitted: {choices}); "
        f"last answer: {answer!r}"
    )


# ---------------------------------------------------------------------------
# step 2: prompt compilation
# ---------------------------------------------------------------------------

def _linked_note(linked_count: int) -> str:
    if linked_count == 0:
        return ""
    if linked_count == 1:
        return " and df_2 is the linked dataframe"
    return f" and df_2..df_{linked_count + 1} are the linked dataframes in order"


def compile_prompt(kind: str, ctx: GenerationContext) -> list[Message]:
    """Fill the chat or improve template from the generation context."""
    if kind not in ("chat", "improve"):
        raise GenerationError(f"unknown prompt kind {kind!r}")
    if kind == "improve" and not ctx.history:
        raise GenerationError("improve prompts require a non-empty history")
    bindings = {
        "signature": entry_signature(1 + ctx.linked_count),
        "linked_note": _linked_note(ctx.linked_count),
        "toolset": ", ".join(sorted(ctx.toolset)),
        "return_type": ctx.resolved_type or "",
        "context": ctx.utd,
        "prompt": ctx.query,
    }
    if kind == "improve":
        bindings["history"] = format_history(ctx.history)
    template = load_template(kind, ctx.template_dir)
    return render(template, bindings)


# ---------------------------------------------------------------------------
# step 3: extraction and the retry loop
# ---------------------------------------------------------------------------

def _inspect_entry(source: str) -> int:
    """Arity of the single top-level entry function; raises otherwise."""
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise CodeExtractionError(f"candidate code does not parse: {exc}") from exc
    entries = [
        node
        for node in tree.body
        if isinstance(node, ast.FunctionDef) and node.name == ENTRY_NAME
    ]
    if not entries:
        raise CodeExtractionError(
            f"candidate defines no top-level '{ENTRY_NAME}' function"
        )
    if len(entries) > 1:
        raise CodeExtractionError(
            f"candidate defines {len(entries)} '{ENTRY_NAME}' functions"
        )
    args = entries[0].args
    if args.vararg or args.kwarg or args.kwonlyargs or args.posonlyargs:
        raise CodeExtractionError(
            f"'{ENTRY_NAME}' must take plain positional parameters only"
        )
    return len(args.args)


def extract_code(answer: str, expected_arity: int) -> GeneratedCode:
    """Extract and verify the entry-function code block from an answer.

    Fenced blocks are preferred; a bare answer that itself is code is
    accepted. Answers with zero or multiple entry functions are rejected;
    an arity mismatch is a signature error. Both trigger a retry upstream.
    """
    blocks = [
        textwrap.dedent(block).strip("\n")
        for block in FENCE_RE.findall(answer)
    ]
    candidates = [b for b in blocks if f"def {ENTRY_NAME}(" in b]
    if len(candidates) > 1:
        raise CodeExtractionError(
            f"answer contains {len(candidates)} code blocks defining "
            f"'{ENTRY_NAME}'; exactly one is required"
        )
    if candidates:
        source = candidates[0]
    elif not blocks and f"def {ENTRY_NAME}(" in answer:
        source = answer.strip("\n")
    else:
        raise CodeExtractionError(
            f"answer contains no code block defining '{ENTRY_NAME}'"
        )

    arity = _inspect_entry(source)
    if arity != expected_arity:
        raise EntrySignatureError(
            f"entry function takes {arity} parameter(s); "
            f"{expected_arity} expected ({entry_signature(expected_arity)})"
        )
    return GeneratedCode(source=source, entry_arity=arity)


def _retry_messages(
    ctx: GenerationContext, candidate: str, error: str
) -> list[Message]:
    template = load_template("retry", ctx.template_dir)
    return render(
        template,
        {
            "code": candidate,
            "error": error,
            "signature": entry_signature(1 + ctx.linked_count),
        },
    )


def _revive_cached(
    cached: str, ctx: GenerationContext, sandbox: ValidationRunner
) -> GenerationOutcome | None:
    """Build an outcome from cached code, or None when it no longer holds up."""
    try:
        arity = _inspect_entry(cached)
        if arity != 1 + ctx.linked_count:
            return None
        sandbox.validate(cached, ctx.return_types)
    except (GenerationError, SandboxError):
        return None
    return GenerationOutcome(
        code=GeneratedCode(source=cached, entry_arity=arity),
        attempts=[],
        resolved_type=None,
        from_cache=True,
    )


def generate(
    ctx: GenerationContext,
    cache: CodeCache,
    backend: Backend,
    sandbox: ValidationRunner,
) -> GenerationOutcome:
    """Full generation protocol: cache first, then resolve/compile/retry.

    A cache hit is re-validated on the stand-in frames and answered with
    zero backend calls. On a miss the type is resolved (when needed), the
    prompt compiled, and up to five total attempts made; every failed
    attempt appends the failing code and its error to the conversation.
    Transport errors from the backend are not retried.
    """
    try:
        cached = cache.get(ctx.cache_key)
    except CacheError:
        cached = None
    if cached is not None:
        outcome = _revive_cached(cached, ctx, sandbox)
        if outcome is not None:
            return outcome

    if len(ctx.return_types) > 1:
        resolved = determine_type(
            ctx.query, ctx.return_types, backend, ctx.params, ctx.template_dir
        )
    else:
        (resolved,) = ctx.return_types
    ctx.resolved_type = resolved

    conversation = list(compile_prompt(ctx.kind, ctx))
    attempts: list[Attempt] = []
    expected_arity = 1 + ctx.linked_count

    for _ in range(MAX_ATTEMPTS):
        answer = backend.complete(BackendRequest(tuple(conversation), ctx.params))
        try:
            code = extract_code(answer, expected_arity)
        except GenerationError as exc:
            attempts.append(Attempt(candidate=answer, error=str(exc)))
            conversation.extend(_retry_messages(ctx, answer, str(exc)))
            continue
        try:
            sandbox.validate(code.source, {resolved})
        except SandboxError as exc:
            detail = exc.transcript if isinstance(exc, ExecutionError) else str(exc)
            attempts.append(Attempt(candidate=code.source, error=detail))
            conversation.extend(_retry_messages(ctx, code.source, detail))
            continue
        attempts.append(Attempt(candidate=code.source, error=None))
        try:
            cache.set(ctx.cache_key, code.source)
        except CacheError:
            pass  # caching is an optimization; generation already succeeded
        return GenerationOutcome(
            code=code, attempts=attempts, resolved_type=resolved, from_cache=False
        )

    last = attempts[-1]
    raise GenerationExhausted(last.candidate, last.error, attempts)
