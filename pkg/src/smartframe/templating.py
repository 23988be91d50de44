"""Prompt templates: a fixed JSON message schema with {{slot}} injection.

A template is an ordered list of messages, each with a role ("system" or
"user") and a content string. Content may contain variable slots written
{{name}}; rendering replaces each slot with its binding in a single pass,
so injected text is never re-scanned for further slots.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    TemplateParseError,
    TemplateSchemaError,
    UnboundSlotError,
)

ROLES = ("system", "user")

SLOT_RE = re.compile(r"\{\{([A-Za-z_][A-Za-z0-9_]*)\}\}")


@dataclass(frozen=True)
class Message:
    """One prompt message: a role plus its content text."""

    role: str
    content: str


@dataclass(frozen=True)
class PromptTemplate:
    """An ordered, validated list of messages with unexpanded slots."""

    messages: tuple[Message, ...]

    def slots(self) -> set[str]:
        """Names of every {{slot}} appearing in any message."""
        found: set[str] = set()
        for message in self.messages:
            found.update(SLOT_RE.findall(message.content))
        return found


def parse_template(raw: str) -> PromptTemplate:
    """Parse and validate raw JSON text against the fixed template schema.

    Unknown fields are rejected, as are roles outside {"system", "user"}.
    Schema errors name the offending message index.
    """
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise TemplateParseError(f"template is not valid JSON: {exc}") from exc

    if not isinstance(data, dict):
        raise TemplateSchemaError("top-level value must be an object")
    extra = set(data) - {"messages"}
    if extra:
        raise TemplateSchemaError(f"unknown top-level fields: {sorted(extra)}")
    if "messages" not in data:
        raise TemplateSchemaError("missing required field 'messages'")
    raw_messages = data["messages"]
    if not isinstance(raw_messages, list):
        raise TemplateSchemaError("'messages' must be a list")
    if not raw_messages:
        raise TemplateSchemaError("'messages' must contain at least one message")

    messages = []
    for index, item in enumerate(raw_messages):
        if not isinstance(item, dict):
            raise TemplateSchemaError("message must be an object", index)
        unknown = set(item) - {"role", "content"}
        if unknown:
            raise TemplateSchemaError(f"unknown fields: {sorted(unknown)}", index)
        if "role" not in item:
            raise TemplateSchemaError("missing field 'role'", index)
        if "content" not in item:
            raise TemplateSchemaError("missing field 'content'", index)
        role = item["role"]
        content = item["content"]
        if role not in ROLES:
            raise TemplateSchemaError(
                f"role must be one of {list(ROLES)}, got {role!r}", index
            )
        if not isinstance(content, str):
            raise TemplateSchemaError("'content' must be a string", index)
        messages.append(Message(role=role, content=content))
    return PromptTemplate(messages=tuple(messages))


def serialize_template(template: PromptTemplate) -> str:
    """Serialize a template back to its canonical JSON form."""
    payload = {
        "messages": [
            {"role": m.role, "content": m.content} for m in template.messages
        ]
    }
    return json.dumps(payload, indent=2)


def render(template: PromptTemplate, bindings: Mapping[str, str]) -> list[Message]:
    """Expand every slot with its binding, preserving roles and order.

    Each {{name}} is replaced verbatim in a single pass; binding values are
    never re-scanned, so a value containing "{{x}}" stays literal. An unbound
    slot raises UnboundSlotError naming the slot; extra bindings are ignored.
    """
    rendered = []
    for message in template.messages:
        def substitute(match: re.Match) -> str:
            name = match.group(1)
            if name not in bindings:
                raise UnboundSlotError(name)
            return str(bindings[name])

        rendered.append(
            Message(role=message.role, content=SLOT_RE.sub(substitute, message.content))
        )
    return rendered


BUNDLED_TEMPLATES = ("chat", "improve", "determine_type", "retry")


def load_template(name: str, override_dir: Path | str | None = None) -> PromptTemplate:
    """Load a bundled template by name, honoring a user override directory.

    When override_dir contains <name>.json that file wins; otherwise the
    template shipped with the package is used.
    """
    filename = f"{name}.json"
    if override_dir is not None:
        candidate = Path(override_dir) / filename
        if candidate.is_file():
            return parse_template(candidate.read_text(encoding="utf-8"))
    resource = resources.files(__package__).joinpath("templates", filename)
    return parse_template(resource.read_text(encoding="utf-8"))


def messages_to_payload(messages: Iterable[Message]) -> list[dict]:
    """JSON-friendly form of a message list (role/content objects)."""
    return [{"role": m.role, "content": m.content} for m in messages]
