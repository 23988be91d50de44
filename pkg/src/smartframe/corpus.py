"""Local example corpus: indexing, lexical retrieval, prompt augmentation.

The corpus is a directory of example files. Each file starts with a small
YAML front-matter block (delimited by "---" lines) carrying at least a
``task`` description and optionally ``tags``; the rest of the file is the
code body. The example id is the file stem.

Retrieval is deliberately offline: normalized term-frequency vectors with
stopword removal, compared by cosine similarity, ties broken by id. An
embedding-based scorer can be plugged in by replacing the retriever, but the
default keeps retrieval fully deterministic and testable.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import yaml

from .backends import Backend, BackendRequest
from .errors import ConfigurationError, CorpusFormatError
from .templating import Message

STOPWORDS = frozenset(
    """a an and are as at be by for from in is it of on or that the this
    to via with""".split()
)

_TOKEN_RE = re.compile(r"[a-z0-9_]+")


@dataclass(frozen=True)
class CorpusExample:
    """One retrievable example: id, task description, code, tool tags."""

    id: str
    task: str
    code: str
    tags: tuple[str, ...] = ()


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens minus stopwords."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in STOPWORDS]


def term_frequencies(text: str) -> dict[str, float]:
    """Normalized term-frequency vector of a text (counts / total)."""
    tokens = tokenize(text)
    if not tokens:
        return {}
    counts: dict[str, float] = {}
    for token in tokens:
        counts[token] = counts.get(token, 0.0) + 1.0
    total = float(len(tokens))
    return {token: count / total for token, count in counts.items()}


def cosine_similarity(a: dict[str, float], b: dict[str, float]) -> float:
    """Cosine similarity of two sparse term-frequency vectors."""
    if not a or not b:
        return 0.0
    dot = sum(weight * b.get(token, 0.0) for token, weight in a.items())
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def example_text(example: CorpusExample) -> str:
    """The text an example is matched against: its task plus its tags."""
    return " ".join([example.task, *example.tags])


# ---------------------------------------------------------------------------
# corpus files and index
# ---------------------------------------------------------------------------

def parse_example_text(example_id: str, text: str, origin) -> CorpusExample:
    """Parse example text; malformed front matter raises CorpusFormatError."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "---":
        raise CorpusFormatError(origin, "missing front-matter opening '---'")
    try:
        closing = next(
            i for i, line in enumerate(lines[1:], start=1) if line.strip() == "---"
        )
    except StopIteration:
        raise CorpusFormatError(origin, "missing front-matter closing '---'") from None
    try:
        header = yaml.safe_load("\n".join(lines[1:closing])) or {}
    except yaml.YAMLError as exc:
        raise CorpusFormatError(origin, f"invalid front matter: {exc}") from exc
    if not isinstance(header, dict) or "task" not in header:
        raise CorpusFormatError(origin, "front matter must define 'task'")
    task = str(header["task"]).strip()
    if not task:
        raise CorpusFormatError(origin, "'task' must be non-empty")
    tags = header.get("tags", [])
    if isinstance(tags, str):
        tags = [tags]
    code = "\n".join(lines[closing + 1 :]).strip("\n")
    if not code.strip():
        raise CorpusFormatError(origin, "example has no code body")
    return CorpusExample(
        id=example_id, task=task, code=code, tags=tuple(str(t) for t in tags)
    )


def parse_example_file(path: Path) -> CorpusExample:
    """Parse one corpus file; the example id is the file stem."""
    return parse_example_text(path.stem, path.read_text(encoding="utf-8"), path)


class CorpusIndex:
    """Parsed corpus examples plus their precomputed term vectors."""

    def __init__(self, examples: Sequence[CorpusExample]):
        ids = [e.id for e in examples]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("corpus example ids must be unique")
        self.examples = list(examples)
        self._vectors = {e.id: term_frequencies(example_text(e)) for e in examples}

    def __len__(self) -> int:
        return len(self.examples)

    def vector(self, example_id: str) -> dict[str, float]:
        return self._vectors[example_id]

    @classmethod
    def build(cls, corpus_dir: Path | str) -> "CorpusIndex":
        """Index every example file in a directory (sorted, non-recursive)."""
        directory = Path(corpus_dir)
        if not directory.is_dir():
            raise ConfigurationError(f"corpus directory not found: {directory}")
        examples = [
            parse_example_file(path)
            for path in sorted(directory.iterdir())
            if path.is_file() and path.suffix in (".md", ".txt")
        ]
        return cls(examples)

    @classmethod
    def bundled(cls) -> "CorpusIndex":
        """Index the starter corpus shipped with the package."""
        root = resources.files(__package__).joinpath("corpus")
        examples = []
        for entry in sorted(root.iterdir(), key=lambda e: e.name):
            if entry.name.endswith(".md"):
                examples.append(
                    parse_example_text(
                        entry.name[: -len(".md")], entry.read_text(), entry.name
                    )
                )
        return cls(examples)

    def save(self, path: Path | str) -> None:
        payload = [
            {"id": e.id, "task": e.task, "code": e.code, "tags": list(e.tags)}
            for e in self.examples
        ]
        Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: Path | str) -> "CorpusIndex":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            [
                CorpusExample(
                    id=item["id"],
                    task=item["task"],
                    code=item["code"],
                    tags=tuple(item.get("tags", [])),
                )
                for item in payload
            ]
        )


# ---------------------------------------------------------------------------
# retrieval and augmentation
# ---------------------------------------------------------------------------

def retrieve_examples(
    query: str, k: int, corpus: CorpusIndex | None
) -> list[CorpusExample]:
    """Top-k examples by similarity, deterministic tie-break by id."""
    if corpus is None:
        raise ConfigurationError("no corpus index configured")
    if k <= 0:
        return []
    query_vector = term_frequencies(query)
    scored = sorted(
        corpus.examples,
        key=lambda e: (-cosine_similarity(query_vector, corpus.vector(e.id)), e.id),
    )
    return scored[:k]


def serialize_examples(examples: Sequence[CorpusExample]) -> str:
    """Render retrieved examples for prompt insertion."""
    blocks = ["Relevant examples from the local corpus:"]
    for example in examples:
        blocks.append(
            f"\nExample: {example.id}\nTask: {example.task}\n"
            f"Tags: {', '.join(example.tags) if example.tags else '(none)'}\n"
            f"Code:\n{example.code}"
        )
    return "\n".join(blocks)


def augment_prompt(
    messages: Sequence[Message], examples: Sequence[CorpusExample]
) -> list[Message]:
    """Insert one system message with the examples before the final user message.

    Idempotent: applying the same examples twice inserts a single message;
    empty example lists leave the messages unchanged.
    """
    messages = list(messages)
    if not examples:
        return messages
    insertion = Message(role="system", content=serialize_examples(examples))
    if insertion in messages:
        return messages
    last_user = max(
        (i for i, m in enumerate(messages) if m.role == "user"),
        default=len(messages) - 1,
    )
    return messages[:last_user] + [insertion] + messages[last_user:]


class RagBackend(Backend):
    """Retrieval-augmented wrapper: augments prompts, then delegates."""

    def __init__(self, inner: Backend, index: CorpusIndex, top_k: int = 3):
        if index is None:
            raise ConfigurationError("RagBackend requires a corpus index")
        self.inner = inner
        self.index = index
        self.top_k = top_k

    def complete(self, request: BackendRequest) -> str:
        user_messages = [m for m in request.messages if m.role == "user"]
        query = user_messages[-1].content if user_messages else ""
        examples = retrieve_examples(query, self.top_k, self.index)
        augmented = augment_prompt(request.messages, examples)
        return self.inner.complete(
            BackendRequest(messages=tuple(augmented), params=request.params)
        )
