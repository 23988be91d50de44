"""Materialize accepted generated code into a local ``ai`` source module.

Each injection renames the generated entry function and appends it to
``ai.py`` in the configured directory: import lines are deduplicated at the
top, one top-level function per inject, and everything else in the file
(user edits included) is preserved. Name collisions are refused unless
overwrite is requested, in which case only the colliding function block is
replaced.
"""

from __future__ import annotations

import ast
from pathlib import Path

from .errors import InjectionError

ENTRY_NAME = "execute"

MODULE_NAME = "ai"


def split_generated(source: str, new_name: str) -> tuple[list[str], str]:
    """Split generated code into (import lines, renamed function block)."""
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise InjectionError(f"generated code does not parse: {exc}") from exc

    lines = source.splitlines()
    entry = None
    import_rows: set[int] = set()
    for node in tree.body:
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            import_rows.update(range(node.lineno, node.end_lineno + 1))
        elif isinstance(node, ast.FunctionDef) and node.name == ENTRY_NAME:
            entry = node
    if entry is None:
        raise InjectionError(f"generated code defines no '{ENTRY_NAME}' function")

    def_row = entry.lineno - 1
    lines[def_row] = lines[def_row].replace(
        f"def {ENTRY_NAME}(", f"def {new_name}(", 1
    )

    imports = [lines[i - 1] for i in sorted(import_rows)]
    body_lines = [
        line for i, line in enumerate(lines, start=1) if i not in import_rows
    ]
    body = "\n".join(body_lines).strip("\n")
    return imports, body


def _existing_layout(text: str, path: Path):
    """Top-level defs, import lines, and the import-insertion row (0-based)."""
    try:
        tree = ast.parse(text)
    except SyntaxError as exc:
        raise InjectionError(
            f"{path} is not valid Python; fix it before injecting: {exc}"
        ) from exc
    defs: dict[str, tuple[int, int]] = {}
    insert_row = 0
    import_lines: set[str] = set()
    lines = text.splitlines()
    if tree.body and ast.get_docstring(tree) is not None:
        insert_row = tree.body[0].end_lineno  # imports go below the docstring
    for node in tree.body:
        if isinstance(node, ast.FunctionDef):
            defs[node.name] = (node.lineno, node.end_lineno)
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            insert_row = max(insert_row, node.end_lineno)
            for i in range(node.lineno, node.end_lineno + 1):
                import_lines.add(lines[i - 1].strip())
    return defs, import_lines, insert_row


def materialize(
    source: str, function_name: str, target: Path, overwrite: bool = False
) -> Path:
    """Append generated code as ``function_name`` to the target module."""
    imports, body = split_generated(source, function_name)

    if not target.exists():
        pieces = []
        if imports:
            pieces.append("\n".join(imports))
        pieces.append(body)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text("\n\n\n".join(pieces) + "\n", encoding="utf-8")
        return target

    text = target.read_text(encoding="utf-8")
    defs, _, _ = _existing_layout(text, target)

    if function_name in defs and not overwrite:
        raise InjectionError(
            f"function {function_name!r} already exists in {target}; "
            "pass overwrite=True to replace it"
        )

    if function_name in defs:
        lines = text.splitlines()
        start, end = defs[function_name]
        del lines[start - 1 : end]
        # drop blank lines left behind at the removal point
        while start - 1 < len(lines) and not lines[start - 1].strip():
            del lines[start - 1]
        text = "\n".join(lines)

    # re-derive the layout after any removal so the insertion row is current
    _, existing_imports, insert_row = _existing_layout(text, target)
    lines = text.splitlines()
    missing = [imp for imp in imports if imp.strip() not in existing_imports]
    if missing:
        lines[insert_row:insert_row] = missing

    updated = "\n".join(lines).rstrip("\n")
    updated = f"{updated}\n\n\n{body}\n" if updated else f"{body}\n"
    target.write_text(updated, encoding="utf-8")
    return target


def injection_instructions(function_name: str) -> str:
    """The manual steps printed after a successful inject."""
    return (
        "Manual injection procedure\n"
        "First add, if not already present, the following import statement:\n\n"
        f"    import {MODULE_NAME}\n\n"
        "Then replace the conversation calls with the function call:\n\n"
        f"    {MODULE_NAME}.{function_name}(gdf1, gdf2, ...)\n\n"
        "Make sure to adjust the function call with the correct parameters."
    )
