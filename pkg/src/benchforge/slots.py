"""Marking, splitting, and reassembling the completion region of a program.

A benchmark example stores its program as a frame (everything around the
function body to be generated, with a marker comment pair where the body
belongs) plus the target body itself. The markers are plain comments, so a
marked program still parses, tokenizes, and runs identically; the execution
shim uses the same marker pair to decide which lines count for coverage.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

from .errors import SlotError

# The shim treats these exact strings (after leading whitespace) as the
# coverage region boundary, so they are part of the execution protocol.
BEGIN_TARGET_MARKER = "# === BEGIN TARGET ==="
END_TARGET_MARKER = "# === END TARGET ==="


@dataclass
class SlotSplit:
    frame: str  # whole program with the target body replaced by the marker pair
    target: str  # body statements, original indentation, trailing newline
    header: str  # def line(s) plus docstring, exactly as written
    indent: str  # indentation of the target statements


def _terminal_name(function_name: str) -> str:
    return function_name.rsplit(".", 1)[-1]


def _iter_functions(tree: ast.Module):
    """Yield (class_name_stack, function_node) in source order."""

    def walk(node: ast.AST, stack: tuple[str, ...]):
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                yield stack, child
                yield from walk(child, stack)
            elif isinstance(child, ast.ClassDef):
                yield from walk(child, stack + (child.name,))
            else:
                yield from walk(child, stack)

    yield from walk(tree, ())


def find_function(tree: ast.Module, function_name: str):
    """Locate the def for `function_name`, which may be dotted (Class.method).

    A dotted name prefers a match whose enclosing class chain ends with the
    given qualifier; otherwise the first def with the same terminal name wins.
    """
    parts = function_name.split(".")
    terminal = parts[-1]
    qualifier = tuple(parts[:-1])
    fallback = None
    for stack, node in _iter_functions(tree):
        if node.name != terminal:
            continue
        if qualifier and stack[-len(qualifier) :] == qualifier:
            return node
        if fallback is None:
            fallback = node
    if fallback is None:
        raise SlotError(f"function {function_name!r} not found")
    return fallback


def _leading_whitespace(line: str) -> str:
    return line[: len(line) - len(line.lstrip())]


def split_target(code: str, function_name: str) -> SlotSplit:
    """Split `code` into a marked frame and the body of `function_name`.

    The header keeps the signature and docstring; the target is everything
    after them. One-line defs and bodies that are only a docstring cannot be
    split into a meaningful completion task and raise SlotError.
    """
    try:
        tree = ast.parse(code)
    except SyntaxError as exc:
        raise SlotError(f"code does not parse: {exc.msg} (line {exc.lineno})") from exc
    node = find_function(tree, function_name)
    body = node.body
    if body[0].lineno == node.lineno:
        raise SlotError(f"{function_name!r} is a one-liner; nothing to split")
    has_docstring = (
        isinstance(body[0], ast.Expr)
        and isinstance(body[0].value, ast.Constant)
        and isinstance(body[0].value.value, str)
    )
    if has_docstring:
        if len(body) == 1:
            raise SlotError(f"{function_name!r} body is only a docstring")
        target_first = body[1].lineno
    else:
        target_first = body[0].lineno
    lines = code.splitlines()
    target_lines = lines[target_first - 1 : node.end_lineno]
    indent = _leading_whitespace(target_lines[0])
    frame_lines = (
        lines[: target_first - 1]
        + [indent + BEGIN_TARGET_MARKER, indent + END_TARGET_MARKER]
        + lines[node.end_lineno :]
    )
    header_lines = lines[node.lineno - 1 : target_first - 1]
    return SlotSplit(
        frame="\n".join(frame_lines) + "\n",
        target="\n".join(target_lines) + "\n",
        header="\n".join(header_lines) + "\n",
        indent=indent,
    )


def _marker_indices(code: str) -> tuple[list[str], int, int]:
    lines = code.splitlines()
    begins = [i for i, ln in enumerate(lines) if ln.strip() == BEGIN_TARGET_MARKER]
    ends = [i for i, ln in enumerate(lines) if ln.strip() == END_TARGET_MARKER]
    if len(begins) != 1 or len(ends) != 1:
        raise SlotError(
            f"expected exactly one marker pair, found {len(begins)} begin / {len(ends)} end"
        )
    if begins[0] >= ends[0]:
        raise SlotError("target markers are out of order")
    return lines, begins[0], ends[0]


def assemble(frame: str, target: str) -> str:
    """Insert `target` between the frame's markers, keeping the markers."""
    lines, begin, end = _marker_indices(frame)
    new_lines = lines[: begin + 1] + target.splitlines() + lines[end:]
    return "\n".join(new_lines) + "\n"


def target_span(code: str) -> tuple[int, int]:
    """Inclusive 1-based line range strictly between the markers.

    An empty region yields start > end, which selects nothing.
    """
    _, begin, end = _marker_indices(code)
    return (begin + 2, end)


def strip_markers(code: str) -> str:
    """Remove the marker lines, restoring an unmarked program."""
    lines = [
        ln
        for ln in code.splitlines()
        if ln.strip() not in (BEGIN_TARGET_MARKER, END_TARGET_MARKER)
    ]
    return "\n".join(lines) + "\n" if lines else ""


def render_placeholder(frame: str, placeholder: str = "...") -> str:
    """Replace the marker region with a single placeholder line, for prompts."""
    lines, begin, end = _marker_indices(frame)
    indent = _leading_whitespace(lines[begin])
    new_lines = lines[:begin] + [indent + placeholder] + lines[end + 1 :]
    return "\n".join(new_lines) + "\n"


def calls_function(code_or_tree: str | ast.AST, function_name: str) -> bool:
    """True if the code calls `function_name` (matched on its terminal name,
    directly or as a method/attribute)."""
    if isinstance(code_or_tree, str):
        try:
            tree: ast.AST = ast.parse(code_or_tree)
        except SyntaxError:
            return False
    else:
        tree = code_or_tree
    terminal = _terminal_name(function_name)
    for node in ast.walk(tree):
        if not isinstance(node, ast.Call):
            continue
        func = node.func
        if isinstance(func, ast.Name) and func.id == terminal:
            return True
        if isinstance(func, ast.Attribute) and func.attr == terminal:
            return True
    return False
