"""Prompt construction from the bundled templates.

Templates use string.Template placeholders (${name}); values are substituted
once and never re-scanned, so code containing braces or dollar signs in the
substituted values cannot break rendering.
"""

from __future__ import annotations

from importlib import resources
from string import Template

from ..corpus import SourceFragment

_CACHE: dict[str, Template] = {}


def render(template_name: str, **values: str) -> str:
    template = _CACHE.get(template_name)
    if template is None:
        text = (
            resources.files("benchforge.templates")
            .joinpath(f"{template_name}.txt")
            .read_text("utf-8")
        )
        template = Template(text)
        _CACHE[template_name] = template
    return template.substitute(**values)


def function_source(fragment: SourceFragment) -> str:
    """The fragment's function as displayable source: signature, docstring
    (indented one level when present), body."""
    parts = [fragment.signature.rstrip("\n")]
    if fragment.docstring.strip():
        doc = fragment.docstring.strip("\n")
        parts.append(f'    """{doc}"""')
    parts.append(fragment.body.rstrip("\n"))
    return "\n".join(parts) + "\n"


def sandbox_prompt(fragment: SourceFragment) -> str:
    return render(
        "sandbox",
        function_name=fragment.function_name,
        function_source=function_source(fragment),
        file_context=fragment.file_context.rstrip("\n"),
    )


def tests_prompt(function_name: str, program: str) -> str:
    return render("tests", function_name=function_name, program=program.rstrip("\n"))


def debug_prompt(function_name: str, script: str, status: str, detail: str) -> str:
    return render(
        "debug",
        function_name=function_name,
        script=script.rstrip("\n"),
        status=status,
        detail=detail,
    )


def instruction_prompt(function_name: str, program: str) -> str:
    return render("instruction", function_name=function_name, program=program.rstrip("\n"))


def augment_prompt(function_name: str, program: str, existing_tests: str) -> str:
    return render(
        "augment",
        function_name=function_name,
        program=program.rstrip("\n"),
        existing_tests=existing_tests.rstrip("\n"),
    )


def eval_prompt(function_name: str, code: str) -> str:
    return render("eval_prompt", function_name=function_name, code=code.rstrip("\n"))


def refine_prompt(task: str, code: str, feedback: str) -> str:
    return render(
        "refine",
        task=task.rstrip("\n"),
        code=code.rstrip("\n"),
        feedback=feedback.rstrip("\n"),
    )
