"""In-sandbox runner: execute a solution file and a tests file, print one
JSON verdict line.

Invoked by the supervising executor as

    python runner_shim.py <solution_path> <tests_path> \
        --timeout-soft <seconds> --coverage on|off

and prints, as the final stdout line,

    {"status": ..., "asserts": [0/1, ...], "coverage": float|null, "error": str|null}

status is one of passed, failed_assert, compile_error, runtime_error,
timeout. The asserts list holds one 0/1 entry per top-level assert statement
in execution order: module-level asserts in the tests file and asserts
directly in the body of top-level test_* functions are rewritten at the AST
level to record their outcome before (on failure) raising. After the tests
module runs, any top-level test_* function it defined but did not call is
called, in definition order.

With coverage on, the fraction of the target function's executable lines hit
during the whole run is reported. The target is the region between the
`# === BEGIN TARGET ===` and `# === END TARGET ===` comment lines of the
solution file; executable lines are those carrying instructions in any
function-level code object (the def line itself belongs to the enclosing
scope and is not counted). Without markers the coverage field is null.

This file is deliberately standalone: stdlib only, no imports from the
toolkit that drives it. User-code failures of any kind become verdict
records; the shim itself exiting nonzero tells the supervisor the run is
unusable rather than failed.
"""

import argparse
import ast
import json
import signal
import sys
import types

BEGIN_MARKER = "# === BEGIN TARGET ==="
END_MARKER = "# === END TARGET ==="


class _SoftTimeout(BaseException):
    """Raised by the alarm handler; BaseException so user except-clauses
    catching Exception cannot swallow it."""


class _ShimHooks:
    """The single name injected into the user namespace.

    Records per-assert outcomes and which test functions the tests module
    called on its own.
    """

    def __init__(self):
        self.asserts = []
        self.called = set()

    def ok(self):
        self.asserts.append(1)

    def fail(self, message):
        self.asserts.append(0)
        if message is None:
            raise AssertionError()
        raise AssertionError(message)

    def mark(self, name):
        self.called.add(name)


def _instrument_asserts(body, hooks_name):
    """Replace each assert statement in `body` (not recursing into compound
    statements) with an if/else that records the outcome and re-raises on
    failure, evaluating condition and message exactly once each."""
    out = []
    for stmt in body:
        if isinstance(stmt, ast.Assert):
            message = stmt.msg if stmt.msg is not None else ast.Constant(value=None)
            replacement = ast.If(
                test=stmt.test,
                body=[
                    ast.Expr(
                        value=ast.Call(
                            func=ast.Attribute(
                                value=ast.Name(id=hooks_name, ctx=ast.Load()),
                                attr="ok",
                                ctx=ast.Load(),
                            ),
                            args=[],
                            keywords=[],
                        )
                    )
                ],
                orelse=[
                    ast.Expr(
                        value=ast.Call(
                            func=ast.Attribute(
                                value=ast.Name(id=hooks_name, ctx=ast.Load()),
                                attr="fail",
                                ctx=ast.Load(),
                            ),
                            args=[message],
                            keywords=[],
                        )
                    )
                ],
            )
            ast.copy_location(replacement, stmt)
            out.append(replacement)
        else:
            out.append(stmt)
    return out


def _rewrite_tests(tree, hooks_name):
    """Instrument module-level asserts and the bodies of top-level test_*
    functions; prepend a call marker to each test_* function."""
    tree.body = _instrument_asserts(tree.body, hooks_name)
    for node in tree.body:
        if isinstance(node, ast.FunctionDef) and node.name.startswith("test_"):
            marker = ast.Expr(
                value=ast.Call(
                    func=ast.Attribute(
                        value=ast.Name(id=hooks_name, ctx=ast.Load()),
                        attr="mark",
                        ctx=ast.Load(),
                    ),
                    args=[ast.Constant(value=node.name)],
                    keywords=[],
                )
            )
            ast.copy_location(marker, node.body[0])
            node.body = [marker] + _instrument_asserts(node.body, hooks_name)
    ast.fix_missing_locations(tree)
    return tree


def _marker_region(source):
    """Inclusive 1-based line range strictly between the target markers, or
    None when the solution carries no markers."""
    begin = end = None
    for lineno, line in enumerate(source.splitlines(), start=1):
        stripped = line.strip()
        if stripped == BEGIN_MARKER and begin is None:
            begin = lineno
        elif stripped == END_MARKER and begin is not None:
            end = lineno
            break
    if begin is None or end is None or end <= begin + 1:
        return None
    return begin + 1, end - 1


def _function_lines(module_code):
    """Line numbers carrying instructions in every code object nested below
    the module: function bodies, lambdas, comprehensions."""
    lines = set()

    def walk(code):
        for const in code.co_consts:
            if isinstance(const, types.CodeType):
                for _start, _end, line in const.co_lines():
                    if line is not None:
                        lines.add(line)
                walk(const)

    walk(module_code)
    return lines


class _LineCollector:
    def __init__(self, filename):
        self.filename = filename
        self.hit = set()

    def trace(self, frame, event, arg):
        if event == "call":
            if frame.f_code.co_filename != self.filename:
                return None
            return self.trace
        if event == "line":
            self.hit.add(frame.f_lineno)
        return self.trace


def _emit(status, asserts, coverage, error):
    # leading newline: user code may have printed without a trailing one,
    # and the verdict must stand alone as the final stdout line
    sys.stdout.write("\n")
    print(
        json.dumps(
            {
                "status": status,
                "asserts": asserts,
                "coverage": coverage,
                "error": error,
            }
        ),
        flush=True,
    )


def _error_text(prefix, exc):
    text = str(exc)
    if not text:
        text = type(exc).__name__
    return f"{prefix}: {type(exc).__name__}: {text}" if prefix else text


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("solution")
    parser.add_argument("tests")
    parser.add_argument("--timeout-soft", type=float, required=True)
    parser.add_argument("--coverage", choices=["on", "off"], required=True)
    args = parser.parse_args()

    with open(args.solution, encoding="utf-8") as fh:
        solution_source = fh.read()
    with open(args.tests, encoding="utf-8") as fh:
        tests_source = fh.read()

    hooks = _ShimHooks()
    hooks_name = "__shim__"

    try:
        solution_code = compile(solution_source, args.solution, "exec")
    except (SyntaxError, ValueError) as exc:
        _emit("compile_error", [], None, _error_text("solution", exc))
        return

    try:
        tests_tree = _rewrite_tests(ast.parse(tests_source), hooks_name)
        tests_code = compile(tests_tree, args.tests, "exec")
    except (SyntaxError, ValueError) as exc:
        _emit("compile_error", [], None, _error_text("tests", exc))
        return

    collector = None
    region = None
    executable = None
    if args.coverage == "on":
        region = _marker_region(solution_source)
        if region is not None:
            executable = {
                line
                for line in _function_lines(solution_code)
                if region[0] <= line <= region[1]
            }
            if executable:
                collector = _LineCollector(args.solution)

    namespace = {"__name__": "solution_under_test", hooks_name: hooks}

    def coverage_fraction():
        if collector is None or not executable:
            return None
        return len(collector.hit & executable) / len(executable)

    def on_alarm(signum, frame):
        raise _SoftTimeout()

    signal.signal(signal.SIGALRM, on_alarm)
    signal.setitimer(signal.ITIMER_REAL, args.timeout_soft)
    if collector is not None:
        sys.settrace(collector.trace)

    verdict = None
    try:
        phase = "solution"
        exec(solution_code, namespace)

        phase = "tests"
        exec(tests_code, namespace)
        for node in tests_tree.body:
            if (
                isinstance(node, ast.FunctionDef)
                and node.name.startswith("test_")
                and node.name not in hooks.called
            ):
                func = namespace.get(node.name)
                if callable(func):
                    func()
    except _SoftTimeout:
        verdict = ("timeout", f"soft timeout after {args.timeout_soft:g}s")
    except AssertionError as exc:
        if phase == "solution":
            verdict = ("runtime_error", _error_text("solution", exc))
        else:
            verdict = ("failed_assert", str(exc) or "assertion failed")
    except SystemExit as exc:
        verdict = ("runtime_error", f"{phase}: SystemExit: {exc.code}")
    except BaseException as exc:
        verdict = ("runtime_error", _error_text(phase, exc))
    finally:
        # cancel supervision before writing anything: a late alarm must not
        # interrupt verdict emission
        sys.settrace(None)
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, signal.SIG_IGN)

    if verdict is None:
        verdict = ("passed", None)
    _emit(verdict[0], hooks.asserts, coverage_fraction(), verdict[1])


if __name__ == "__main__":
    main()
