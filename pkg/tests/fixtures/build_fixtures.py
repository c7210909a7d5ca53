"""Builds the replay fixture corpus: runs the full pipeline over ten scripted
fragments with a deterministic fake model transport in record mode, then
freezes the transcript, the emitted dataset, and the funnel report.

Run from the repository root:

    python3 tests/fixtures/build_fixtures.py

The script asserts the expected funnel shape so a mis-scripted reply fails
loudly here rather than producing a silently wrong frozen fixture.

Scripted coverage:
- slug_key, merge_spans, parse_duration, rle_encode, Matrix.transpose,
  chunked, ordinal, coerce_flag: pass execution at iteration 0
- merge_spans: first sandbox reply unparseable (regeneration)
- ordinal: first tests reply too weak (regeneration)
- median_value: buggy sandbox program fixed by one debug rewrite
- balanced: three useless debug rewrites, never passes, dropped
- coerce_flag: tests monkeypatch os.system, dropped by the final filter
- rle_encode: all augmentation candidates invalid (no augmented set)
- chunked: instruction replies unparseable twice (docstring fallback)
"""

import re
import sys
import tempfile
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent
TESTS_DIR = FIXTURES.parent
REPLAY = FIXTURES / "replay"
FAKE_SHIM = TESTS_DIR / "fakeshim.py"

sys.path.insert(0, str(TESTS_DIR))

from benchforge.corpus import SourceFragment, write_fragments
from benchforge.executor import EnvironmentManager, Executor
from benchforge.gateway import ChatResponse, LlmGateway, Transcript
from benchforge.pipeline import PipelineSettings, run_pipeline, save_dataset


def fenced(code: str) -> str:
    return f"```python\n{code}```"


def frag(repo, path, name, signature, docstring, body, context, license="mit"):
    return SourceFragment(
        id=f"{repo}:{path}:{name}",
        repo=repo,
        path=path,
        function_name=name,
        signature=signature,
        docstring=docstring,
        body=body,
        file_context=context,
        license=license,
    )


# ---------------------------------------------------------------------------
# Fragment corpus

FRAGMENTS = [
    frag(
        "webkit-tools",
        "src/text/slug.py",
        "slug_key",
        "def slug_key(text):",
        "Turn arbitrary text into a lowercase dash-separated key.",
        '    text = text.strip().lower()\n'
        "    out = []\n"
        "    for ch in text:\n"
        "        if ch.isalnum():\n"
        "            out.append(ch)\n"
        '        elif out and out[-1] != "-":\n'
        '            out.append("-")\n'
        '    return "".join(out).strip("-")\n',
        "import re\n\nMAX_KEY_LENGTH = 64\n\n\ndef collapse_spaces(text):\n"
        '    return re.sub(r"\\s+", " ", text)\n',
    ),
    frag(
        "geo-index",
        "src/geo/spans.py",
        "merge_spans",
        "def merge_spans(spans):",
        "Merge overlapping (start, end) spans and return them sorted.",
        "    if not spans:\n"
        "        return []\n"
        "    ordered = sorted(spans)\n"
        "    merged = [list(ordered[0])]\n"
        "    for start, end in ordered[1:]:\n"
        "        if start <= merged[-1][1]:\n"
        "            merged[-1][1] = max(merged[-1][1], end)\n"
        "        else:\n"
        "            merged.append([start, end])\n"
        "    return [tuple(pair) for pair in merged]\n",
        "EPSILON = 1e-9\n\n\ndef span_length(span):\n    start, end = span\n"
        "    return max(0, end - start)\n",
        license="apache-2.0",
    ),
    frag(
        "ops-scheduler",
        "scheduler/timeparse.py",
        "parse_duration",
        "def parse_duration(text):",
        "Parse a duration like '2h15m' or '90s' into seconds.",
        '    units = {"h": 3600, "m": 60, "s": 1}\n'
        "    total = 0\n"
        '    number = ""\n'
        "    for ch in text.strip():\n"
        "        if ch.isdigit():\n"
        "            number += ch\n"
        "        elif ch in units and number:\n"
        "            total += int(number) * units[ch]\n"
        '            number = ""\n'
        "        else:\n"
        '            raise ValueError(f"bad duration: {text!r}")\n'
        "    if number:\n"
        "        total += int(number)\n"
        "    return total\n",
        "DEFAULT_TIMEOUT = 30\n\n\ndef clamp(value, low, high):\n"
        "    return max(low, min(high, value))\n",
    ),
    frag(
        "imgtools",
        "imgtools/rle.py",
        "rle_encode",
        "def rle_encode(text):",
        "Run-length encode a string as (char, count) pairs.",
        "    pairs = []\n"
        "    for ch in text:\n"
        "        if pairs and pairs[-1][0] == ch:\n"
        "            pairs[-1] = (ch, pairs[-1][1] + 1)\n"
        "        else:\n"
        "            pairs.append((ch, 1))\n"
        "    return pairs\n",
        "SENTINEL = object()\n\n\ndef flatten(pairs):\n    out = []\n"
        "    for ch, count in pairs:\n        out.append(ch * count)\n"
        '    return "".join(out)\n',
        license="bsd-3-clause",
    ),
    frag(
        "mathkit",
        "mathkit/matrix.py",
        "Matrix.transpose",
        "    def transpose(self):",
        "Return a new Matrix with rows and columns swapped.",
        "        return Matrix([list(col) for col in zip(*self.rows)])\n",
        "class Matrix:\n    def __init__(self, rows):\n"
        "        self.rows = [list(r) for r in rows]\n\n    def shape(self):\n"
        "        return (len(self.rows), len(self.rows[0]) if self.rows else 0)\n",
    ),
    frag(
        "streamlib",
        "streamlib/chunks.py",
        "chunked",
        "def chunked(items, size):",
        "Yield lists of up to `size` items from the iterable.",
        "    if size <= 0:\n"
        '        raise ValueError("size must be positive")\n'
        "    batch = []\n"
        "    for item in items:\n"
        "        batch.append(item)\n"
        "        if len(batch) == size:\n"
        "            yield batch\n"
        "            batch = []\n"
        "    if batch:\n"
        "        yield batch\n",
        "def first(iterable, default=None):\n    for item in iterable:\n"
        "        return item\n    return default\n",
    ),
    frag(
        "statkit",
        "statkit/rolling.py",
        "median_value",
        "def median_value(values):",
        "Median of a list of numbers; even lengths average the two middle values.",
        "    ordered = sorted(values)\n"
        "    n = len(ordered)\n"
        "    if n == 0:\n"
        '        raise ValueError("empty input")\n'
        "    middle = n // 2\n"
        "    if n % 2:\n"
        "        return ordered[middle]\n"
        "    return (ordered[middle - 1] + ordered[middle]) / 2\n",
        "def mean_value(values):\n"
        "    return sum(values) / len(values) if values else 0.0\n",
        license="apache-2.0",
    ),
    frag(
        "textfmt",
        "textfmt/numbers.py",
        "ordinal",
        "def ordinal(n):",
        "English ordinal string for an integer (1st, 2nd, 3rd, 4th...).",
        "    if 10 <= n % 100 <= 20:\n"
        '        suffix = "th"\n'
        "    else:\n"
        '        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")\n'
        '    return f"{n}{suffix}"\n',
        "def pluralize(word, count):\n"
        '    return word if count == 1 else word + "s"\n',
    ),
    frag(
        "parsetools",
        "parsetools/brackets.py",
        "balanced",
        "def balanced(text):",
        "Check whether brackets in the text are balanced.",
        '    pairs = {")": "(", "]": "[", "}": "{"}\n'
        "    stack = []\n"
        "    for ch in text:\n"
        '        if ch in "([{":\n'
        "            stack.append(ch)\n"
        "        elif ch in pairs:\n"
        "            if not stack or stack[-1] != pairs[ch]:\n"
        "                return False\n"
        "            stack.pop()\n"
        "    return not stack\n",
        "OPENERS = \"([{\"\n\n\ndef strip_brackets(text):\n"
        "    return text.strip(\"()[]{}\")\n",
    ),
    frag(
        "configlib",
        "configlib/env.py",
        "coerce_flag",
        "def coerce_flag(value):",
        "Interpret a string as a boolean flag.",
        "    if isinstance(value, bool):\n"
        "        return value\n"
        "    text = str(value).strip().lower()\n"
        '    if text in ("1", "true", "yes", "on"):\n'
        "        return True\n"
        '    if text in ("0", "false", "no", "off", ""):\n'
        "        return False\n"
        '    raise ValueError(f"cannot interpret {value!r} as a flag")\n',
        'TRUTHY = ("1", "true", "yes", "on")\n\n\ndef normalize_key(key):\n'
        "    return key.strip().upper()\n",
        license="bsd-3-clause",
    ),
]


# ---------------------------------------------------------------------------
# Sandboxed programs (scripted model output, step 1)

SLUG_PROGRAM = '''\
MAX_KEY_LENGTH = 64


def collapse_spaces(text):
    parts = text.split()
    return " ".join(parts)


def slug_key(text):
    """Turn arbitrary text into a lowercase dash-separated key."""
    text = text.strip().lower()
    out = []
    for ch in text:
        if ch.isalnum():
            out.append(ch)
        elif out and out[-1] != "-":
            out.append("-")
    return "".join(out).strip("-")


def demo():
    samples = ["Hello World", "  A  B  ", "Mixed_Case 42"]
    return [slug_key(collapse_spaces(s)) for s in samples]
'''

SPANS_PROGRAM = '''\
def span_length(span):
    start, end = span
    return max(0, end - start)


def merge_spans(spans):
    """Merge overlapping (start, end) spans and return them sorted."""
    if not spans:
        return []
    ordered = sorted(spans)
    merged = [list(ordered[0])]
    for start, end in ordered[1:]:
        if start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [tuple(pair) for pair in merged]


def total_coverage(spans):
    return sum(span_length(s) for s in merge_spans(spans))
'''

DURATION_PROGRAM = '''\
DEFAULT_TIMEOUT = 30


def clamp(value, low, high):
    return max(low, min(high, value))


def parse_duration(text):
    """Parse a duration like '2h15m' or '90s' into seconds."""
    units = {"h": 3600, "m": 60, "s": 1}
    total = 0
    number = ""
    for ch in text.strip():
        if ch.isdigit():
            number += ch
        elif ch in units and number:
            total += int(number) * units[ch]
            number = ""
        else:
            raise ValueError(f"bad duration: {text!r}")
    if number:
        total += int(number)
    return total


def wait_budget(text):
    return clamp(parse_duration(text), 0, 86400)
'''

RLE_PROGRAM = '''\
def flatten(pairs):
    out = []
    for ch, count in pairs:
        out.append(ch * count)
    return "".join(out)


def rle_encode(text):
    """Run-length encode a string as (char, count) pairs."""
    pairs = []
    for ch in text:
        if pairs and pairs[-1][0] == ch:
            pairs[-1] = (ch, pairs[-1][1] + 1)
        else:
            pairs.append((ch, 1))
    return pairs


def round_trip(text):
    return flatten(rle_encode(text))
'''

MATRIX_PROGRAM = '''\
class Matrix:
    def __init__(self, rows):
        self.rows = [list(r) for r in rows]

    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def transpose(self):
        """Return a new Matrix with rows and columns swapped."""
        return Matrix([list(col) for col in zip(*self.rows)])


def demo():
    m = Matrix([[1, 2, 3], [4, 5, 6]])
    return m.transpose().shape()
'''

CHUNKED_PROGRAM = '''\
def first(iterable, default=None):
    for item in iterable:
        return item
    return default


def chunked(items, size):
    """Yield lists of up to `size` items from the iterable."""
    if size <= 0:
        raise ValueError("size must be positive")
    batch = []
    for item in items:
        batch.append(item)
        if len(batch) == size:
            yield batch
            batch = []
    if batch:
        yield batch


def head_of_chunks(items, size):
    return first(chunked(items, size), default=[])
'''

MEDIAN_PROGRAM_BUGGY = '''\
def mean_value(values):
    total = sum(values)
    return total / len(values) if values else 0.0


def median_value(values):
    """Median of a list of numbers; even lengths average the two middle values."""
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        raise ValueError("empty input")
    middle = n // 2
    return ordered[middle]


def summarize(values):
    return {"mean": mean_value(values), "median": median_value(values)}
'''

MEDIAN_PROGRAM_FIXED = MEDIAN_PROGRAM_BUGGY.replace(
    "    middle = n // 2\n    return ordered[middle]\n",
    "    middle = n // 2\n"
    "    if n % 2:\n"
    "        return ordered[middle]\n"
    "    return (ordered[middle - 1] + ordered[middle]) / 2\n",
)

ORDINAL_PROGRAM = '''\
def pluralize(word, count):
    return word if count == 1 else word + "s"


def ordinal(n):
    """English ordinal string for an integer (1st, 2nd, 3rd, 4th...)."""
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def describe_position(n):
    return f"finished in {ordinal(n)} place"
'''

BALANCED_PROGRAM_BUGGY = '''\
OPENERS = "([{"


def strip_brackets(text):
    return text.strip("()[]{}")


def balanced(text):
    """Check whether brackets in the text are balanced."""
    pairs = {")": "(", "]": "[", "}": "{"}
    stack = []
    for ch in text:
        if ch in "([{":
            stack.append(ch)
        elif ch in pairs:
            if not stack or stack[-1] != pairs[ch]:
                return False
            stack.pop()
    return True


def describe(text):
    state = "balanced" if balanced(text) else "unbalanced"
    return f"{text!r} is {state}"
'''

FLAG_PROGRAM = '''\
TRUTHY = ("1", "true", "yes", "on")


def normalize_key(key):
    return key.strip().upper()


def coerce_flag(value):
    """Interpret a string as a boolean flag."""
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"cannot interpret {value!r} as a flag")


def flag_from_pair(key, value):
    return (normalize_key(key), coerce_flag(value))
'''


# ---------------------------------------------------------------------------
# Test sets (scripted model output, step 2)

SLUG_TESTS = '''\
def test_slug_basic():
    assert slug_key("Hello World") == "hello-world"
    assert slug_key("  spaced  out  ") == "spaced-out"


def test_slug_edges():
    assert slug_key("Mixed_Case 42") == "mixed-case-42"
    assert slug_key("---") == ""


test_slug_basic()
test_slug_edges()
'''

SPANS_TESTS = '''\
def test_merge_overlapping():
    assert merge_spans([(1, 4), (2, 6)]) == [(1, 6)]
    assert merge_spans([(5, 7), (1, 2)]) == [(1, 2), (5, 7)]


def test_merge_empty_and_touching():
    assert merge_spans([]) == []
    assert merge_spans([(1, 2), (2, 3)]) == [(1, 3)]


test_merge_overlapping()
test_merge_empty_and_touching()
'''

DURATION_TESTS = '''\
def test_parse_duration_units():
    assert parse_duration("2h15m") == 8100
    assert parse_duration("90s") == 90
    assert parse_duration("45") == 45


def test_parse_duration_rejects_garbage():
    try:
        parse_duration("2x")
    except ValueError:
        pass
    else:
        assert False, "expected ValueError"


test_parse_duration_units()
test_parse_duration_rejects_garbage()
'''

RLE_TESTS = '''\
def test_rle_basic():
    assert rle_encode("aaabcc") == [("a", 3), ("b", 1), ("c", 2)]
    assert rle_encode("") == []


def test_rle_round_trip():
    pairs = rle_encode("xxyyzz")
    assert pairs == [("x", 2), ("y", 2), ("z", 2)]
    assert "".join(ch * n for ch, n in pairs) == "xxyyzz"


test_rle_basic()
test_rle_round_trip()
'''

MATRIX_TESTS = '''\
def test_transpose_shape():
    m = Matrix([[1, 2, 3], [4, 5, 6]])
    t = m.transpose()
    assert t.shape() == (3, 2)
    assert t.rows == [[1, 4], [2, 5], [3, 6]]


def test_transpose_twice():
    m = Matrix([[7, 8]])
    assert m.transpose().transpose().rows == [[7, 8]]


test_transpose_shape()
test_transpose_twice()
'''

CHUNKED_TESTS = '''\
def test_chunked_even():
    assert list(chunked([1, 2, 3, 4], 2)) == [[1, 2], [3, 4]]


def test_chunked_remainder_and_errors():
    assert list(chunked("abcde", 2)) == [["a", "b"], ["c", "d"], ["e"]]
    assert list(chunked([], 3)) == []
    try:
        list(chunked([1], 0))
    except ValueError:
        pass
    else:
        assert False, "expected ValueError"


test_chunked_even()
test_chunked_remainder_and_errors()
'''

MEDIAN_TESTS = '''\
def test_median_odd():
    assert median_value([3, 1, 2]) == 2
    assert median_value([5]) == 5


def test_median_even():
    assert median_value([1, 2, 3, 4]) == 2.5
    assert median_value([4, 2]) == 3.0


test_median_odd()
test_median_even()
'''

ORDINAL_TESTS_WEAK = '''\
assert ordinal(1) == "1st"
assert ordinal(2) == "2nd"
'''

ORDINAL_TESTS = '''\
def test_ordinal_small():
    assert ordinal(1) == "1st"
    assert ordinal(2) == "2nd"
    assert ordinal(3) == "3rd"
    assert ordinal(4) == "4th"


def test_ordinal_teens():
    assert ordinal(11) == "11th"
    assert ordinal(12) == "12th"
    assert ordinal(21) == "21st"
    assert ordinal(112) == "112th"


test_ordinal_small()
test_ordinal_teens()
'''

BALANCED_TESTS = '''\
def test_balanced_pairs():
    assert balanced("([]{})") is True
    assert balanced("(]") is False
    assert balanced("((") is False


def test_balanced_empty():
    assert balanced("") is True


test_balanced_pairs()
test_balanced_empty()
'''

FLAG_TESTS = '''\
import os
os.system = lambda *_: 0


def test_flags():
    assert coerce_flag("YES") is True
    assert coerce_flag("0") is False
    assert coerce_flag(True) is True


test_flags()
'''


# ---------------------------------------------------------------------------
# Instruction and augmentation replies


def instruction_reply(functionality, inputs, outputs):
    return f"Functionality: {functionality}\nInputs: {inputs}\nOutputs: {outputs}\n"


INSTRUCTIONS = {
    "slug_key": instruction_reply(
        "Converts text into a lowercase key where runs of non-alphanumeric "
        "characters become single dashes, with no leading or trailing dash.",
        "text, a string.",
        "The cleaned-up key string, possibly empty.",
    ),
    "merge_spans": instruction_reply(
        "Merges overlapping or touching (start, end) spans into the smallest "
        "sorted list of disjoint spans.",
        "spans, an iterable of (start, end) pairs.",
        "A sorted list of disjoint (start, end) tuples.",
    ),
    "parse_duration": instruction_reply(
        "Parses a compact duration string with h, m, and s units into a "
        "number of seconds; a bare trailing number counts as seconds.",
        "text, a duration string such as '2h15m' or '90s'.",
        "The total number of seconds as an int; raises ValueError on bad input.",
    ),
    "rle_encode": instruction_reply(
        "Run-length encodes a string into consecutive (character, count) pairs.",
        "text, the string to encode.",
        "A list of (character, count) tuples in input order.",
    ),
    "Matrix.transpose": instruction_reply(
        "Builds a new Matrix whose rows are the columns of this one.",
        "self, a Matrix with rectangular rows.",
        "A new Matrix with rows and columns swapped.",
    ),
    "median_value": instruction_reply(
        "Computes the median of a list of numbers, averaging the two middle "
        "values when the list length is even.",
        "values, a non-empty list of numbers.",
        "The median as an int or float; raises ValueError for empty input.",
    ),
    "ordinal": instruction_reply(
        "Formats an integer as an English ordinal, handling the 11th-13th "
        "teens specially.",
        "n, a non-negative integer.",
        "The ordinal string, such as '1st' or '12th'.",
    ),
    "coerce_flag": instruction_reply(
        "Interprets a value as a boolean flag, accepting common textual "
        "spellings of true and false.",
        "value, a bool or a string such as 'yes' or '0'.",
        "True or False; raises ValueError for unrecognized text.",
    ),
}

AUGMENTS = {
    "slug_key": '''\
def test_slug_more():
    assert slug_key("a--b") == "a-b"
    assert slug_key("UPPER") == "upper"
    assert slug_key("") == ""


test_slug_more()
''',
    "merge_spans": '''\
def test_spans_more():
    assert merge_spans([(0, 1)]) == [(0, 1)]
    assert merge_spans([(3, 4), (1, 5)]) == [(1, 5)]
    assert merge_spans([(1, 2), (4, 5), (2, 3)]) == [(1, 3), (4, 5)]


test_spans_more()
''',
    "parse_duration": '''\
def test_duration_more():
    assert parse_duration("1h") == 3600
    assert parse_duration("1h1m1s") == 3661
    assert parse_duration("0s") == 0


test_duration_more()
''',
    "Matrix.transpose": '''\
def test_transpose_more():
    m = Matrix([[1]])
    assert m.transpose().rows == [[1]]
    square = Matrix([[1, 2], [3, 4]])
    assert square.transpose().rows == [[1, 3], [2, 4]]
    assert square.transpose().shape() == (2, 2)


test_transpose_more()
''',
    "chunked": '''\
def test_chunked_more():
    assert list(chunked([1, 2, 3], 5)) == [[1, 2, 3]]
    assert list(chunked([1, 2, 3, 4, 5, 6], 3)) == [[1, 2, 3], [4, 5, 6]]
    assert list(chunked("ab", 1)) == [["a"], ["b"]]


test_chunked_more()
''',
    "median_value": '''\
def test_median_more():
    assert median_value([1, 1, 1]) == 1
    assert median_value([2, 4]) == 3.0
    assert median_value([9, 1, 5, 3]) == 4.0


test_median_more()
''',
    "ordinal": '''\
def test_ordinal_more():
    assert ordinal(22) == "22nd"
    assert ordinal(33) == "33rd"
    assert ordinal(100) == "100th"


test_ordinal_more()
''',
    "coerce_flag": '''\
def test_flag_more():
    assert coerce_flag("on") is True
    assert coerce_flag("Off") is False
    assert coerce_flag(False) is False


test_flag_more()
''',
}

FILLER = "pass"
RLE_WEAK_AUGMENT = 'assert rle_encode("a") == [("a", 1)]\nassert rle_encode("") == []\n'

MEDIAN_DEBUG_REPLY = fenced(MEDIAN_PROGRAM_FIXED + "\n\n" + MEDIAN_TESTS)
BALANCED_DEBUG_REPLY = fenced(BALANCED_PROGRAM_BUGGY + "\n\n" + BALANCED_TESTS)


def build_script():
    """(kind, function_name) -> FIFO list of responses; each response is a
    list of samples."""
    return {
        ("sandbox", "slug_key"): [[fenced(SLUG_PROGRAM)]],
        ("sandbox", "merge_spans"): [
            ["```python\ndef merge_spans(spans:\n    broken\n```"],
            [fenced(SPANS_PROGRAM)],
        ],
        ("sandbox", "parse_duration"): [[fenced(DURATION_PROGRAM)]],
        ("sandbox", "rle_encode"): [[fenced(RLE_PROGRAM)]],
        ("sandbox", "Matrix.transpose"): [[fenced(MATRIX_PROGRAM)]],
        ("sandbox", "chunked"): [[fenced(CHUNKED_PROGRAM)]],
        ("sandbox", "median_value"): [[fenced(MEDIAN_PROGRAM_BUGGY)]],
        ("sandbox", "ordinal"): [[fenced(ORDINAL_PROGRAM)]],
        ("sandbox", "balanced"): [[fenced(BALANCED_PROGRAM_BUGGY)]],
        ("sandbox", "coerce_flag"): [[fenced(FLAG_PROGRAM)]],
        ("tests", "slug_key"): [[fenced(SLUG_TESTS)]],
        ("tests", "merge_spans"): [[fenced(SPANS_TESTS)]],
        ("tests", "parse_duration"): [[fenced(DURATION_TESTS)]],
        ("tests", "rle_encode"): [[fenced(RLE_TESTS)]],
        ("tests", "Matrix.transpose"): [[fenced(MATRIX_TESTS)]],
        ("tests", "chunked"): [[fenced(CHUNKED_TESTS)]],
        ("tests", "median_value"): [[fenced(MEDIAN_TESTS)]],
        ("tests", "ordinal"): [[fenced(ORDINAL_TESTS_WEAK)], [fenced(ORDINAL_TESTS)]],
        ("tests", "balanced"): [[fenced(BALANCED_TESTS)]],
        ("tests", "coerce_flag"): [[fenced(FLAG_TESTS)]],
        ("debug", "median_value"): [[MEDIAN_DEBUG_REPLY]],
        ("debug", "balanced"): [
            [BALANCED_DEBUG_REPLY],
            [BALANCED_DEBUG_REPLY],
            [BALANCED_DEBUG_REPLY],
        ],
        ("instruction", "slug_key"): [[INSTRUCTIONS["slug_key"]]],
        ("instruction", "merge_spans"): [[INSTRUCTIONS["merge_spans"]]],
        ("instruction", "parse_duration"): [[INSTRUCTIONS["parse_duration"]]],
        ("instruction", "rle_encode"): [[INSTRUCTIONS["rle_encode"]]],
        ("instruction", "Matrix.transpose"): [[INSTRUCTIONS["Matrix.transpose"]]],
        ("instruction", "chunked"): [
            ["This helper takes an iterable and gives you batches."],
            ["Sorry, I can only describe it informally."],
        ],
        ("instruction", "median_value"): [[INSTRUCTIONS["median_value"]]],
        ("instruction", "ordinal"): [[INSTRUCTIONS["ordinal"]]],
        ("instruction", "coerce_flag"): [[INSTRUCTIONS["coerce_flag"]]],
        ("augment", "slug_key"): [[fenced(AUGMENTS["slug_key"])] + [FILLER] * 4],
        ("augment", "merge_spans"): [[fenced(AUGMENTS["merge_spans"])] + [FILLER] * 4],
        ("augment", "parse_duration"): [
            [fenced(AUGMENTS["parse_duration"])] + [FILLER] * 4
        ],
        ("augment", "rle_encode"): [[RLE_WEAK_AUGMENT] * 5],
        ("augment", "Matrix.transpose"): [
            [fenced(AUGMENTS["Matrix.transpose"])] + [FILLER] * 4
        ],
        ("augment", "chunked"): [[fenced(AUGMENTS["chunked"])] + [FILLER] * 4],
        ("augment", "median_value"): [[fenced(AUGMENTS["median_value"])] + [FILLER] * 4],
        ("augment", "ordinal"): [[fenced(AUGMENTS["ordinal"])] + [FILLER] * 4],
        ("augment", "coerce_flag"): [[fenced(AUGMENTS["coerce_flag"])] + [FILLER] * 4],
    }


_KIND_MARKERS = [
    ("Rewrite the code fragment", "sandbox"),
    ("Write tests for the function", "tests"),
    ("The script below failed", "debug"),
    ("Describe the function", "instruction"),
    ("Write one more independent set", "augment"),
]
_NAME_RE = re.compile(r"function (\S+?)[ ,]")


def classify(prompt: str) -> tuple[str, str]:
    kind = next((k for marker, k in _KIND_MARKERS if marker in prompt), None)
    if kind is None:
        raise AssertionError(f"unrecognized prompt: {prompt[:80]!r}")
    found = _NAME_RE.search(prompt)
    if not found:
        raise AssertionError(f"no function name in prompt: {prompt[:80]!r}")
    return kind, found.group(1)


def make_transport(script):
    def transport(request):
        prompt = request.messages[0]["content"]
        key = classify(prompt)
        queue = script.get(key)
        if not queue:
            raise AssertionError(f"no scripted reply left for {key}")
        return ChatResponse(samples=queue.pop(0), model=request.model)

    return transport


class Ticker:
    def __init__(self):
        self.now = 1_700_000_000.0

    def __call__(self):
        self.now += 1.0
        return self.now


def main():
    REPLAY.mkdir(parents=True, exist_ok=True)
    write_fragments(FRAGMENTS, REPLAY / "fragments.jsonl")

    script = build_script()
    transcript = Transcript()
    gateway = LlmGateway(
        transport=make_transport(script),
        transcript=transcript,
        mode="record",
        clock=Ticker(),
    )
    executor = Executor(shim_path=FAKE_SHIM)
    settings = PipelineSettings(model="gen-model", augment_model="aug-model")
    with tempfile.TemporaryDirectory() as tmp:
        result = run_pipeline(
            FRAGMENTS, gateway, executor, EnvironmentManager(Path(tmp) / "envs"), settings
        )

    leftovers = {key: queue for key, queue in script.items() if queue}
    assert not leftovers, f"unconsumed scripted replies: {sorted(leftovers)}"

    funnel = result.funnel.to_record()
    assert funnel["input_fragments"] == 10
    assert funnel["prefilter"]["accepted"] == 10
    assert funnel["sandbox"]["accepted"] == 10
    assert funnel["test_generation"]["accepted"] == 10
    assert funnel["execute_debug"]["cumulative_passed"] == [8, 9, 9, 9]
    assert funnel["execute_debug"]["failed"] == 1
    assert funnel["post_processing"] == {
        "entered": 9,
        "accepted": 8,
        "dropped": {"banned_keyword": 1},
    }
    assert funnel["emitted"] == 8
    result.funnel.check_conservation()

    by_id = {ex.id: ex for ex in result.examples}
    assert len(by_id) == 8
    assert "configlib:configlib/env.py:coerce_flag" not in by_id
    assert "parsetools:parsetools/brackets.py:balanced" not in by_id
    chunk_ex = by_id["streamlib:streamlib/chunks.py:chunked"]
    assert chunk_ex.metadata["instruction_degraded"]
    rle_ex = by_id["imgtools:imgtools/rle.py:rle_encode"]
    assert len(rle_ex.test_sets) == 1
    median_ex = by_id["statkit:statkit/rolling.py:median_value"]
    assert median_ex.metadata["debug_iterations"] == 1
    assert "ordered[middle - 1]" in median_ex.target

    transcript.save(REPLAY / "transcript.jsonl")
    save_dataset(result.examples, REPLAY / "dataset.jsonl")
    result.funnel.save(REPLAY / "funnel.json")
    print(f"wrote {len(result.examples)} examples, {len(transcript)} transcript entries")


if __name__ == "__main__":
    main()
