"""Code metrics and evaluation statistics.

Everything here is a pure function: token counts and tree depth over source
text, variable extraction, BLEU and Jaccard similarity, the unbiased pass@k
estimator, and equal-size quantile breakdowns of per-example scores.
"""

from __future__ import annotations

import ast
import io
import math
import tokenize
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .errors import CodeParseError

# Token types that are layout or bookkeeping rather than code content.
_NONCONTENT_TOKENS = frozenset(
    (
        tokenize.COMMENT,
        tokenize.NL,
        tokenize.NEWLINE,
        tokenize.INDENT,
        tokenize.DEDENT,
        tokenize.ENCODING,
        tokenize.ENDMARKER,
    )
)

_STDLIB_MODULES: frozenset[str] | None = None


def stdlib_modules() -> frozenset[str]:
    """Top-level standard-library module names from the bundled pinned list.

    Bundled (rather than probed from the running interpreter) so that import
    classification does not change with the analysis host environment.
    """
    global _STDLIB_MODULES
    if _STDLIB_MODULES is None:
        text = resources.files("benchforge.data").joinpath("stdlib_modules.txt").read_text("utf-8")
        names = [ln.strip() for ln in text.splitlines()]
        _STDLIB_MODULES = frozenset(n for n in names if n and not n.startswith("#"))
    return _STDLIB_MODULES


@dataclass
class CodeMetrics:
    code_tokens: int
    ast_depth: int
    variables: set[str]
    stdlib_imports: set[str]
    external_imports: set[str]
    function_calls_in_target: int


def code_token_strings(code: str) -> list[str]:
    """Lexical content tokens of `code`, in order, as strings.

    Comments, blank-line/indentation bookkeeping, and encoding/end markers are
    excluded, so the count is stable under comment insertion and trailing
    whitespace edits.
    """
    try:
        toks = list(tokenize.generate_tokens(io.StringIO(code).readline))
    except (tokenize.TokenError, IndentationError, SyntaxError) as exc:
        raise CodeParseError(f"tokenization failed: {exc}") from exc
    return [t.string for t in toks if t.type not in _NONCONTENT_TOKENS]


def count_code_tokens(code: str) -> int:
    return len(code_token_strings(code))


def parse_module(code: str) -> ast.Module:
    try:
        return ast.parse(code)
    except SyntaxError as exc:
        raise CodeParseError(
            f"parse failed: {exc.msg}", line=exc.lineno, offset=exc.offset
        ) from exc


# Leaf marker nodes (expression contexts, operator tags) say nothing about
# structure, so they do not add a level.
_MARKER_NODES = (ast.expr_context, ast.boolop, ast.operator, ast.unaryop, ast.cmpop)


def tree_depth(node: ast.AST, _depth: int = 1) -> int:
    """Maximum node depth of the parse tree, counting the module node as 1."""
    best = _depth
    for child in ast.iter_child_nodes(node):
        if isinstance(child, _MARKER_NODES):
            continue
        d = tree_depth(child, _depth + 1)
        if d > best:
            best = d
    return best


def _in_span(node: ast.AST, span: tuple[int, int] | None) -> bool:
    if span is None:
        return True
    lineno = getattr(node, "lineno", None)
    return lineno is not None and span[0] <= lineno <= span[1]


def _bound_names(tree: ast.AST, span: tuple[int, int] | None) -> set[str]:
    """Identifiers bound within the span: parameters, assignment targets
    (plain, augmented, annotated, walrus), and loop/with/comprehension
    targets. Attribute and subscript stores bind no variable, and import
    aliases and def/class names are not counted. Span membership is judged
    at the bound name itself, not the enclosing statement."""
    names: set[str] = set()

    def add_target(t: ast.AST) -> None:
        if isinstance(t, ast.Name):
            if _in_span(t, span):
                names.add(t.id)
        elif isinstance(t, (ast.Tuple, ast.List)):
            for elt in t.elts:
                add_target(elt)
        elif isinstance(t, ast.Starred):
            add_target(t.value)

    for node in ast.walk(tree):
        if isinstance(node, ast.arg):
            if _in_span(node, span):
                names.add(node.arg)
        elif isinstance(node, ast.Assign):
            for t in node.targets:
                add_target(t)
        elif isinstance(node, (ast.AugAssign, ast.AnnAssign, ast.NamedExpr)):
            add_target(node.target)
        elif isinstance(node, (ast.For, ast.AsyncFor)):
            add_target(node.target)
        elif isinstance(node, ast.withitem):
            if node.optional_vars is not None:
                add_target(node.optional_vars)
        elif isinstance(node, ast.comprehension):
            add_target(node.target)
    return names


def _import_roots(tree: ast.AST) -> set[str]:
    roots: set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                roots.add(alias.name.split(".")[0])
        elif isinstance(node, ast.ImportFrom):
            if node.module and node.level == 0:
                roots.add(node.module.split(".")[0])
    return roots


def compute_metrics(code: str, target_span: tuple[int, int] | None = None) -> CodeMetrics:
    """Structural metrics of `code`.

    `target_span` is an inclusive 1-based line range restricting variable and
    call extraction to the target region; token count, tree depth, and import
    classification always cover the whole string. Passing a span with
    start > end selects nothing (useful for an empty target).
    """
    tree = parse_module(code)
    tokens = count_code_tokens(code)
    depth = tree_depth(tree)
    variables = _bound_names(tree, target_span)
    calls = sum(
        1 for node in ast.walk(tree) if isinstance(node, ast.Call) and _in_span(node, target_span)
    )
    roots = _import_roots(tree)
    std = {r for r in roots if r in stdlib_modules()}
    return CodeMetrics(
        code_tokens=tokens,
        ast_depth=depth,
        variables=variables,
        stdlib_imports=std,
        external_imports=roots - std,
        function_calls_in_target=calls,
    )


# ---------------------------------------------------------------------------
# Similarity


def _ngram_counts(tokens: Sequence[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        g = tuple(tokens[i : i + n])
        counts[g] = counts.get(g, 0) + 1
    return counts


def bleu(candidate: Sequence[str], reference: Sequence[str], max_order: int = 4) -> float:
    """Token-sequence BLEU: up to 4-grams, uniform weights, brevity penalty.

    Orders with zero matches above unigram get add-one smoothing
    ((0+1)/(total+1)); orders the candidate is too short to form contribute a
    neutral factor of 1 so that identical sequences always score exactly 1.0.
    A unigram precision of zero makes the whole score 0.
    """
    if len(reference) == 0:
        raise ValueError("reference token sequence must be non-empty")
    if len(candidate) == 0:
        return 0.0
    log_sum = 0.0
    weight = 1.0 / max_order
    for n in range(1, max_order + 1):
        total = len(candidate) - n + 1
        if total <= 0:
            continue  # neutral factor: log(1) == 0
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        matched = sum(min(c, ref_counts.get(g, 0)) for g, c in cand_counts.items())
        if matched > 0:
            p = matched / total
        elif n == 1:
            return 0.0
        else:
            p = 1.0 / (total + 1)
        log_sum += weight * math.log(p)
    c, r = len(candidate), len(reference)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum)


def code_bleu(candidate_code: str, reference_code: str) -> float:
    """BLEU over the lexical content tokens of two code strings."""
    return bleu(code_token_strings(candidate_code), code_token_strings(reference_code))


def jaccard_variables(a: Iterable[str], b: Iterable[str]) -> float:
    """|a ∩ b| / |a ∪ b|, with two empty sets defined as similarity 1.0."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


# ---------------------------------------------------------------------------
# pass@k


def pass_at_k(n: int, c: int, k: int) -> float:
    """Unbiased pass@k from n samples with c correct: 1 - C(n-c,k)/C(n,k).

    Evaluated in exact rational arithmetic and rounded once at the end, so
    results agree bit-for-bit with brute-force subset enumeration.
    """
    if not 0 <= c <= n:
        raise ValueError(f"need 0 <= c <= n, got c={c} n={n}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k} n={n}")
    if n - c < k:
        return 1.0
    frac = Fraction(math.comb(n - c, k), math.comb(n, k))
    return float(1 - frac)


def mean_pass_at_k(counts: Sequence[tuple[int, int]], k: int) -> float:
    """Mean pass@k over per-example (n, c) pairs."""
    if not counts:
        raise ValueError("no examples")
    return sum(pass_at_k(n, c, k) for n, c in counts) / len(counts)


@dataclass
class PassReport:
    """pass@k estimates over an example set plus optional factor breakdowns."""

    per_example: list[tuple[str, int, int]]  # (example_id, n, c)
    pass_at_k: dict[int, float]
    breakdowns: dict[str, list[dict]] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "per_example": [
                {"example_id": e, "n": n, "c": c} for e, n, c in self.per_example
            ],
            "pass_at_k": {str(k): v for k, v in self.pass_at_k.items()},
            "breakdowns": self.breakdowns,
        }


def build_pass_report(
    per_example: Sequence[tuple[str, int, int]], k_list: Sequence[int]
) -> PassReport:
    counts = [(n, c) for _, n, c in per_example]
    for _, n, c in per_example:
        if c > n:
            raise ValueError("c cannot exceed n")
    estimates = {k: mean_pass_at_k(counts, k) for k in k_list}
    return PassReport(per_example=list(per_example), pass_at_k=estimates)


# ---------------------------------------------------------------------------
# Breakdown into equal-size factor bins

BREAKDOWN_FACTORS = ("target_length", "context_length", "function_calls", "import_class")
_N_BINS = 5


def breakdown(
    factor_values: Mapping[str, float],
    pass1: Mapping[str, float],
    factor: str,
    n_bins: int = _N_BINS,
) -> list[dict]:
    """Split examples into `n_bins` near-equal groups by factor value and
    report mean pass@1 per group.

    `factor_values` and `pass1` are keyed by example id. Examples are ordered
    by (value, id) — the id tiebreak makes equal-size splits well defined even
    when every value ties — and cut into contiguous bins whose sizes differ by
    at most one.
    """
    ids = sorted(factor_values, key=lambda e: (factor_values[e], e))
    if len(ids) < n_bins:
        raise ValueError(f"need at least {n_bins} examples, got {len(ids)}")
    missing = [e for e in ids if e not in pass1]
    if missing:
        raise ValueError(f"missing pass@1 for {missing[:3]}")
    base, extra = divmod(len(ids), n_bins)
    bins: list[dict] = []
    start = 0
    for i in range(n_bins):
        size = base + (1 if i < extra else 0)
        members = ids[start : start + size]
        start += size
        values = [factor_values[e] for e in members]
        bins.append(
            {
                "factor": factor,
                "bin": i,
                "low": min(values),
                "high": max(values),
                "size": len(members),
                "mean_pass1": sum(pass1[e] for e in members) / len(members),
            }
        )
    return bins


def import_class_value(metrics: CodeMetrics) -> int:
    """Ordinal import class: 0 = no imports, 1 = stdlib only, 2 = any external."""
    if metrics.external_imports:
        return 2
    if metrics.stdlib_imports:
        return 1
    return 0
