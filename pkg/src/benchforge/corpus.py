"""Corpus ingestion: read raw source fragments from a line-delimited dump,
attach full-file context, and screen out fragments we cannot turn into
self-contained benchmark examples (missing context, file/OS I/O)."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusError

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = (
    "id",
    "repo",
    "path",
    "function_name",
    "signature",
    "docstring",
    "body",
    "file_context",
)

# File-system operation markers used to screen fragments before the pipeline.
# Substring-matched, deliberately coarse; known false positives (e.g. `.loads`
# matching `.load`) are accepted. Configurable per run.
DEFAULT_IO_KEYWORDS = (
    "open(",
    ".read",
    ".write",
    ".load",
    ".dump",
    "shutil.",
    "glob.",
    "os.path.",
    "os.remove(",
    "os.rename(",
    "os.rmdir(",
    "os.mkdir(",
    "os.makedirs(",
    "os.listdir(",
    ".readlines(",
    ".writelines(",
    ".seek(",
    ".tell(",
)


@dataclass
class SourceFragment:
    """A raw function plus the file it came from, as harvested from a corpus."""

    id: str
    repo: str
    path: str
    function_name: str
    signature: str
    docstring: str
    body: str
    file_context: str
    license: str | None = None

    @staticmethod
    def stable_id(repo: str, path: str, function_name: str) -> str:
        return f"{repo}:{path}:{function_name}"

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "repo": self.repo,
            "path": self.path,
            "function_name": self.function_name,
            "signature": self.signature,
            "docstring": self.docstring,
            "body": self.body,
            "file_context": self.file_context,
            "license": self.license,
        }
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "SourceFragment":
        return cls(
            id=rec["id"],
            repo=rec["repo"],
            path=rec["path"],
            function_name=rec["function_name"],
            signature=rec["signature"],
            docstring=rec["docstring"],
            body=rec["body"],
            file_context=rec["file_context"],
            license=rec.get("license"),
        )


@dataclass
class LoadReport:
    """Fragments read from a corpus dump plus bookkeeping about skipped records."""

    fragments: list[SourceFragment] = field(default_factory=list)
    skipped: int = 0
    skip_reasons: Counter = field(default_factory=Counter)


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str | None = None

    @classmethod
    def kept(cls) -> "FilterDecision":
        return cls(True, None)

    @classmethod
    def dropped(cls, reason: str) -> "FilterDecision":
        return cls(False, reason)


def load_fragments(corpus_path: str | Path, limit: int | None = None) -> LoadReport:
    """Read fragments from a line-delimited record file, in file order.

    Malformed records (bad JSON, missing required fields, empty body) are
    skipped and tallied in the report. At most `limit` fragments are returned;
    the limit counts kept fragments, so the result for limit=n is always a
    prefix of the result for limit=m when n <= m.
    """
    path = Path(corpus_path)
    report = LoadReport()
    try:
        stream = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    with stream:
        for lineno, line in enumerate(stream, start=1):
            if limit is not None and len(report.fragments) >= limit:
                break
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                report.skipped += 1
                report.skip_reasons["invalid_json"] += 1
                logger.warning("%s:%d: skipping unparseable record", path, lineno)
                continue
            missing = [f for f in REQUIRED_FIELDS if f not in rec or rec[f] is None]
            if missing:
                report.skipped += 1
                report.skip_reasons[f"missing_{missing[0]}"] += 1
                logger.warning("%s:%d: skipping record missing %s", path, lineno, missing)
                continue
            if not str(rec["body"]).strip():
                report.skipped += 1
                report.skip_reasons["empty_body"] += 1
                logger.warning("%s:%d: skipping record with empty body", path, lineno)
                continue
            report.fragments.append(SourceFragment.from_record(rec))
    return report


def _earliest_match(text: str, keywords: Iterable[str]) -> str | None:
    """First keyword to occur in `text` by match position; ties broken by the
    keyword string itself so the answer never depends on keyword-list order."""
    best: tuple[int, str] | None = None
    for kw in keywords:
        pos = text.find(kw)
        if pos < 0:
            continue
        if best is None or (pos, kw) < best:
            best = (pos, kw)
    return best[1] if best else None


def prefilter(
    frag: SourceFragment,
    io_keywords: Sequence[str] = DEFAULT_IO_KEYWORDS,
) -> FilterDecision:
    """Decide whether a fragment may enter the pipeline.

    Drops fragments with no usable file context, and fragments whose body or
    file context contains any of the I/O keywords as a substring. The reported
    reason is the earliest-matching keyword (body searched before context),
    which makes the decision independent of keyword-list order.
    """
    if not frag.file_context.strip():
        return FilterDecision.dropped("missing_context")
    hit = _earliest_match(frag.body, io_keywords)
    if hit is None:
        hit = _earliest_match(frag.file_context, io_keywords)
    if hit is not None:
        return FilterDecision.dropped(hit)
    return FilterDecision.kept()


def load_keyword_file(path: str | Path) -> tuple[str, ...]:
    """Read one keyword per line; blank lines and `#` comment lines ignored."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return tuple(out)


def write_fragments(fragments: Iterable[SourceFragment], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for frag in fragments:
            fh.write(json.dumps(frag.to_record(), ensure_ascii=False) + "\n")
            n += 1
    return n
