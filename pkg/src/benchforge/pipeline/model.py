"""Benchmark example data model and dataset serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DatasetError


@dataclass
class TestSet:
    name: str
    code: str
    origin: str  # "generated" or "augmented:<model>"

    def to_record(self) -> dict:
        return {"name": self.name, "code": self.code, "origin": self.origin}

    @classmethod
    def from_record(cls, record: dict) -> "TestSet":
        return cls(name=record["name"], code=record["code"], origin=record["origin"])


@dataclass
class Instruction:
    functionality: str
    inputs: str
    outputs: str

    def render(self) -> str:
        return (
            f"Functionality: {self.functionality}\n"
            f"Inputs: {self.inputs}\n"
            f"Outputs: {self.outputs}"
        )

    def to_record(self) -> dict:
        return {
            "functionality": self.functionality,
            "inputs": self.inputs,
            "outputs": self.outputs,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Instruction":
        return cls(
            functionality=record["functionality"],
            inputs=record["inputs"],
            outputs=record["outputs"],
        )


@dataclass
class EvalExample:
    """One benchmark example: a marked frame, the reference body, its tests,
    and the natural-language instruction shown to generators."""

    id: str
    frame: str
    target: str
    header: str
    function_name: str
    instruction: Instruction
    test_sets: list[TestSet]
    dependencies: list[str] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "frame": self.frame,
            "target": self.target,
            "header": self.header,
            "function_name": self.function_name,
            "instruction": self.instruction.to_record(),
            "test_sets": [ts.to_record() for ts in self.test_sets],
            "dependencies": list(self.dependencies),
            "provenance": dict(self.provenance),
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_record(cls, record: dict) -> "EvalExample":
        try:
            return cls(
                id=record["id"],
                frame=record["frame"],
                target=record["target"],
                header=record["header"],
                function_name=record["function_name"],
                instruction=Instruction.from_record(record["instruction"]),
                test_sets=[TestSet.from_record(ts) for ts in record["test_sets"]],
                dependencies=list(record.get("dependencies", [])),
                provenance=dict(record.get("provenance", {})),
                metadata=dict(record.get("metadata", {})),
            )
        except (KeyError, TypeError) as exc:
            raise DatasetError(f"malformed example record: {exc}") from exc


def save_dataset(examples: list[EvalExample], path: str | Path) -> None:
    """JSON Lines, one example per line, canonical key order: saving the
    same dataset twice produces identical bytes."""
    lines = [
        json.dumps(ex.to_record(), sort_keys=True, separators=(",", ":"))
        for ex in examples
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), "utf-8")


def load_dataset(path: str | Path) -> list[EvalExample]:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset not found: {path}")
    examples = []
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}:{lineno}: invalid JSON") from exc
        examples.append(EvalExample.from_record(record))
    ids = [ex.id for ex in examples]
    if len(ids) != len(set(ids)):
        raise DatasetError(f"{path}: duplicate example ids")
    return examples
