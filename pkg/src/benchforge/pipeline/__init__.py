"""Pipeline that turns source fragments into executable benchmark examples."""

from .model import EvalExample, Instruction, TestSet, load_dataset, save_dataset
from .runner import FunnelReport, PipelineResult, PipelineSettings, run_pipeline

__all__ = [
    "EvalExample",
    "Instruction",
    "TestSet",
    "load_dataset",
    "save_dataset",
    "FunnelReport",
    "PipelineResult",
    "PipelineSettings",
    "run_pipeline",
]
