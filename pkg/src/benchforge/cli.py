"""Operator command line: one YAML config file, five subcommands.

    benchforge ingest      load a raw corpus, prefilter it, write fragments
    benchforge generate    run the full pipeline, write dataset + funnel
    benchforge evaluate    sample a generator over a dataset, write results
    benchforge analyze     dataset metrics and factor breakdowns
    benchforge serve-study start the human study server on a dataset

Artifacts land in the configured output directory under stable names:
fragments.jsonl, dataset.jsonl, funnel.json, results.jsonl, report.json,
sessions.jsonl. Exit codes: 0 success, 1 the command ran but produced no
usable content, 2 configuration error, 3 infrastructure failure.
"""

from __future__ import annotations

import argparse
import ast
import json
import os
import sys
import textwrap
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean
from typing import Sequence

import uvicorn
import yaml

from . import studyserver
from .analysis import compute_metrics, count_code_tokens, import_class_value
from .corpus import load_fragments, load_keyword_file, prefilter
from .errors import (
    BenchforgeError,
    ConfigError,
    DatasetError,
    EnvironmentBuildError,
    GatewayError,
    InfraError,
)
from .evalharness import GatewayGenerator, OracleGenerator, evaluate, refine_loop
from .executor import EnvironmentManager, Executor
from .gateway import LlmGateway, Transcript, http_transport
from .pipeline import PipelineSettings, load_dataset, run_pipeline, save_dataset

EXIT_OK = 0
EXIT_CONTENT = 1
EXIT_CONFIG = 2
EXIT_INFRA = 3

ARTIFACT_FRAGMENTS = "fragments.jsonl"
ARTIFACT_DATASET = "dataset.jsonl"
ARTIFACT_FUNNEL = "funnel.json"
ARTIFACT_RESULTS = "results.jsonl"
ARTIFACT_REPORT = "report.json"
ARTIFACT_SESSIONS = "sessions.jsonl"
ARTIFACT_TRANSCRIPT = "transcript.jsonl"

PIPELINE_STAGES = ("sandbox", "tests", "debug", "instruction")


@dataclass
class RunConfig:
    output_dir: Path
    corpus: Path | None = None
    shim: Path | None = None
    python: str | None = None
    timeout: float = 10.0
    envs_dir: Path | None = None
    catalog: dict[str, str] = field(default_factory=dict)
    stages: dict[str, str] = field(default_factory=dict)
    regenerations: int = 3
    debug_iterations: int = 3
    augment_k: int = 5
    pipeline_temperature: float = 0.3
    pipeline_top_p: float = 0.95
    augment_temperature: float = 0.3
    augment_top_p: float = 0.7
    eval_temperature: float = 0.3
    eval_top_p: float = 0.95
    n_samples: int = 20
    k_list: tuple[int, ...] = (1, 2, 5, 10)
    rounds: int = 0
    refine_samples: int = 10
    mode: str = "live"
    transcript: Path | None = None
    base_url: str | None = None
    api_key_env: str | None = None
    io_keywords: Path | None = None
    banned_keywords: Path | None = None
    study_host: str = "127.0.0.1"
    study_port: int = 8700
    study_ui: Path | None = None
    jobs: int = 8

    def resolve_model(self, stage: str) -> str:
        alias = self.stages.get(stage, self.stages.get("default"))
        if alias is None:
            raise ConfigError(f"no model alias configured for stage {stage!r}")
        if alias not in self.catalog:
            raise ConfigError(f"unknown model alias {alias!r} for stage {stage!r}")
        return self.catalog[alias]


def _as_mapping(value, name: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    return value


def _opt_path(value, name: str) -> Path | None:
    if value is None:
        return None
    if not isinstance(value, (str, Path)):
        raise ConfigError(f"config field {name!r} must be a path")
    return Path(value)


def load_config(path: str | Path, overrides: argparse.Namespace) -> RunConfig:
    """Parse the YAML config, apply command-line overrides, and validate."""
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config file not found: {config_path}")
    try:
        raw = yaml.safe_load(config_path.read_text("utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}") from exc
    raw = _as_mapping(raw, "<root>")

    models = _as_mapping(raw.get("models"), "models")
    caps = _as_mapping(raw.get("caps"), "caps")
    sampling = _as_mapping(raw.get("sampling"), "sampling")
    pipeline_s = _as_mapping(sampling.get("pipeline"), "sampling.pipeline")
    augment_s = _as_mapping(sampling.get("augment"), "sampling.augment")
    eval_s = _as_mapping(sampling.get("eval"), "sampling.eval")
    evaluation = _as_mapping(raw.get("evaluation"), "evaluation")
    gateway = _as_mapping(raw.get("gateway"), "gateway")
    keywords = _as_mapping(raw.get("keywords"), "keywords")
    study = _as_mapping(raw.get("study"), "study")
    executor_cfg = _as_mapping(raw.get("executor"), "executor")

    output_dir = getattr(overrides, "output_dir", None) or raw.get("output_dir")
    if not output_dir:
        raise ConfigError("output_dir is required (config field or --output-dir)")

    cfg = RunConfig(
        output_dir=Path(output_dir),
        corpus=_opt_path(getattr(overrides, "corpus", None) or raw.get("corpus"), "corpus"),
        shim=_opt_path(executor_cfg.get("shim"), "executor.shim"),
        python=executor_cfg.get("python"),
        timeout=float(
            getattr(overrides, "timeout", None) or executor_cfg.get("timeout", 10.0)
        ),
        envs_dir=_opt_path(executor_cfg.get("envs_dir"), "executor.envs_dir"),
        catalog={str(k): str(v) for k, v in _as_mapping(models.get("catalog"), "models.catalog").items()},
        stages={str(k): str(v) for k, v in _as_mapping(models.get("stages"), "models.stages").items()},
        regenerations=int(caps.get("regenerations", 3)),
        debug_iterations=int(caps.get("debug_iterations", 3)),
        augment_k=int(caps.get("augment_k", 5)),
        pipeline_temperature=float(pipeline_s.get("temperature", 0.3)),
        pipeline_top_p=float(pipeline_s.get("top_p", 0.95)),
        augment_temperature=float(augment_s.get("temperature", 0.3)),
        augment_top_p=float(augment_s.get("top_p", 0.7)),
        eval_temperature=float(eval_s.get("temperature", 0.3)),
        eval_top_p=float(eval_s.get("top_p", 0.95)),
        n_samples=int(
            getattr(overrides, "n_samples", None) or evaluation.get("n_samples", 20)
        ),
        k_list=tuple(
            int(k)
            for k in (getattr(overrides, "k", None) or evaluation.get("k_list", [1, 2, 5, 10]))
        ),
        rounds=int(
            overrides.rounds
            if getattr(overrides, "rounds", None) is not None
            else evaluation.get("rounds", 0)
        ),
        refine_samples=int(
            getattr(overrides, "refine_samples", None)
            or evaluation.get("refine_samples", 10)
        ),
        mode=str(getattr(overrides, "mode", None) or gateway.get("mode", "live")),
        transcript=_opt_path(
            getattr(overrides, "transcript", None) or gateway.get("transcript"),
            "gateway.transcript",
        ),
        base_url=gateway.get("base_url"),
        api_key_env=gateway.get("api_key_env"),
        io_keywords=_opt_path(keywords.get("io_filter"), "keywords.io_filter"),
        banned_keywords=_opt_path(keywords.get("banned"), "keywords.banned"),
        study_host=str(getattr(overrides, "host", None) or study.get("host", "127.0.0.1")),
        study_port=int(getattr(overrides, "port", None) or study.get("port", 8700)),
        study_ui=_opt_path(study.get("ui"), "study.ui"),
        jobs=int(getattr(overrides, "jobs", None) or raw.get("jobs", 8)),
    )

    for cap_name in ("regenerations", "debug_iterations", "augment_k"):
        if getattr(cfg, cap_name) < 0:
            raise ConfigError(f"caps.{cap_name} must be >= 0")
    if cfg.timeout <= 0:
        raise ConfigError("executor.timeout must be positive")
    if cfg.mode not in ("live", "record", "replay"):
        raise ConfigError(f"gateway.mode must be live, record, or replay, not {cfg.mode!r}")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")

    for name, p in (
        ("corpus", cfg.corpus),
        ("executor.shim", cfg.shim),
        ("keywords.io_filter", cfg.io_keywords),
        ("keywords.banned", cfg.banned_keywords),
    ):
        if p is not None and not p.is_file():
            raise ConfigError(f"{name} path does not exist: {p}")
    if cfg.study_ui is not None and not cfg.study_ui.is_dir():
        raise ConfigError(f"study.ui directory does not exist: {cfg.study_ui}")
    if cfg.mode == "replay":
        if cfg.transcript is None:
            raise ConfigError("replay mode needs gateway.transcript")
        if not cfg.transcript.is_file():
            raise ConfigError(f"gateway.transcript path does not exist: {cfg.transcript}")
    return cfg


# ---------------------------------------------------------------------------
# Shared component construction


def _build_gateway(cfg: RunConfig) -> LlmGateway:
    if cfg.mode == "replay":
        return LlmGateway(transcript=Transcript.load(cfg.transcript), mode="replay")
    if not cfg.base_url:
        raise ConfigError(f"{cfg.mode} mode needs gateway.base_url")
    api_key = None
    if cfg.api_key_env:
        api_key = os.environ.get(cfg.api_key_env)
        if not api_key:
            raise ConfigError(
                f"environment variable {cfg.api_key_env} is not set (needed in {cfg.mode} mode)"
            )
    transcript = Transcript() if cfg.mode == "record" else None
    return LlmGateway(
        transport=http_transport(cfg.base_url, api_key=api_key),
        transcript=transcript,
        mode=cfg.mode,
        max_concurrent=cfg.jobs,
    )


def _build_executor(cfg: RunConfig) -> Executor:
    if cfg.shim is None:
        raise ConfigError("executor.shim is required for this command")
    kwargs = {"shim_path": cfg.shim}
    if cfg.python:
        kwargs["python"] = cfg.python
    return Executor(**kwargs)


def _build_env_manager(cfg: RunConfig) -> EnvironmentManager:
    root = cfg.envs_dir or (cfg.output_dir / "envs")
    return EnvironmentManager(root)


def _load_dataset_artifact(cfg: RunConfig, explicit: str | None) -> list:
    path = Path(explicit) if explicit else cfg.output_dir / ARTIFACT_DATASET
    if not path.is_file():
        raise ConfigError(f"dataset not found: {path}")
    return load_dataset(path)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", "utf-8")


def _write_jsonl(path: Path, records: Sequence[dict]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_ingest(cfg: RunConfig, args: argparse.Namespace) -> int:
    if cfg.corpus is None:
        raise ConfigError("corpus is required for ingest")
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    report = load_fragments(cfg.corpus)
    io_keywords = (
        load_keyword_file(cfg.io_keywords) if cfg.io_keywords is not None else None
    )
    kept, dropped = [], {}
    for fragment in report.fragments:
        decision = (
            prefilter(fragment)
            if io_keywords is None
            else prefilter(fragment, io_keywords=io_keywords)
        )
        if decision.keep:
            kept.append(fragment)
        else:
            dropped[decision.reason] = dropped.get(decision.reason, 0) + 1

    from .corpus import write_fragments

    write_fragments(kept, cfg.output_dir / ARTIFACT_FRAGMENTS)
    _write_json(
        cfg.output_dir / ARTIFACT_REPORT,
        {
            "loaded": len(report.fragments),
            "skipped_lines": report.skipped,
            "skip_reasons": dict(sorted(report.skip_reasons.items())),
            "dropped": dict(sorted(dropped.items())),
            "kept": len(kept),
        },
    )
    print(
        f"ingest: {len(report.fragments)} loaded, {report.skipped} lines skipped,"
        f" {sum(dropped.values())} dropped, {len(kept)} kept"
    )
    return EXIT_OK if kept else EXIT_CONTENT


def _pipeline_settings(cfg: RunConfig) -> PipelineSettings:
    stage_models = {}
    for stage in PIPELINE_STAGES:
        if stage in cfg.stages:
            stage_models[stage] = cfg.resolve_model(stage)
    return PipelineSettings(
        model=cfg.resolve_model("default"),
        augment_model=cfg.resolve_model("augment") if "augment" in cfg.stages else None,
        temperature=cfg.pipeline_temperature,
        top_p=cfg.pipeline_top_p,
        max_attempts=cfg.regenerations,
        debug_iterations=cfg.debug_iterations,
        augment_k=cfg.augment_k,
        augment_temperature=cfg.augment_temperature,
        augment_top_p=cfg.augment_top_p,
        timeout=cfg.timeout,
        stage_models=stage_models,
        io_keywords=(
            load_keyword_file(cfg.io_keywords) if cfg.io_keywords is not None else None
        ),
        banned_keywords=(
            load_keyword_file(cfg.banned_keywords)
            if cfg.banned_keywords is not None
            else None
        ),
    )


def cmd_generate(cfg: RunConfig, args: argparse.Namespace) -> int:
    fragments_path = (
        Path(args.fragments)
        if args.fragments
        else (
            cfg.output_dir / ARTIFACT_FRAGMENTS
            if (cfg.output_dir / ARTIFACT_FRAGMENTS).is_file()
            else cfg.corpus
        )
    )
    if fragments_path is None or not Path(fragments_path).is_file():
        raise ConfigError(f"no fragments to generate from: {fragments_path}")
    cfg.output_dir.mkdir(parents=True, exist_ok=True)

    report = load_fragments(fragments_path)
    if report.skipped:
        raise ConfigError(
            f"fragments file has {report.skipped} malformed lines: {fragments_path}"
        )
    settings = _pipeline_settings(cfg)
    gateway = _build_gateway(cfg)
    executor = _build_executor(cfg)
    env_manager = _build_env_manager(cfg)

    result = run_pipeline(report.fragments, gateway, executor, env_manager, settings)

    save_dataset(result.examples, cfg.output_dir / ARTIFACT_DATASET)
    result.funnel.save(cfg.output_dir / ARTIFACT_FUNNEL)
    if cfg.mode == "record" and gateway.transcript is not None:
        gateway.transcript.save(cfg.output_dir / ARTIFACT_TRANSCRIPT)
    print(
        f"generate: {result.funnel.input_fragments} fragments in,"
        f" {result.funnel.emitted} examples out"
    )
    return EXIT_OK if result.examples else EXIT_CONTENT


def cmd_evaluate(cfg: RunConfig, args: argparse.Namespace) -> int:
    examples = _load_dataset_artifact(cfg, args.dataset)
    if not examples:
        print("evaluate: dataset is empty", file=sys.stderr)
        return EXIT_CONTENT
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    executor = _build_executor(cfg)
    env_manager = _build_env_manager(cfg)

    if args.generator == "oracle":
        generator = OracleGenerator(examples)
    else:
        generator = GatewayGenerator(
            gateway=_build_gateway(cfg), model=cfg.resolve_model("eval")
        )

    try:
        if cfg.rounds > 0:
            refinement = refine_loop(
                examples,
                generator,
                executor,
                rounds=cfg.rounds,
                n_samples=cfg.refine_samples,
                temperature=cfg.eval_temperature,
                top_p=cfg.eval_top_p,
                timeout=cfg.timeout,
                env_manager=env_manager,
            )
            _write_jsonl(
                cfg.output_dir / ARTIFACT_RESULTS,
                [
                    {"example_id": example_id, "first_passed_round": rounds_list}
                    for example_id, rounds_list in refinement.first_passed_round.items()
                ],
            )
            _write_json(cfg.output_dir / ARTIFACT_REPORT, refinement.to_record())
            print(
                "evaluate: accuracy by round "
                + ", ".join(f"{a:.4f}" for a in refinement.accuracy_by_round)
            )
        else:
            result = evaluate(
                examples,
                generator,
                executor,
                n_samples=cfg.n_samples,
                k_list=cfg.k_list,
                temperature=cfg.eval_temperature,
                top_p=cfg.eval_top_p,
                timeout=cfg.timeout,
                env_manager=env_manager,
            )
            _write_jsonl(
                cfg.output_dir / ARTIFACT_RESULTS,
                [
                    {
                        "example_id": example_id,
                        "n": n,
                        "c": c,
                        "pass1": c / n,
                        "statuses": [
                            s.status for s in result.samples[example_id]
                        ],
                    }
                    for example_id, n, c in result.report.per_example
                ],
            )
            report = result.report.to_record()
            report["refusals"] = result.refusals
            _write_json(cfg.output_dir / ARTIFACT_REPORT, report)
            print(
                "evaluate: "
                + ", ".join(
                    f"pass@{k}={v:.4f}" for k, v in sorted(result.report.pass_at_k.items())
                )
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return EXIT_OK


def _count_asserts(code: str) -> int:
    try:
        tree = ast.parse(code)
    except SyntaxError:
        return 0
    return sum(1 for node in ast.walk(tree) if isinstance(node, ast.Assert))


def cmd_analyze(cfg: RunConfig, args: argparse.Namespace) -> int:
    from . import slots

    examples = _load_dataset_artifact(cfg, args.dataset)
    if not examples:
        print("analyze: dataset is empty", file=sys.stderr)
        return EXIT_CONTENT
    cfg.output_dir.mkdir(parents=True, exist_ok=True)

    whole_tokens, whole_depth, whole_vars = [], [], []
    target_tokens, target_depth, target_vars = [], [], []
    asserts_per_example = []
    import_classes: dict[str, int] = {"0": 0, "1": 0, "2": 0}
    for example in examples:
        full = slots.assemble(example.frame, example.target)
        metrics = compute_metrics(full)
        whole_tokens.append(metrics.code_tokens)
        whole_depth.append(metrics.ast_depth)
        whole_vars.append(len(metrics.variables))
        # dedent so method targets parse standalone
        target_code = textwrap.dedent(example.header + example.target)
        t_metrics = compute_metrics(target_code)
        target_tokens.append(t_metrics.code_tokens)
        target_depth.append(t_metrics.ast_depth)
        target_vars.append(len(t_metrics.variables))
        asserts_per_example.append(
            sum(_count_asserts(ts.code) for ts in example.test_sets)
        )
        import_classes[str(import_class_value(metrics))] += 1

    report = {
        "examples": len(examples),
        "context_and_target": {
            "mean_code_tokens": mean(whole_tokens),
            "mean_ast_depth": mean(whole_depth),
            "mean_variables": mean(whole_vars),
        },
        "target": {
            "mean_code_tokens": mean(target_tokens),
            "mean_ast_depth": mean(target_depth),
            "mean_variables": mean(target_vars),
        },
        "mean_test_asserts": mean(asserts_per_example),
        "import_class_counts": import_classes,
    }

    results_path = Path(args.results) if args.results else None
    if results_path is None:
        default = cfg.output_dir / ARTIFACT_RESULTS
        if default.is_file():
            results_path = default
    if results_path is not None:
        if not results_path.is_file():
            raise ConfigError(f"results file not found: {results_path}")
        from .analysis import BREAKDOWN_FACTORS, breakdown, build_pass_report
        from .evalharness import example_factors

        per_example = []
        for line in results_path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            per_example.append((record["example_id"], record["n"], record["c"]))
        known = {example.id for example in examples}
        missing = [eid for eid, _, _ in per_example if eid not in known]
        if missing:
            raise ConfigError(f"results reference unknown examples: {missing[:3]}")
        usable_k = [k for k in cfg.k_list if all(k <= n for _, n, _ in per_example)]
        pass_report = build_pass_report(per_example, usable_k or [1])
        report["pass_at_k"] = {str(k): v for k, v in pass_report.pass_at_k.items()}
        if len(per_example) >= 5:
            by_id = {example.id: example for example in examples}
            factors = {
                eid: example_factors(by_id[eid]) for eid, _, _ in per_example
            }
            pass1 = {eid: c / n for eid, n, c in per_example}
            report["breakdowns"] = {
                factor: breakdown(
                    {eid: values[factor] for eid, values in factors.items()},
                    pass1,
                    factor,
                )
                for factor in BREAKDOWN_FACTORS
            }

    _write_json(cfg.output_dir / ARTIFACT_REPORT, report)
    print(f"analyze: {len(examples)} examples")
    return EXIT_OK


def cmd_serve_study(cfg: RunConfig, args: argparse.Namespace) -> int:
    examples = _load_dataset_artifact(cfg, args.dataset)
    if not examples:
        print("serve-study: dataset is empty", file=sys.stderr)
        return EXIT_CONTENT
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    executor = _build_executor(cfg)
    env_manager = _build_env_manager(cfg)
    app = studyserver.create_app(
        examples,
        executor,
        env_manager=env_manager,
        log_path=cfg.output_dir / ARTIFACT_SESSIONS,
        timeout=cfg.timeout,
        ui_dir=cfg.study_ui,
    )
    uvicorn.run(app, host=cfg.study_host, port=cfg.study_port)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--output-dir", help="override output_dir")
    common.add_argument("--mode", choices=["live", "record", "replay"], help="gateway mode")
    common.add_argument("--transcript", help="gateway transcript path")
    common.add_argument("--timeout", type=float, help="execution timeout in seconds")
    common.add_argument("--jobs", type=int, help="max concurrent model requests")

    parser = argparse.ArgumentParser(prog="benchforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="load and prefilter a corpus")
    p.add_argument("--corpus", help="raw corpus JSONL path")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("generate", parents=[common], help="run the example pipeline")
    p.add_argument("--corpus", help="raw corpus JSONL path")
    p.add_argument("--fragments", help="prefiltered fragments JSONL path")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("evaluate", parents=[common], help="evaluate a generator")
    p.add_argument("--dataset", help="dataset path (default: <output_dir>/dataset.jsonl)")
    p.add_argument(
        "--generator",
        choices=["model", "oracle"],
        default="model",
        help="model samples via the gateway; oracle replays reference solutions",
    )
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--k", action="append", type=int, help="repeatable pass@k cutoff")
    p.add_argument("--rounds", type=int, help="feedback refinement rounds (0 = off)")
    p.add_argument("--refine-samples", dest="refine_samples", type=int)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("analyze", parents=[common], help="dataset metrics and breakdowns")
    p.add_argument("--dataset", help="dataset path (default: <output_dir>/dataset.jsonl)")
    p.add_argument("--results", help="per-example results JSONL for pass@k breakdowns")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("serve-study", parents=[common], help="start the study server")
    p.add_argument("--dataset", help="dataset path (default: <output_dir>/dataset.jsonl)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(handler=cmd_serve_study)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args)
        return args.handler(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfraError, EnvironmentBuildError, GatewayError) as exc:
        print(f"infrastructure failure: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except BenchforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTENT


if __name__ == "__main__":
    sys.exit(main())
