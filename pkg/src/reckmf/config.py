"""Run configuration: one JSON document drives every CLI command.

Validation is all-or-nothing: a config either loads completely or raises,
so no command starts work on a half-valid setup.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .data import ScoreScale
from .exceptions import ConfigurationError
from .search import GaConfig, GenomeSpace, bemf_genome_space

DELIMITERS = {"tab": "\t", "comma": ",", "space": " ", "double-colon": "::"}


@dataclass
class DatasetConfig:
    path: Path
    scale: ScoreScale
    delimiter: str = "\t"
    columns: tuple = ("user", "item", "score")
    has_header: bool = False
    test_fraction: float = 0.1
    test_path: Path = None  # optional pre-split test file in the same raw format


@dataclass
class ModelConfig:
    kind: str = "bemf"
    params: dict = field(default_factory=dict)
    grid: dict = None  # optional PMF grid-search space


@dataclass
class EvalConfig:
    num_thresholds: int = 20
    report_thresholds: tuple = (0.0, 0.3, 0.5, 0.7)


@dataclass
class TuneConfig:
    ga: GaConfig
    genome_ranges: dict
    gradient_mode: str = "undamped"

    def genome_space(self, pin_recklessness: bool = False) -> GenomeSpace:
        return bemf_genome_space(pin_recklessness=pin_recklessness, **self.genome_ranges)


@dataclass
class RunConfig:
    seed: int
    output_dir: Path
    dataset: DatasetConfig
    model: ModelConfig
    evaluation: EvalConfig
    tune: TuneConfig


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigurationError(f"missing required config field {context}.{key}")
    return mapping[key]


def _parse_scale(raw) -> ScoreScale:
    if isinstance(raw, (list, tuple)):
        return ScoreScale(tuple(raw))
    if isinstance(raw, dict):
        return ScoreScale.from_range(
            _require(raw, "min", "dataset.scale"),
            _require(raw, "max", "dataset.scale"),
            _require(raw, "step", "dataset.scale"),
        )
    raise ConfigurationError("dataset.scale must be a list of values or {min, max, step}")


def _parse_delimiter(raw: str) -> str:
    return DELIMITERS.get(raw, raw)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None

    ds_raw = _require(doc, "dataset", "")
    data_path = Path(_require(ds_raw, "path", "dataset"))
    if not data_path.exists():
        raise ConfigurationError(f"dataset.path does not exist: {data_path}")
    test_path = ds_raw.get("test_path")
    if test_path is not None:
        test_path = Path(test_path)
        if not test_path.exists():
            raise ConfigurationError(f"dataset.test_path does not exist: {test_path}")
    test_fraction = float(ds_raw.get("test_fraction", 0.1))
    if test_path is None and not (0.0 < test_fraction < 1.0):
        raise ConfigurationError("dataset.test_fraction must be in (0, 1)")
    dataset = DatasetConfig(
        path=data_path,
        scale=_parse_scale(_require(ds_raw, "scale", "dataset")),
        delimiter=_parse_delimiter(ds_raw.get("delimiter", "\t")),
        columns=tuple(ds_raw.get("columns", ("user", "item", "score"))),
        has_header=bool(ds_raw.get("has_header", False)),
        test_fraction=test_fraction,
        test_path=test_path,
    )

    model_raw = doc.get("model", {})
    kind = model_raw.get("kind", "bemf")
    if kind not in ("bemf", "pmf"):
        raise ConfigurationError(f"model.kind must be 'bemf' or 'pmf', got {kind!r}")
    model = ModelConfig(
        kind=kind,
        params=dict(model_raw.get("params", {})),
        grid=model_raw.get("grid"),
    )

    eval_raw = doc.get("evaluation", {})
    num_thresholds = int(eval_raw.get("num_thresholds", 20))
    if num_thresholds < 2:
        raise ConfigurationError("evaluation.num_thresholds must be >= 2")
    report = tuple(float(t) for t in eval_raw.get("report_thresholds", (0.0, 0.3, 0.5, 0.7)))
    if any(not (0.0 <= t <= 1.0) for t in report):
        raise ConfigurationError("evaluation.report_thresholds must lie in [0, 1]")
    evaluation = EvalConfig(num_thresholds=num_thresholds, report_thresholds=report)

    seed = int(doc.get("seed", 0))
    if seed < 0:
        raise ConfigurationError("seed must be non-negative")

    ga_raw = doc.get("ga", {})
    ga = GaConfig(
        population_size=int(ga_raw.get("population_size", 100)),
        generations=int(ga_raw.get("generations", 150)),
        tournament_size=int(ga_raw.get("tournament_size", 2)),
        mutation_probability=float(ga_raw.get("mutation_probability", 0.01)),
        crossover_probability=float(ga_raw.get("crossover_probability", 0.9)),
        seed=seed,
        cv_folds=int(ga_raw.get("cv_folds", 5)),
    )
    ga.validate()
    ranges_raw = ga_raw.get("genome", {})
    known = {"factors", "learning_rate", "l2", "recklessness", "epochs"}
    unknown = set(ranges_raw) - known
    if unknown:
        raise ConfigurationError(f"unknown genome genes: {sorted(unknown)}")
    genome_ranges = {k: tuple(v) for k, v in ranges_raw.items()}
    for name, bounds in genome_ranges.items():
        if len(bounds) != 2:
            raise ConfigurationError(f"ga.genome.{name} must be a [low, high] pair")
    tune = TuneConfig(ga=ga, genome_ranges=genome_ranges,
                      gradient_mode=ga_raw.get("gradient_mode", "undamped"))
    # fail fast on bad gene ranges
    tune.genome_space()

    output_dir = Path(doc.get("output_dir", "out"))
    return RunConfig(seed=seed, output_dir=output_dir, dataset=dataset,
                     model=model, evaluation=evaluation, tune=tune)
