"""Command-line front end: ingest, train, evaluate, tune, pareto.

Every command is driven by one JSON config (see `config.load_config`) and is
deterministic given (config, seed): reruns write byte-identical primary
outputs. Exit codes: 0 success, 1 configuration error, 2 data error,
3 numerical divergence.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .bemf import BemfRecommender
from .config import RunConfig, load_config
from .data import kfold, load_delimited, load_delimited_pair, random_split
from .exceptions import ConfigurationError, DataError, DivergenceError
from .metrics import evaluate
from .pareto import hypervolume_2d, pareto_front
from .pmf import PmfRecommender, grid_search
from .search import (
    RunRecorder,
    cv_fitness,
    front_test_points,
    nsga2_run,
    read_front_csv,
    write_front_csv,
)

EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGENCE = 1, 2, 3

_ESTIMATORS = {"bemf": BemfRecommender, "pmf": PmfRecommender}


def _mapped_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigurationError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except DataError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)
        except DivergenceError as exc:
            click.echo(f"divergence: {exc}", err=True)
            sys.exit(EXIT_DIVERGENCE)

    return wrapper


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="Path to the JSON run config.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the config seed.")(fn)
    fn = click.option("--output", type=click.Path(), default=None,
                      help="Override the config output directory.")(fn)
    return fn


def _prepare(config_path, seed, output) -> RunConfig:
    cfg = load_config(config_path)
    if seed is not None:
        if seed < 0:
            raise ConfigurationError("seed must be non-negative")
        cfg.seed = seed
        cfg.tune.ga.seed = seed
    if output is not None:
        cfg.output_dir = Path(output)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg


def _model_params(cfg: RunConfig) -> dict:
    cls = _ESTIMATORS[cfg.model.kind]
    allowed = set(cls().get_params()) - {"scale"}
    unknown = set(cfg.model.params) - allowed
    if unknown:
        raise ConfigurationError(
            f"unknown {cfg.model.kind} parameters: {sorted(unknown)}"
        )
    return dict(cfg.model.params)


def _load_split(cfg: RunConfig):
    # one shared index mapping, so train/test user and item indices agree
    split = load_delimited_pair(cfg.output_dir / "train.csv", cfg.output_dir / "test.csv",
                                ",", ("user", "item", "score"), cfg.dataset.scale,
                                has_header=True)
    return split.train, split.test


def _load_model(path):
    from .serialize import load_checkpoint

    kind, _, _ = load_checkpoint(path)
    if kind not in _ESTIMATORS:
        raise DataError(f"unknown model kind {kind!r} in checkpoint {path}")
    return _ESTIMATORS[kind].load(path)


@click.group()
def main():
    """Recklessness-regularized probabilistic recommender toolkit."""


@main.command()
@_common_options
@_mapped_errors
def ingest(config_path, seed, output):
    """Load raw ratings, split, and write canonical train/test files."""
    cfg = _prepare(config_path, seed, output)
    ds = cfg.dataset
    if ds.test_path is not None:
        split = load_delimited_pair(ds.path, ds.test_path, ds.delimiter, ds.columns,
                                    ds.scale, ds.has_header)
    else:
        full = load_delimited(ds.path, ds.delimiter, ds.columns, ds.scale, ds.has_header)
        split = random_split(full, ds.test_fraction, cfg.seed)
    train, test = split.train, split.test
    train.to_canonical_csv(cfg.output_dir / "train.csv")
    test.to_canonical_csv(cfg.output_dir / "test.csv")
    for name, labels in (("user_map.csv", train.user_labels), ("item_map.csv", train.item_labels)):
        with open(cfg.output_dir / name, "w", encoding="utf-8") as fh:
            fh.write("raw_id,index\n")
            for idx, raw in enumerate(labels):
                fh.write(f"{raw},{idx}\n")
    stats = {
        "users": train.num_users,
        "items": train.num_items,
        "ratings": train.n_ratings + test.n_ratings,
        "train_ratings": train.n_ratings,
        "test_ratings": test.n_ratings,
    }
    (cfg.output_dir / "stats.json").write_text(json.dumps(stats, sort_keys=True) + "\n")
    click.echo(f"{stats['users']} users, {stats['items']} items, "
               f"{stats['ratings']} ratings ({stats['train_ratings']} train / "
               f"{stats['test_ratings']} test)")


@main.command()
@_common_options
@_mapped_errors
def train(config_path, seed, output):
    """Fit the configured model on the canonical training data."""
    cfg = _prepare(config_path, seed, output)
    train_m, _ = _load_split(cfg)
    params = _model_params(cfg)
    if cfg.model.kind == "pmf" and cfg.model.grid:
        folds = kfold(train_m, cfg.tune.ga.cv_folds, cfg.seed)
        best = grid_search(train_m, cfg.model.grid, folds,
                           cfg.evaluation.num_thresholds, cfg.seed)
        click.echo(f"grid search selected {best}", err=True)
        params.update(best)
    model = _ESTIMATORS[cfg.model.kind](seed=cfg.seed, **params)
    model.fit(train_m)
    ckpt = cfg.output_dir / f"checkpoint_{cfg.model.kind}.npz"
    model.save(ckpt)
    report_path = cfg.output_dir / f"train_report_{cfg.model.kind}.csv"
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,cost\n")
        for epoch, cost in enumerate(model.train_report_.epoch_costs):
            fh.write(f"{epoch},{repr(cost)}\n")
    click.echo(f"wrote {ckpt}", err=True)
    click.echo(f"trained in {model.train_report_.wall_time:.2f}s, "
               f"final cost {model.train_report_.final_cost:.6f}", err=True)


@main.command(name="evaluate")
@_common_options
@click.option("--checkpoint", type=click.Path(), default=None,
              help="Model checkpoint (defaults to the one `train` writes).")
@_mapped_errors
def evaluate_cmd(config_path, seed, output, checkpoint):
    """Write the threshold curve and aggregate score on the test data."""
    cfg = _prepare(config_path, seed, output)
    _, test_m = _load_split(cfg)
    ckpt = Path(checkpoint) if checkpoint else cfg.output_dir / f"checkpoint_{cfg.model.kind}.npz"
    model = _load_model(ckpt)
    if model.num_users_ != test_m.num_users or model.num_items_ != test_m.num_items:
        raise DataError(
            f"checkpoint dimensions ({model.num_users_}x{model.num_items_}) do not match "
            f"the dataset ({test_m.num_users}x{test_m.num_items})"
        )
    curve, agg = evaluate(model, test_m, cfg.evaluation.num_thresholds)
    kind = "pmf" if isinstance(model, PmfRecommender) else "bemf"
    curve.to_csv(cfg.output_dir / f"curve_{kind}.csv")
    (cfg.output_dir / f"aggregate_{kind}.json").write_text(agg.to_json() + "\n")
    click.echo(f"1-MAE {agg.one_minus_mae:.4f}, coverage {agg.coverage:.4f}")


@main.command()
@_common_options
@click.option("--no-recklessness", is_flag=True, default=False,
              help="Pin the recklessness gene to 0 for the comparison arm.")
@_mapped_errors
def tune(config_path, seed, output, no_recklessness):
    """NSGA-II hyperparameter search with cross-validated fitness."""
    cfg = _prepare(config_path, seed, output)
    train_m, _ = _load_split(cfg)
    ga = cfg.tune.ga
    folds = kfold(train_m, ga.cv_folds, cfg.seed)
    space = cfg.tune.genome_space(pin_recklessness=no_recklessness)

    def fitness(genome):
        return cv_fitness(genome, train_m, folds, cfg.evaluation.num_thresholds,
                          base_seed=cfg.seed, gradient_mode=cfg.tune.gradient_mode)

    suffix = "_pinned" if no_recklessness else ""
    ledger_path = cfg.output_dir / f"tune_ledger{suffix}.jsonl"
    with RunRecorder(ledger_path) as recorder:
        final = nsga2_run(ga, space, fitness, on_evaluated=recorder)
    front = pareto_front(final)
    front_path = cfg.output_dir / f"front{suffix}.csv"
    write_front_csv(front_path, front, space.names)
    click.echo(f"front of {len(front)} individuals -> {front_path}")


@main.command()
@_common_options
@click.option("--front", "front_paths", multiple=True, required=True,
              type=click.Path(), help="Front file(s) from `tune`; repeatable.")
@click.option("--thresholds", default="0.0,0.3,0.5,0.7",
              help="Comma-separated reliability thresholds.")
@_mapped_errors
def pareto(config_path, seed, output, front_paths, thresholds):
    """Hypervolume of each front on the test set per reliability threshold."""
    cfg = _prepare(config_path, seed, output)
    try:
        theta_list = [float(t) for t in thresholds.split(",") if t.strip() != ""]
    except ValueError:
        raise ConfigurationError(f"bad --thresholds value: {thresholds!r}") from None
    if not theta_list or any(not (0.0 <= t <= 1.0) for t in theta_list):
        raise ConfigurationError("thresholds must be a non-empty list within [0, 1]")
    train_m, test_m = _load_split(cfg)
    out_path = cfg.output_dir / "hypervolume.csv"
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("arm,theta,hypervolume,n_points\n")
        for path in front_paths:
            individuals = read_front_csv(path)
            if not individuals:
                raise DataError(f"front file {path} holds no individuals")
            arm = Path(path).stem
            per_theta = front_test_points(individuals, train_m, test_m, theta_list,
                                          base_seed=cfg.seed,
                                          gradient_mode=cfg.tune.gradient_mode)
            for theta in theta_list:
                points = per_theta[theta]
                hv = hypervolume_2d(points, (0.0, 0.0))
                fh.write(f"{arm},{repr(float(theta))},{repr(hv)},{len(points)}\n")
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
