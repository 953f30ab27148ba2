"""NSGA-II hyperparameter search with cross-validated fitness.

Genomes are plain dicts keyed by gene name. Selection is binary tournament
on (rank, crowding); real genes recombine by intermediate blending, integer
genes by uniform pick; mutation resamples a gene uniformly inside its range.
Survivors are chosen from parents plus offspring by non-dominated rank, then
crowding. Fitness values are cached by genome, so re-evaluating a duplicate
individual costs nothing and the whole run is deterministic per seed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .bemf import BemfRecommender
from .data import FoldAssignment, RatingsMatrix
from .exceptions import ConfigurationError, DataError, DivergenceError
from .metrics import evaluate
from .pareto import ObjectivePoint, crowding_distance, non_dominated_sort

logger = logging.getLogger(__name__)

GENE_KINDS = ("real", "int", "log")


@dataclass(frozen=True)
class GeneSpec:
    """One chromosome slot: a named value constrained to [low, high]."""

    name: str
    low: float
    high: float
    kind: str = "real"
    pinned: float = None

    def __post_init__(self):
        if self.kind not in GENE_KINDS:
            raise ConfigurationError(f"unknown gene kind {self.kind!r}")
        if self.low > self.high:
            raise ConfigurationError(f"gene {self.name}: low > high")
        if self.kind == "log" and self.low <= 0:
            raise ConfigurationError(f"gene {self.name}: log genes need positive bounds")
        if self.pinned is not None and not (self.low <= self.pinned <= self.high):
            raise ConfigurationError(f"gene {self.name}: pinned value outside range")

    def sample(self, rng):
        if self.pinned is not None:
            return self.pinned
        if self.kind == "int":
            return int(rng.integers(int(self.low), int(self.high) + 1))
        if self.kind == "log":
            return float(10.0 ** rng.uniform(math.log10(self.low), math.log10(self.high)))
        return float(rng.uniform(self.low, self.high))

    def blend(self, a, b, rng):
        """Two offspring values from two parent values."""
        if self.pinned is not None:
            return self.pinned, self.pinned
        if self.kind == "int":
            return (a if rng.random() < 0.5 else b), (a if rng.random() < 0.5 else b)
        if self.kind == "log":
            la, lb = math.log10(a), math.log10(b)
            u1, u2 = rng.random(), rng.random()
            return float(10.0 ** (la + u1 * (lb - la))), float(10.0 ** (la + u2 * (lb - la)))
        u1, u2 = rng.random(), rng.random()
        return float(a + u1 * (b - a)), float(a + u2 * (b - a))

    def contains(self, value) -> bool:
        return self.low - 1e-12 <= value <= self.high + 1e-12


@dataclass(frozen=True)
class GenomeSpace:
    genes: tuple

    @property
    def names(self):
        return [g.name for g in self.genes]

    def sample(self, rng) -> dict:
        return {g.name: g.sample(rng) for g in self.genes}

    def mutate(self, genome: dict, rng, probability: float) -> dict:
        out = dict(genome)
        for g in self.genes:
            if rng.random() < probability:
                out[g.name] = g.sample(rng)
        return out

    def crossover(self, a: dict, b: dict, rng):
        c1, c2 = {}, {}
        for g in self.genes:
            v1, v2 = g.blend(a[g.name], b[g.name], rng)
            c1[g.name], c2[g.name] = v1, v2
        return c1, c2

    def variation(self, pool, rng, crossover_probability, mutation_probability):
        """Map a mating pool to the same number of offspring."""
        offspring = []
        for j in range(0, len(pool), 2):
            a = pool[j]
            b = pool[j + 1] if j + 1 < len(pool) else pool[0]
            if rng.random() < crossover_probability:
                c1, c2 = self.crossover(a, b, rng)
            else:
                c1, c2 = dict(a), dict(b)
            offspring.append(self.mutate(c1, rng, mutation_probability))
            if j + 1 < len(pool):
                offspring.append(self.mutate(c2, rng, mutation_probability))
        return offspring[: len(pool)]

    def contains(self, genome: dict) -> bool:
        return all(g.contains(genome[g.name]) for g in self.genes)

    def canonical(self, genome: dict):
        return tuple((g.name, genome[g.name]) for g in self.genes)


def bemf_genome_space(factors=(2, 10), learning_rate=(1e-4, 0.5), l2=(0.0, 0.2),
                      recklessness=(-2.0, 2.0), epochs=(20, 150),
                      pin_recklessness: bool = False) -> GenomeSpace:
    """The default search space over BeMF hyperparameters."""
    reck_pin = 0.0 if pin_recklessness else None
    return GenomeSpace(genes=(
        GeneSpec("factors", factors[0], factors[1], kind="int"),
        GeneSpec("learning_rate", learning_rate[0], learning_rate[1], kind="log"),
        GeneSpec("l2", l2[0], l2[1], kind="real"),
        GeneSpec("recklessness", recklessness[0], recklessness[1], kind="real",
                 pinned=reck_pin),
        GeneSpec("epochs", epochs[0], epochs[1], kind="int"),
    ))


@dataclass
class GaConfig:
    population_size: int = 100
    generations: int = 150
    tournament_size: int = 2
    mutation_probability: float = 0.01
    crossover_probability: float = 0.9
    seed: int = 0
    cv_folds: int = 5

    def validate(self):
        if self.population_size < 2:
            raise ConfigurationError("population_size must be >= 2")
        if self.generations < 1:
            raise ConfigurationError("generations must be >= 1")
        if self.tournament_size < 1:
            raise ConfigurationError("tournament_size must be >= 1")
        for name in ("mutation_probability", "crossover_probability"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ConfigurationError(f"{name} must be in [0, 1]")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")
        if self.cv_folds < 2:
            raise ConfigurationError("cv_folds must be >= 2")


@dataclass
class EvaluatedIndividual:
    genome: dict
    fitness: ObjectivePoint
    rank: int = 0
    crowding: float = 0.0


def genome_hash(genome: dict) -> int:
    blob = repr(tuple(sorted(genome.items()))).encode("utf-8")
    return int.from_bytes(hashlib.md5(blob).digest()[:8], "big")


def _mask_hash(mask: np.ndarray) -> int:
    blob = np.flatnonzero(mask).astype(np.int64).tobytes()
    return int.from_bytes(hashlib.md5(blob).digest()[:8], "big")


def derive_seed(base_seed: int, genome: dict, salt: int) -> int:
    ss = np.random.SeedSequence([int(base_seed), genome_hash(genome), int(salt)])
    return int(ss.generate_state(1)[0])


def estimator_from_genome(genome: dict, seed: int,
                          gradient_mode: str = "undamped") -> BemfRecommender:
    return BemfRecommender(
        factors=int(round(genome["factors"])),
        learning_rate=float(genome["learning_rate"]),
        l2=float(genome["l2"]),
        recklessness=float(genome["recklessness"]),
        epochs=int(round(genome["epochs"])),
        seed=seed,
        gradient_mode=gradient_mode,
    )


def split_fitness(genome: dict, fit_data: RatingsMatrix, heldout: RatingsMatrix,
                  n_thresholds: int, seed: int,
                  gradient_mode: str = "undamped") -> ObjectivePoint:
    """Train on one partition, score on the other. Raises on divergence."""
    model = estimator_from_genome(genome, seed, gradient_mode)
    model.fit(fit_data)
    _, agg = evaluate(model, heldout, n_thresholds)
    return ObjectivePoint(agg.one_minus_mae, agg.coverage)


def cv_fitness(genome: dict, train: RatingsMatrix, folds: FoldAssignment,
               n_thresholds: int = 20, base_seed: int = 0,
               gradient_mode: str = "undamped") -> ObjectivePoint:
    """Unweighted mean of the per-fold aggregate scores.

    A genome whose training diverges on any fold gets the worst point (0, 0)
    so the surrounding search can carry on. Per-fold training seeds derive
    from the held-out content, so relabeling fold ids changes nothing.
    """
    acc, cov = [], []
    for f in range(folds.n_folds):
        held = folds.heldout_mask(f)
        try:
            point = split_fitness(genome, train.subset(~held), train.subset(held),
                                  n_thresholds,
                                  derive_seed(base_seed, genome, _mask_hash(held)),
                                  gradient_mode)
        except DivergenceError:
            logger.warning("genome %s diverged on fold %d; assigning fitness (0, 0)",
                           genome, f)
            return ObjectivePoint(0.0, 0.0)
        acc.append(point.one_minus_mae)
        cov.append(point.coverage)
    # fsum is exactly rounded, so the mean ignores fold iteration order
    return ObjectivePoint(math.fsum(acc) / len(acc), math.fsum(cov) / len(cov))


def _rank_and_crowd(fits):
    points = [f.as_tuple() for f in fits]
    fronts = non_dominated_sort(points)
    ranks = np.empty(len(points), dtype=int)
    crowds = np.empty(len(points), dtype=float)
    for depth, front in enumerate(fronts):
        ranks[front] = depth
        crowds[front] = crowding_distance([points[i] for i in front])
    return ranks, crowds


def _tournament(rng, ranks, crowds, size: int) -> int:
    contestants = rng.integers(0, len(ranks), size=size)
    best = contestants[0]
    for c in contestants[1:]:
        if (ranks[c], -crowds[c], c) < (ranks[best], -crowds[best], best):
            best = c
    return int(best)


def _nsga2_select(fits, n: int):
    points = [f.as_tuple() for f in fits]
    fronts = non_dominated_sort(points)
    chosen = []
    for front in fronts:
        if len(chosen) + len(front) <= n:
            chosen.extend(front)
            continue
        crowds = crowding_distance([points[i] for i in front])
        by_crowd = sorted(range(len(front)), key=lambda j: (-crowds[j], front[j]))
        chosen.extend(front[j] for j in by_crowd[: n - len(chosen)])
        break
    return chosen


def nsga2_run(config: GaConfig, space: GenomeSpace, fitness,
              on_evaluated=None) -> list:
    """Run the elitist two-objective GA; returns the final ranked population.

    `fitness` maps a genome dict to an ObjectivePoint and must be
    deterministic; `on_evaluated(generation, genome, fitness)` is called for
    every individual of every generation, cached or not.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    cache: dict = {}

    def evaluated(genome, generation):
        key = space.canonical(genome)
        if key not in cache:
            cache[key] = fitness(genome)
        if on_evaluated is not None:
            on_evaluated(generation, genome, cache[key])
        return cache[key]

    population = [space.sample(rng) for _ in range(config.population_size)]
    fits = [evaluated(g, 0) for g in population]
    ranks, crowds = _rank_and_crowd(fits)
    for generation in range(1, config.generations + 1):
        pool = [population[_tournament(rng, ranks, crowds, config.tournament_size)]
                for _ in range(config.population_size)]
        offspring = space.variation(pool, rng, config.crossover_probability,
                                    config.mutation_probability)
        off_fits = [evaluated(g, generation) for g in offspring]
        genomes = population + offspring
        all_fits = fits + off_fits
        keep = _nsga2_select(all_fits, config.population_size)
        population = [genomes[i] for i in keep]
        fits = [all_fits[i] for i in keep]
        ranks, crowds = _rank_and_crowd(fits)
    return [EvaluatedIndividual(genome=g, fitness=f, rank=int(r), crowding=float(c))
            for g, f, r, c in zip(population, fits, ranks, crowds)]


class RunRecorder:
    """Append-only JSONL ledger of every evaluated individual."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")

    def __call__(self, generation, genome, fitness: ObjectivePoint):
        record = {
            "generation": int(generation),
            "genome": {k: genome[k] for k in sorted(genome)},
            "fitness": {"one_minus_mae": fitness.one_minus_mae,
                        "coverage": fitness.coverage},
        }
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_front_csv(path, individuals, gene_names) -> None:
    """Final-front export: objectives first, then the genes."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["one_minus_mae", "coverage", *gene_names]) + "\n")
        for ind in individuals:
            row = [repr(float(ind.fitness.one_minus_mae)), repr(float(ind.fitness.coverage))]
            row.extend(repr(float(ind.genome[name])) for name in gene_names)
            fh.write(",".join(row) + "\n")


def front_test_points(individuals, train: RatingsMatrix, test: RatingsMatrix,
                      thresholds, base_seed: int = 0,
                      gradient_mode: str = "undamped") -> dict:
    """Test-set objective points of a front at each reliability threshold.

    Each individual carrying a genome is retrained once on `train` and its
    test predictions are filtered at every threshold; a threshold that leaves
    no predictions yields the worst point (0, 0), as does divergence.
    Individuals without a genome keep their stored objectives at every
    threshold.
    """
    from .metrics import _metrics_at

    required = {"factors", "learning_rate", "l2", "recklessness", "epochs"}
    thresholds = [float(t) for t in thresholds]
    per_theta = {theta: [] for theta in thresholds}
    truth = test.raw_scores()
    for ind in individuals:
        if ind.genome is None:
            for theta in thresholds:
                per_theta[theta].append(ind.fitness)
            continue
        missing = required - set(ind.genome)
        if missing:
            raise DataError(f"front individual is missing genes {sorted(missing)}")
        model = estimator_from_genome(ind.genome, derive_seed(base_seed, ind.genome, 0),
                                      gradient_mode)
        try:
            model.fit(train)
        except DivergenceError:
            logger.warning("front genome %s diverged in test retraining", ind.genome)
            for theta in thresholds:
                per_theta[theta].append(ObjectivePoint(0.0, 0.0))
            continue
        pred, rel = model.predict_with_reliability(test.pairs())
        for theta in thresholds:
            mae, cov = _metrics_at(truth, pred, rel, theta, test.scale.width)
            if mae is None:
                per_theta[theta].append(ObjectivePoint(0.0, 0.0))
            else:
                per_theta[theta].append(ObjectivePoint(1.0 - mae, cov))
    return per_theta


def read_front_csv(path):
    """Read a front file; rows without gene columns get genome None."""
    individuals = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if header[:2] != ["one_minus_mae", "coverage"]:
            raise DataError(f"{path}: unexpected front header {header!r}")
        gene_names = header[2:]
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(header):
                raise DataError(f"{path}: row width does not match header")
            fit = ObjectivePoint(float(parts[0]), float(parts[1]))
            genome = None
            if gene_names:
                genome = {name: float(v) for name, v in zip(gene_names, parts[2:])}
            individuals.append(EvaluatedIndividual(genome=genome, fitness=fit))
    return individuals
