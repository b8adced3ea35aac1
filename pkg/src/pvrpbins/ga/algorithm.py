"""Mixed permutation/binary genetic algorithm with penalised fitness."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from ..decode import Chromosome, decode, repair
from .operators import CROSSOVERS, crossover_mask, mutate_mask, mutate_perm

log = logging.getLogger(__name__)

_CACHE_LIMIT = 50_000


@dataclass(frozen=True)
class Score:
    fitness: float
    overall: float
    bin_cost: float
    routing_cost: float
    route_penalty: float
    time_penalty: float

    @property
    def feasible(self):
        return self.route_penalty == 0.0 and self.time_penalty == 0.0


@dataclass
class RunResult:
    best: Chromosome
    schedule: object
    score: Score
    history: list  # (generation, best fitness, mean fitness, feasible fraction)

    @property
    def best_fitness(self):
        return self.score.fitness


def score_schedule(schedule, problem, config):
    """Penalised fitness of a decoded schedule.

    Costs are summed in the same order as :func:`pvrpbins.model.evaluate`, so
    a feasible schedule's fitness equals its evaluated overall cost exactly.
    """
    catalog, fleet = problem.catalog, problem.fleet
    bin_cost = sum(catalog.cost[b] for b in schedule.bin_assignment)
    minutes = 0.0
    route_pen = 0.0
    time_pen = 0.0
    n_v = fleet.n_vehicles
    limit = fleet.shift_minutes
    for times in schedule.route_times:
        if len(times) > n_v:
            route_pen += (len(times) - n_v) / n_v
        for tt in times:
            minutes += tt
            if tt > limit:
                time_pen += tt - limit
    routing = fleet.cost_per_minute * minutes
    overall = bin_cost + routing
    fitness = overall + config.lam * route_pen + config.gamma * time_pen
    return Score(fitness, overall, bin_cost, routing, route_pen, time_pen)


def fitness(chromosome, problem, config):
    p = problem
    return score_schedule(decode(chromosome, p.instance, p.horizon, p.catalog, p.fleet),
                          p, config).fitness


def tournament_select(population, fitnesses, rng):
    """Binary tournament without replacement; lower fitness wins (ties: first drawn)."""
    n = len(population)
    i = rng.randrange(n)
    j = rng.randrange(n - 1)
    if j >= i:
        j += 1
    return i if fitnesses[i] <= fitnesses[j] else j


def random_chromosome(problem, rng):
    n = problem.instance.n_points
    working = problem.horizon.working
    perms = []
    for _ in working:
        row = list(range(1, n + 1))
        rng.shuffle(row)
        perms.append(tuple(row))
    rand = rng.random
    mask = tuple(tuple(w and rand() < 0.5 for w in working) for _ in range(n))
    return Chromosome(tuple(perms), mask)


class _Evaluator:
    """Decode + score with a bounded memo (decoding is deterministic)."""

    def __init__(self, problem, config):
        self.problem = problem
        self.config = config
        self.cache = {}

    def __call__(self, chromosome):
        hit = self.cache.get(chromosome)
        if hit is not None:
            return hit
        p = self.problem
        schedule = decode(chromosome, p.instance, p.horizon, p.catalog, p.fleet)
        result = (score_schedule(schedule, p, self.config), schedule)
        if len(self.cache) >= _CACHE_LIMIT:
            self.cache.clear()
        self.cache[chromosome] = result
        return result


def _fix(chromosome, problem):
    p = problem
    return repair(chromosome, p.instance, p.horizon, p.catalog, p.fleet)


def _offspring(pa, pb, problem, config, rng):
    working = problem.horizon.working
    n = problem.instance.n_points
    if rng.random() < config.crossover_rate:
        cross = CROSSOVERS[config.crossover_op]
        perms_a, perms_b = [], []
        for t, w in enumerate(working):
            if w:
                ca, cb = cross(pa.perms[t], pb.perms[t], rng)
                perms_a.append(ca)
                perms_b.append(cb)
            else:
                perms_a.append(pa.perms[t])
                perms_b.append(pb.perms[t])
        mask_a, mask_b = crossover_mask(pa.mask, pb.mask, working, rng)
    else:
        perms_a, perms_b = list(pa.perms), list(pb.perms)
        mask_a, mask_b = pa.mask, pb.mask
    children = []
    for perms, mask in ((perms_a, mask_a), (perms_b, mask_b)):
        perms = [mutate_perm(row, config.mutation_op, rng)
                 if w and rng.random() < config.mutation_rate else row
                 for row, w in zip(perms, working)]
        mask = mutate_mask(mask, 1.0 / n, working, rng)
        child = Chromosome(tuple(tuple(r) for r in perms), tuple(tuple(r) for r in mask))
        children.append(_fix(child, problem))
    return children


def run(problem, config, callback=None):
    """Evolve a population and return the best individual found.

    Each generation draws ``N`` binary-tournament winners, recombines
    consecutive pairs, mutates and repairs the offspring, then overwrites the
    ``elite_count`` worst offspring with the previous generation's elites.
    The whole run is reproducible from ``config.rng_seed``.
    """
    rng = random.Random(config.rng_seed)
    evaluate = _Evaluator(problem, config)
    n_pop = config.population_size

    population = [_fix(random_chromosome(problem, rng), problem) for _ in range(n_pop)]
    scored = [evaluate(c) for c in population]
    history = []

    def record(gen):
        fits = [s.fitness for s, _ in scored]
        feasible = sum(1 for s, _ in scored if s.feasible) / len(scored)
        history.append((gen, min(fits), sum(fits) / len(fits), feasible))
        if callback is not None:
            callback(gen, history[-1])

    def elites():
        order = sorted(range(n_pop), key=lambda k: scored[k][0].fitness)
        return [(population[k], scored[k]) for k in order[:config.elite_count]]

    record(0)
    best_idx = min(range(n_pop), key=lambda k: scored[k][0].fitness)
    best = (population[best_idx], scored[best_idx])
    saved = elites()

    for gen in range(1, config.generations + 1):
        fits = [s.fitness for s, _ in scored]
        parents = [tournament_select(population, fits, rng) for _ in range(n_pop)]
        children = []
        for k in range(0, n_pop, 2):
            children.extend(_offspring(population[parents[k]], population[parents[k + 1]],
                                       problem, config, rng))
        child_scores = [evaluate(c) for c in children]
        if saved:
            worst = sorted(range(n_pop), key=lambda k: child_scores[k][0].fitness,
                           reverse=True)[:len(saved)]
            for k, (chrom, sc) in zip(worst, saved):
                children[k] = chrom
                child_scores[k] = sc
        population, scored = children, child_scores
        record(gen)
        saved = elites()
        top = min(range(n_pop), key=lambda k: scored[k][0].fitness)
        if scored[top][0].fitness < best[1][0].fitness:
            best = (population[top], scored[top])

    chrom, (score, schedule) = best
    log.debug("best fitness %.4f (feasible=%s)", score.fitness, score.feasible)
    return RunResult(chrom, schedule, score, history)
