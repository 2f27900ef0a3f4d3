"""(mu + mu', lambda) evolution strategy with log-normal self-adaptation.

Each individual carries one mutation standard deviation per attribute,
bounded in ``[1/n, 0.5]``. Each offspring comes from exactly one operator: two-point
crossover (probability ``cx_prob``), mutation (``mut_prob``) or an unmodified
copy (the remainder).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core import Candidate, ContractViolation, FitnessFunction, SearchSpace, clip_to_bounds, evaluate

CROSSOVER, MUTATION, REPRODUCTION = "cx", "mut", "rep"


class StaleFitnessError(RuntimeError):
    """Fitness of a modified individual was read before re-evaluation."""


@dataclass(frozen=True)
class ESConfig:
    mu: int = 30
    mu_replay: int = 30
    lambda_: int = 60
    cx_prob: float = 0.6
    mut_prob: float = 0.15
    tau: Optional[float] = None
    tau_prime: Optional[float] = None
    strategy_min: Optional[float] = None
    strategy_max: float = 0.5

    def __post_init__(self):
        if self.mu < 1 or self.lambda_ < self.mu:
            raise ContractViolation("need lambda >= mu >= 1")
        if self.mu_replay < 0:
            raise ContractViolation("mu_replay must be >= 0")
        if min(self.cx_prob, self.mut_prob) < 0 or self.cx_prob + self.mut_prob > 1:
            raise ContractViolation("need cx_prob, mut_prob >= 0 and cx_prob + mut_prob <= 1")

    def resolved(self, dim: int) -> "ESConfig":
        """Fill the dimension-dependent defaults (learning rates, strategy floor)."""
        return replace(
            self,
            tau=1.0 / math.sqrt(2.0 * math.sqrt(dim)) if self.tau is None else self.tau,
            tau_prime=1.0 / math.sqrt(2.0 * dim) if self.tau_prime is None else self.tau_prime,
            strategy_min=1.0 / dim if self.strategy_min is None else self.strategy_min,
        )


@dataclass
class ESIndividual:
    x: np.ndarray
    strategy: np.ndarray
    _y: Optional[float] = field(default=None, repr=False)

    @property
    def y(self) -> float:
        if self._y is None:
            raise StaleFitnessError("individual modified since its last evaluation")
        return self._y

    @property
    def evaluated(self) -> bool:
        return self._y is not None

    def candidate(self) -> Candidate:
        return Candidate(self.x, self.y)

    def copy(self) -> "ESIndividual":
        return ESIndividual(self.x.copy(), self.strategy.copy(), self._y)


def init_strategy(dim: int, config: ESConfig, rng: np.random.Generator) -> np.ndarray:
    cfg = config.resolved(dim)
    return rng.uniform(cfg.strategy_min, cfg.strategy_max, dim)


def from_candidate(cand: Candidate, config: ESConfig, rng: np.random.Generator) -> ESIndividual:
    return ESIndividual(np.array(cand.x), init_strategy(cand.x.size, config, rng), cand.y)


def mutate(ind: ESIndividual, space: SearchSpace, config: ESConfig, rng) -> ESIndividual:
    """Log-normal strategy update, then ``x_i += strategy_i * N(0, 1)``."""
    cfg = config.resolved(space.dim)
    n = space.dim
    shared = rng.standard_normal()
    per_coord = rng.standard_normal(n)
    strategy = np.clip(
        ind.strategy * np.exp(cfg.tau_prime * shared + cfg.tau * per_coord),
        cfg.strategy_min,
        cfg.strategy_max,
    )
    step = strategy * rng.standard_normal(n)
    return ESIndividual(clip_to_bounds(ind.x + step, space), strategy)


def _cut_points(n: int, rng) -> tuple[int, int]:
    if n < 3:
        return 1, n
    p1, p2 = sorted(rng.choice(np.arange(1, n), size=2, replace=False))
    return int(p1), int(p2)


def crossover(a: ESIndividual, b: ESIndividual, rng, cuts: Optional[tuple[int, int]] = None):
    """Two-point crossover swapping ``[p1, p2)`` in both position and strategy.

    For ``n < 3`` there is only one admissible cut and the tails are swapped.
    """
    n = a.x.size
    if b.x.size != n:
        raise ContractViolation("crossover parents differ in dimension")
    if n < 2:
        return a.copy(), b.copy()
    p1, p2 = cuts if cuts is not None else _cut_points(n, rng)
    xa, xb = a.x.copy(), b.x.copy()
    sa, sb = a.strategy.copy(), b.strategy.copy()
    xa[p1:p2], xb[p1:p2] = b.x[p1:p2], a.x[p1:p2]
    sa[p1:p2], sb[p1:p2] = b.strategy[p1:p2], a.strategy[p1:p2]
    return ESIndividual(xa, sa), ESIndividual(xb, sb)


def generate_offspring(
    parents: Sequence[ESIndividual],
    space: SearchSpace,
    config: ESConfig,
    rng,
    return_ops: bool = False,
):
    """Produce ``lambda_`` offspring from ``parents``, one operator each."""
    if not parents:
        raise ContractViolation("cannot generate offspring from an empty parent pool")
    offspring, ops = [], []
    n_par = len(parents)
    for _ in range(config.lambda_):
        u = rng.random()
        if u < config.cx_prob:
            if n_par > 1:
                i, j = rng.choice(n_par, size=2, replace=False)
            else:
                i = j = 0
            child, _ = crossover(parents[i], parents[j], rng)
            op = CROSSOVER
        elif u < config.cx_prob + config.mut_prob:
            child = mutate(parents[rng.integers(n_par)], space, config, rng)
            op = MUTATION
        else:
            parent = parents[rng.integers(n_par)]
            child = ESIndividual(parent.x.copy(), parent.strategy.copy())
            op = REPRODUCTION
        offspring.append(child)
        ops.append(op)
    return (offspring, ops) if return_ops else offspring


def es_generation(
    survivors: Sequence[ESIndividual],
    injected: Sequence[Candidate],
    fitness: FitnessFunction,
    config: ESConfig,
    rng: np.random.Generator,
):
    """One ES generation with comma selection.

    Returns ``(selected, offspring_fitness)`` where ``selected`` are the
    ``mu`` best offspring in ascending fitness order and
    ``offspring_fitness`` holds the fitness of all ``lambda_`` offspring.
    """
    space = fitness.space
    if len(survivors) > config.mu:
        raise ContractViolation(f"{len(survivors)} survivors exceed mu={config.mu}")
    parents = list(survivors) + [from_candidate(c, config, rng) for c in injected]
    offspring = generate_offspring(parents, space, config, rng)
    ys = np.empty(len(offspring))
    for k, child in enumerate(offspring):
        child._y = evaluate(fitness, child.x, rng, f"ES offspring {k}")
        ys[k] = child._y
    order = np.argsort(ys, kind="stable")[: config.mu]
    return [offspring[i] for i in order], ys
