"""Single-chain simulated annealing with backdoor greedy replay.

Temperature follows the fast schedule
``T(N) = T_max * exp(-ln(T_max / T_min) * N / N_steps)`` over the cumulative
step count ``N`` of the whole run, so it is not reset between generations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import Candidate, ContractViolation, FitnessFunction, SearchSpace, clip_to_bounds, evaluate


@dataclass(frozen=True)
class SAConfig:
    t_max: float = 10000.0
    t_min: float = 1.0
    chi: float = 0.1
    chain_size: int = 60
    alpha_backdoor: float = 0.1
    step_scale: float = 0.05

    def __post_init__(self):
        if not self.t_max > self.t_min > 0:
            raise ContractViolation("need t_max > t_min > 0")
        if not 0.0 <= self.chi <= 1.0:
            raise ContractViolation("chi must lie in [0, 1]")
        if not 0.0 <= self.alpha_backdoor <= 1.0:
            raise ContractViolation("alpha_backdoor must lie in [0, 1]")
        if self.chain_size < 1 or self.step_scale <= 0:
            raise ContractViolation("need chain_size >= 1 and step_scale > 0")


@dataclass
class SAChain:
    x_prev: np.ndarray
    e_prev: float
    best_x: np.ndarray
    best_y: float
    total_steps: int
    step_count: int = 0

    @classmethod
    def start(cls, cand: Candidate, total_steps: int) -> "SAChain":
        x = np.array(cand.x)
        return cls(x, cand.y, x.copy(), cand.y, total_steps)

    @property
    def remaining(self) -> int:
        return self.total_steps - self.step_count


@dataclass
class SAGeneration:
    last: Candidate
    best: Candidate
    chain: SAChain
    fitness: np.ndarray  # fitness of every proposal, backdoor ones included
    evaluations: int
    backdoor_steps: int


def temperature(N: int, config: SAConfig, n_steps: int) -> float:
    if not 1 <= N <= n_steps:
        raise ContractViolation(f"annealing step {N} outside [1, {n_steps}]")
    return config.t_max * math.exp(-math.log(config.t_max / config.t_min) * N / n_steps)


def random_walk(x, chi: float, step_scale: float, space: SearchSpace, rng) -> np.ndarray:
    """Gaussian perturbation of each attribute with probability ``chi``.

    At least one attribute always moves; if none fired one is picked uniformly.
    """
    n = space.dim
    mask = rng.random(n) < chi
    if not mask.any():
        mask[rng.integers(n)] = True
    step = step_scale * space.span * rng.standard_normal(n)
    return clip_to_bounds(np.where(mask, x + step, x), space)


def metropolis_accept(delta_e: float, T: float, rng) -> bool:
    if T <= 0:
        raise ContractViolation("temperature must be positive")
    if delta_e < 0:
        return True
    # draw even when the outcome is certain, so the stream advances identically
    u = rng.random()
    return math.exp(-delta_e / T) > u


def sa_generation(
    chain: SAChain,
    theta_init: Optional[Candidate],
    memory_best: Optional[Candidate],
    fitness: FitnessFunction,
    config: SAConfig,
    rng: np.random.Generator,
) -> SAGeneration:
    """Run ``chain_size`` annealing steps.

    The chain restarts from ``theta_init`` when given, otherwise it continues
    from its current state. With probability ``alpha_backdoor`` a step
    proposes ``memory_best`` (with its stored fitness) instead of a random walk.
    """
    if chain.remaining < config.chain_size:
        raise ContractViolation(
            f"annealing budget exhausted: {chain.remaining} steps left, {config.chain_size} needed"
        )
    chain = replace(chain)
    if theta_init is not None:
        chain.x_prev, chain.e_prev = np.array(theta_init.x), theta_init.y
    # generation best covers every proposal, accepted or not
    best_x, best_y = chain.x_prev, chain.e_prev
    space = fitness.space
    ys = np.empty(config.chain_size)
    evals = backdoor = 0
    for k in range(config.chain_size):
        chain.step_count += 1
        T = temperature(chain.step_count, config, chain.total_steps)
        if memory_best is not None and rng.random() < config.alpha_backdoor:
            x, e = memory_best.x, memory_best.y
            backdoor += 1
        else:
            x = random_walk(chain.x_prev, config.chi, config.step_scale, space, rng)
            e = evaluate(fitness, x, rng, f"SA step {chain.step_count}")
            evals += 1
        ys[k] = e
        if e < best_y:
            best_x, best_y = x, e
        if metropolis_accept(e - chain.e_prev, T, rng):
            chain.x_prev, chain.e_prev = x, e
    if best_y < chain.best_y:
        chain.best_x, chain.best_y = np.array(best_x), best_y
    return SAGeneration(
        last=Candidate(chain.x_prev, chain.e_prev),
        best=Candidate(best_x, best_y),
        chain=chain,
        fitness=ys,
        evaluations=evals,
        backdoor_steps=backdoor,
    )
