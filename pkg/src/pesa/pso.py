"""Constriction-coefficient particle swarm with memory-injected particles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Candidate, ContractViolation, FitnessFunction, clip_to_bounds, evaluate


@dataclass(frozen=True)
class PSOConfig:
    eta: int = 30
    eta_replay: int = 30
    c1: float = 2.05
    c2: float = 2.05

    def __post_init__(self):
        if self.eta < 1 or self.eta_replay < 0:
            raise ContractViolation("need eta >= 1 and eta_replay >= 0")
        if self.c1 + self.c2 <= 4:
            raise ContractViolation("constriction needs c1 + c2 > 4")


@dataclass
class Particle:
    x: np.ndarray
    y: float
    velocity: np.ndarray
    pbest_x: np.ndarray
    pbest_y: float

    @classmethod
    def from_candidate(cls, cand: Candidate) -> "Particle":
        x = np.array(cand.x)
        return cls(x, cand.y, np.zeros_like(x), x.copy(), cand.y)

    def candidate(self) -> Candidate:
        return Candidate(self.x, self.y)


def constriction(c1: float, c2: float) -> float:
    """Clerc-Kennedy constriction factor ``K`` for ``phi = c1 + c2 > 4``."""
    phi = c1 + c2
    if phi <= 4:
        raise ContractViolation(f"phi = c1 + c2 = {phi} must exceed 4")
    return 2.0 / abs(2.0 - phi - math.sqrt(phi * phi - 4.0 * phi))


def velocity_update(
    p: Particle,
    gbest_x: np.ndarray,
    K: float,
    c1: float,
    c2: float,
    rng: Optional[np.random.Generator] = None,
    r1: Optional[np.ndarray] = None,
    r2: Optional[np.ndarray] = None,
) -> np.ndarray:
    """New velocity; ``r1``/``r2`` are drawn per coordinate unless given."""
    n = p.x.size
    if gbest_x.shape != p.x.shape:
        raise ContractViolation("gbest and particle dimensions differ")
    if r1 is None:
        r1 = rng.random(n)
    if r2 is None:
        r2 = rng.random(n)
    return K * (p.velocity + c1 * r1 * (p.pbest_x - p.x) + c2 * r2 * (gbest_x - p.x))


def pso_generation(
    survivors: Sequence[Particle],
    injected: Sequence[Candidate],
    fitness: FitnessFunction,
    config: PSOConfig,
    rng: np.random.Generator,
):
    """Move the assembled swarm once and keep the ``eta`` fittest particles.

    Returns ``(selected, swarm_fitness)``; ``swarm_fitness`` covers every
    particle moved this generation.
    """
    if len(survivors) > config.eta:
        raise ContractViolation(f"{len(survivors)} survivors exceed eta={config.eta}")
    swarm = list(survivors) + [Particle.from_candidate(c) for c in injected]
    if not swarm:
        raise ContractViolation("empty swarm")
    space = fitness.space
    K = constriction(config.c1, config.c2)
    gbest_x = swarm[int(np.argmin([p.pbest_y for p in swarm]))].pbest_x.copy()

    moved, ys = [], np.empty(len(swarm))
    for k, p in enumerate(swarm):
        v = velocity_update(p, gbest_x, K, config.c1, config.c2, rng)
        x = clip_to_bounds(p.x + v, space)
        y = evaluate(fitness, x, rng, f"PSO particle {k}")
        if y < p.pbest_y:
            pbest_x, pbest_y = x.copy(), y
        else:
            pbest_x, pbest_y = p.pbest_x, p.pbest_y
        moved.append(Particle(x, y, v, pbest_x, pbest_y))
        ys[k] = y
    order = np.argsort(ys, kind="stable")[: config.eta]
    return [moved[i] for i in order], ys
