"""PESA orchestration: warmup, per-generation replay, fork-join, memory update.

Each generation draws the replayed samples from an immutable snapshot of the
memory, runs the ES, PSO and SA generations independently (each on its own
random stream), then merges their survivors into the memory and anneals the
priority exponent. Running the three tasks in threads gives the same result
as running them one after another.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import es, pso, sa
from .core import Candidate, ContractViolation, FitnessError, FitnessFunction, evaluate, make_streams, uniform_sample
from .memory import MemoryConfig, ReplayMemory

log = logging.getLogger(__name__)

ALGORITHMS = ("pesa", "es", "pso", "sa")


@dataclass(frozen=True)
class PESAConfig:
    n_gen: int = 100
    n_warmup: int = 500
    es: es.ESConfig = field(default_factory=es.ESConfig)
    pso: pso.PSOConfig = field(default_factory=pso.PSOConfig)
    sa: sa.SAConfig = field(default_factory=sa.SAConfig)
    memory: MemoryConfig = field(default_factory=MemoryConfig)
    seed: int = 0
    parallel: bool = False

    def __post_init__(self):
        if self.n_gen < 1:
            raise ContractViolation("n_gen must be >= 1")
        if self.n_warmup < max(self.es.mu_replay, self.pso.eta_replay, 1):
            raise ContractViolation("n_warmup must cover the replay batch sizes")

    @property
    def annealing_steps(self) -> int:
        return self.n_gen * self.sa.chain_size


@dataclass
class GenerationRecord:
    generation: int
    gen_min: float
    best_so_far: float
    mean: float
    std: float
    evaluations: int  # cumulative, warmup excluded
    alpha: Optional[float] = None
    es_best: Optional[float] = None
    pso_best: Optional[float] = None
    sa_best: Optional[float] = None


@dataclass
class PESAState:
    memory: ReplayMemory
    streams: dict
    chain: sa.SAChain
    es_population: list = field(default_factory=list)
    swarm: list = field(default_factory=list)
    generation: int = 0
    evaluations: int = 0


def warmup(config: PESAConfig, fitness: FitnessFunction, rng: np.random.Generator) -> ReplayMemory:
    """Fill a fresh memory with ``n_warmup`` uniform samples."""
    space = fitness.space
    memory = ReplayMemory(space.dim, config.memory)
    xs = uniform_sample(space, rng, size=config.n_warmup)
    memory.update(Candidate(x, evaluate(fitness, x, rng, f"warmup sample {i}")) for i, x in enumerate(xs))
    memory.alpha = config.memory.alpha_init
    return memory


def initialize(config: PESAConfig, fitness: FitnessFunction) -> PESAState:
    streams = make_streams(config.seed)
    memory = warmup(config, fitness, streams["warmup"])
    chain = sa.SAChain.start(memory.sample_best(), config.annealing_steps)
    return PESAState(memory=memory, streams=streams, chain=chain)


def _guarded(name: str, generation: int, fn, *args):
    try:
        return fn(*args)
    except (FitnessError, ContractViolation) as exc:
        raise FitnessError(f"generation {generation}, {name}: {exc}") from exc


def pesa_generation(
    state: PESAState,
    fitness: FitnessFunction,
    config: PESAConfig,
    executor: Optional[ThreadPoolExecutor] = None,
):
    """Advance ``state`` by one PESA generation; returns ``(state, record)``."""
    k = state.generation + 1
    snap = state.memory.snapshot()
    mem_rng = state.streams["memory"]
    mu_replay = snap.sample_prioritized(config.es.mu_replay, mem_rng)
    eta_replay = snap.sample_prioritized(config.pso.eta_replay, mem_rng)
    theta = snap.sample_prioritized(1, mem_rng)[0]
    best = snap.sample_best()

    tasks = {
        "ES": (es.es_generation, state.es_population, mu_replay, fitness, config.es, state.streams["es"]),
        "PSO": (pso.pso_generation, state.swarm, eta_replay, fitness, config.pso, state.streams["pso"]),
        "SA": (sa.sa_generation, state.chain, theta, best, fitness, config.sa, state.streams["sa"]),
    }
    if executor is not None:
        futures = {name: executor.submit(_guarded, name, k, *task) for name, task in tasks.items()}
        out = {name: f.result() for name, f in futures.items()}
    else:
        out = {name: _guarded(name, k, *task) for name, task in tasks.items()}
    return state, merge_generation(state, out, config)


def merge_generation(state: PESAState, out: dict, config: PESAConfig) -> GenerationRecord:
    """Join step: fold the three task outputs into the memory and the state."""
    es_pop, es_ys = out["ES"]
    swarm, pso_ys = out["PSO"]
    sa_out: sa.SAGeneration = out["SA"]
    k = state.generation + 1
    alpha = state.memory.alpha

    state.memory.update(
        [ind.candidate() for ind in es_pop]
        + [p.candidate() for p in swarm]
        + [sa_out.last, sa_out.best]
    )
    state.memory.anneal_alpha(min(k + 1, config.n_gen), config.n_gen)

    state.es_population, state.swarm, state.chain = es_pop, swarm, sa_out.chain
    state.generation = k
    state.evaluations += es_ys.size + pso_ys.size + sa_out.evaluations
    ys = np.concatenate([es_ys, pso_ys, sa_out.fitness])
    return GenerationRecord(
        generation=k,
        gen_min=float(ys.min()),
        best_so_far=float(state.memory.ys[0]),
        mean=float(ys.mean()),
        std=float(ys.std()),
        evaluations=state.evaluations,
        alpha=alpha,
        es_best=float(es_ys.min()),
        pso_best=float(pso_ys.min()),
        sa_best=float(sa_out.fitness.min()),
    )


def run(
    config: PESAConfig,
    fitness: FitnessFunction,
    return_state: bool = False,
    on_generation: Optional[Callable[[GenerationRecord], None]] = None,
):
    """Warmup followed by ``n_gen`` generations.

    Returns ``(best, history)``, plus the final :class:`PESAState` when
    ``return_state`` is set.
    """
    state = initialize(config, fitness)
    history = []
    executor = ThreadPoolExecutor(max_workers=3) if config.parallel else None
    try:
        for _ in range(config.n_gen):
            state, record = pesa_generation(state, fitness, config, executor)
            history.append(record)
            if on_generation is not None:
                on_generation(record)
    finally:
        if executor is not None:
            executor.shutdown()
    best = state.memory.sample_best()
    return (best, history, state) if return_state else (best, history)


@dataclass
class StandaloneState:
    """What a decoupled run keeps: the warmup pool and the algorithm's own state."""

    memory: ReplayMemory
    population: list
    chain: Optional[sa.SAChain]
    best: Candidate


def run_standalone(algorithm: str, config: PESAConfig, fitness: FitnessFunction, return_state: bool = False):
    """Run ES, PSO or SA alone from the same warmup pool PESA would use.

    Replay is switched off: no memory injections and no backdoor steps. ES
    starts from the best ``mu`` warmup samples, PSO from the best ``eta`` and
    SA from the single best, whose chain then runs uninterrupted.
    """
    if algorithm not in ("es", "pso", "sa"):
        raise ValueError(f"unknown standalone algorithm {algorithm!r}; choose es, pso or sa")
    streams = make_streams(config.seed)
    memory = warmup(config, fitness, streams["warmup"])
    pool = memory.entries
    best = pool[0]
    rng = streams[algorithm]
    history = []
    evaluations = 0
    population, chain = [], None
    if algorithm == "es":
        population = [es.from_candidate(c, config.es, rng) for c in pool[: config.es.mu]]
    elif algorithm == "pso":
        population = [pso.Particle.from_candidate(c) for c in pool[: config.pso.eta]]
    else:
        chain = sa.SAChain.start(best, config.annealing_steps)
        sa_cfg = sa.SAConfig(**{**config.sa.__dict__, "alpha_backdoor": 0.0})

    for k in range(1, config.n_gen + 1):
        if algorithm == "es":
            population, ys = _guarded("ES", k, es.es_generation, population, [], fitness, config.es, rng)
            evaluations += ys.size
            gen_best = population[0].candidate()
        elif algorithm == "pso":
            population, ys = _guarded("PSO", k, pso.pso_generation, population, [], fitness, config.pso, rng)
            evaluations += ys.size
            gen_best = population[0].candidate()
        else:
            out = _guarded("SA", k, sa.sa_generation, chain, None, None, fitness, sa_cfg, rng)
            chain, ys = out.chain, out.fitness
            evaluations += out.evaluations
            gen_best = out.best
        if gen_best.y < best.y:
            best = gen_best
        history.append(
            GenerationRecord(
                generation=k,
                gen_min=float(ys.min()),
                best_so_far=best.y,
                mean=float(ys.mean()),
                std=float(ys.std()),
                evaluations=evaluations,
            )
        )
    if return_state:
        return best, history, StandaloneState(memory, population, chain, best)
    return best, history


def run_algorithm(algorithm: str, config: PESAConfig, fitness: FitnessFunction, return_state: bool = False):
    """Dispatch on ``algorithm`` in :data:`ALGORITHMS`."""
    if algorithm == "pesa":
        return run(config, fitness, return_state=return_state)
    return run_standalone(algorithm, config, fitness, return_state=return_state)
