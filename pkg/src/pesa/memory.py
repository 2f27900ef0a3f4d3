"""Shared replay memory with rank-based prioritized replay.

Every unique evaluated candidate is kept, sorted ascending by fitness (ties
keep insertion order). Sample ``i`` at rank ``r`` is replayed with probability
``(1/r)**alpha / sum_d (1/d)**alpha``; ``alpha`` is annealed linearly over the
run from ``alpha_init`` (near uniform) to ``alpha_end`` (fully prioritized).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .core import Candidate, ContractViolation


class EmptyMemoryError(LookupError):
    pass


@dataclass(frozen=True)
class MemoryConfig:
    capacity_max: Optional[int] = None
    alpha_init: float = 0.01
    alpha_end: float = 1.0
    dedup_tol: float = 1e-12

    def __post_init__(self):
        if not (0.0 <= self.alpha_init <= self.alpha_end <= 1.0):
            raise ContractViolation("need 0 <= alpha_init <= alpha_end <= 1")
        if self.capacity_max is not None and self.capacity_max < 1:
            raise ContractViolation("capacity_max must be positive or None")
        if self.dedup_tol < 0:
            raise ContractViolation("dedup_tol must be >= 0")


def rank_priorities(size: int, alpha: float) -> np.ndarray:
    """Replay probabilities for ranks ``1..size`` at exponent ``alpha``."""
    if size < 1:
        raise EmptyMemoryError("priorities of an empty memory")
    w = np.arange(1, size + 1, dtype=float) ** -alpha
    return w / w.sum()


def annealed_alpha(generation: int, n_gen: int, alpha_init: float, alpha_end: float) -> float:
    if n_gen < 2:
        return alpha_end
    if not 1 <= generation <= n_gen:
        raise ContractViolation(f"generation {generation} outside [1, {n_gen}]")
    return alpha_init + (alpha_end - alpha_init) * (generation - 1) / (n_gen - 1)


def weighted_sample(p: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Indices drawn without replacement, each draw proportional to ``p`` among the rest.

    Uses exponential keys ``E_i / p_i``: the ``count`` smallest keys, in
    increasing order, have the law of ``count`` successive renormalized draws.
    """
    keys = rng.standard_exponential(p.size) / p
    if count == 1:
        return np.array([np.argmin(keys)])
    return np.argsort(keys, kind="stable")[:count]


class ReplayMemory:
    """Fitness-sorted store of unique candidates.

    Rows are held as arrays (``xs``, ``ys``, insertion ``ids``) sorted by
    ``(y, id)``; :class:`Candidate` objects are built on demand.
    """

    def __init__(self, dim: int, config: Optional[MemoryConfig] = None):
        self.dim = dim
        self.config = config or MemoryConfig()
        self.alpha = self.config.alpha_init
        self.xs = np.empty((0, dim))
        self.ys = np.empty(0)
        self.ids = np.empty(0, dtype=np.int64)
        self._next_id = 0
        self._prio_key = None

    def __len__(self):
        return self.ys.size

    @property
    def size(self) -> int:
        return self.ys.size

    @property
    def entries(self) -> list[Candidate]:
        return [Candidate(x, y) for x, y in zip(self.xs, self.ys)]

    def _is_duplicate(self, x, xs) -> bool:
        if xs.shape[0] == 0:
            return False
        tol = self.config.dedup_tol
        # cheap first-coordinate filter before the full componentwise check
        near = np.flatnonzero(np.abs(xs[:, 0] - x[0]) <= tol)
        if near.size == 0:
            return False
        return bool(np.any(np.all(np.abs(xs[near] - x) <= tol, axis=1)))

    def update(self, candidates: Iterable[Candidate]) -> "ReplayMemory":
        """Insert candidates, drop duplicates (earliest kept), re-sort, evict worst."""
        new_x, new_y = [], []
        for cand in candidates:
            if cand.y is None or not np.isfinite(cand.y):
                raise ContractViolation("memory accepts only evaluated candidates with finite y")
            x = np.asarray(cand.x, dtype=float)
            if x.shape != (self.dim,):
                raise ContractViolation(f"candidate of shape {x.shape} in a dim-{self.dim} memory")
            pending = np.array(new_x) if new_x else np.empty((0, self.dim))
            if self._is_duplicate(x, self.xs) or self._is_duplicate(x, pending):
                continue
            new_x.append(x)
            new_y.append(cand.y)
        if new_x:
            k = len(new_x)
            ids = np.arange(self._next_id, self._next_id + k)
            self._next_id += k
            xs = np.vstack([self.xs, np.array(new_x)])
            ys = np.concatenate([self.ys, new_y])
            ids = np.concatenate([self.ids, ids])
            order = np.lexsort((ids, ys))
            self.xs, self.ys, self.ids = xs[order], ys[order], ids[order]
        cap = self.config.capacity_max
        if cap is not None and self.size > cap:
            self.xs, self.ys, self.ids = self.xs[:cap], self.ys[:cap], self.ids[:cap]
        return self

    def priorities(self) -> np.ndarray:
        key = (self.size, self.alpha)
        if self._prio_key != key:
            self._prio, self._prio_key = rank_priorities(*key), key
        return self._prio

    def sample_prioritized(self, count: int, rng: np.random.Generator) -> list[Candidate]:
        """Draw ``count`` entries without replacement under the rank priorities."""
        if self.size == 0:
            raise EmptyMemoryError("sampling from an empty memory")
        if count < 0:
            raise ContractViolation("count must be >= 0")
        if count >= self.size:
            idx = np.arange(self.size)
        else:
            idx = weighted_sample(self.priorities(), count, rng)
        return [Candidate(self.xs[i], self.ys[i]) for i in idx]

    def sample_best(self) -> Candidate:
        if self.size == 0:
            raise EmptyMemoryError("best of an empty memory")
        return Candidate(self.xs[0], self.ys[0])

    def anneal_alpha(self, generation: int, n_gen: int) -> float:
        """Set ``alpha`` to its value for ``generation`` of ``n_gen`` and return it."""
        cfg = self.config
        self.alpha = annealed_alpha(generation, n_gen, cfg.alpha_init, cfg.alpha_end)
        return self.alpha

    def snapshot(self) -> "ReplayMemory":
        """Read-only copy for the algorithm tasks of one generation."""
        snap = ReplayMemory.__new__(ReplayMemory)
        snap.dim, snap.config, snap.alpha = self.dim, self.config, self.alpha
        snap._next_id, snap._prio_key = self._next_id, None
        snap.xs, snap.ys, snap.ids = self.xs.copy(), self.ys.copy(), self.ids.copy()
        for arr in (snap.xs, snap.ys, snap.ids):
            arr.flags.writeable = False
        return snap

    def dump_rows(self) -> list[list[float]]:
        """``[rank, y, x_1..x_n]`` rows, best first."""
        return [[r, y, *x] for r, (x, y) in enumerate(zip(self.xs, self.ys), start=1)]

    def __repr__(self):
        best = f", best={self.ys[0]:.6g}" if self.size else ""
        return f"ReplayMemory(size={self.size}, alpha={self.alpha:.4g}{best})"
