"""Shared types: search boxes, candidates, the fitness interface and seeded streams."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

STREAM_NAMES = ("warmup", "memory", "es", "pso", "sa")


class ContractViolation(ValueError):
    """Raised when an operation is called outside its precondition."""


class FitnessError(RuntimeError):
    """A fitness evaluation failed; the message carries the calling context."""


@dataclass(frozen=True)
class SearchSpace:
    """Axis-aligned box ``[lower, upper]`` of dimension ``dim``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).ravel()
        upper = np.array(self.upper, dtype=float).ravel()
        if lower.shape != upper.shape or lower.size == 0:
            raise ContractViolation("lower and upper must be non-empty and the same length")
        if not np.all(lower < upper):
            raise ContractViolation("lower[i] < upper[i] must hold for every i")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, low: float, high: float, dim: int) -> "SearchSpace":
        if dim < 1:
            raise ContractViolation("dim must be >= 1")
        return cls(np.full(dim, low, dtype=float), np.full(dim, high, dtype=float))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return x.shape == self.lower.shape and bool(
            np.all(x >= self.lower) and np.all(x <= self.upper)
        )


@dataclass(frozen=True)
class Candidate:
    """A solution vector ``x`` and its fitness ``y`` (minimised)."""

    x: np.ndarray
    y: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        x.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))


class FitnessFunction(Protocol):
    space: SearchSpace

    def __call__(self, x: np.ndarray, rng: Optional[np.random.Generator] = None) -> float:
        ...


@dataclass
class Objective:
    """Wrap a plain callable ``f(x) -> float`` as a :class:`FitnessFunction`."""

    func: object
    space: SearchSpace
    name: str = field(default="objective")

    def __call__(self, x, rng=None):
        return float(self.func(x))


def evaluate(fitness: FitnessFunction, x: np.ndarray, rng, context: str) -> float:
    """Evaluate ``fitness`` at ``x``; any failure or non-finite value raises FitnessError."""
    try:
        y = float(fitness(x, rng))
    except ContractViolation:
        raise
    except Exception as exc:
        raise FitnessError(f"{context}: fitness evaluation failed: {exc}") from exc
    if not np.isfinite(y):
        raise FitnessError(f"{context}: fitness returned non-finite value {y}")
    return y


def clip_to_bounds(x, space: SearchSpace) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != space.dim:
        raise ContractViolation(f"vector of length {x.shape[-1]} does not match dim {space.dim}")
    return np.minimum(space.upper, np.maximum(space.lower, x))


def uniform_sample(space: SearchSpace, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Draw one point (or ``size`` points) uniformly from the box."""
    shape = (space.dim,) if size is None else (size, space.dim)
    x = space.lower + rng.random(shape) * space.span
    # rounding can push lower + u*span a hair past upper
    return clip_to_bounds(x, space)


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators per component, all derived from one master seed.

    Stream identity depends only on its name, so adding a component later
    does not shift the draws of the existing ones.
    """
    return {
        name: np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,)))
        )
        for i, name in enumerate(STREAM_NAMES)
    }
