"""The twelve n-dimensional continuous test functions and their registry.

All functions are minimised. ``quartic`` carries additive uniform noise on
``[0, 1)`` drawn from the generator passed by the caller, so seeded runs stay
reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ContractViolation, SearchSpace


def cigar(x):
    # bent cigar: first coordinate plus 1e6 times the remaining n-1
    return x[0] ** 2 + 1e6 * np.sum(x[1:] ** 2)


def sphere(x):
    return np.sum(x**2)


def ridge(x):
    return x[0] + np.sqrt(np.sum(x[1:] ** 2))


def ackley(x):
    n = x.size
    return (
        20.0
        - 20.0 * np.exp(-0.2 * np.sqrt(np.sum(x**2) / n))
        - np.exp(np.sum(np.cos(2.0 * np.pi * x)) / n)
        + np.e
    )


def bohachevsky(x):
    a, b = x[:-1], x[1:]
    return np.sum(
        a**2 + 2.0 * b**2 - 0.3 * np.cos(3.0 * np.pi * a) - 0.4 * np.cos(4.0 * np.pi * b) + 0.7
    )


def griewank(x):
    i = np.arange(1, x.size + 1)
    return np.sum(x**2) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))) + 1.0


def brown(x):
    a2, b2 = x[:-1] ** 2, x[1:] ** 2
    return np.sum(a2 ** (b2 + 1.0) + b2 ** (a2 + 1.0))


def exponential(x):
    return -np.exp(-0.5 * np.sum(x**2))


def zakharov(x):
    s = np.sum(0.5 * np.arange(1, x.size + 1) * x)
    return np.sum(x**2) + s**2 + s**4


def salomon(x):
    r = np.sqrt(np.sum(x**2))
    return 1.0 - np.cos(2.0 * np.pi * r) + 0.1 * r


def quartic(x):
    """Noise-free part; the registry adds ``U[0, 1)`` per evaluation."""
    return np.sum(np.arange(1, x.size + 1) * x**4)


def levy(x):
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[0]) ** 2
    body = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[-1]) ** 2)
    return head + body + tail


def _zeros(n):
    return np.zeros(n)


def _ridge_opt(n):
    x = np.zeros(n)
    x[0] = -5.0
    return x


def _ones(n):
    return np.ones(n)


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    func: Callable[[np.ndarray], float]
    low: float
    high: float
    optimum: Callable[[int], np.ndarray]
    optimum_y: float
    noisy: bool = False
    min_dim: int = 1

    def space(self, dim: int) -> SearchSpace:
        return SearchSpace.box(self.low, self.high, dim)

    def optimum_x(self, dim: int) -> np.ndarray:
        return self.optimum(dim)

    def threshold(self, tol: float = 1e-2) -> float:
        """Fitness level counted as having reached the optimum."""
        return self.optimum_y + tol


_SPECS = (
    BenchmarkSpec("cigar", cigar, -10.0, 10.0, _zeros, 0.0),
    BenchmarkSpec("sphere", sphere, -100.0, 100.0, _zeros, 0.0),
    BenchmarkSpec("ridge", ridge, -5.0, 5.0, _ridge_opt, -5.0),
    BenchmarkSpec("ackley", ackley, -32.0, 32.0, _zeros, 0.0),
    BenchmarkSpec("bohachevsky", bohachevsky, -100.0, 100.0, _zeros, 0.0, min_dim=2),
    BenchmarkSpec("griewank", griewank, -600.0, 600.0, _zeros, 0.0),
    BenchmarkSpec("brown", brown, -1.0, 4.0, _zeros, 0.0, min_dim=2),
    BenchmarkSpec("exponential", exponential, -1.0, 1.0, _zeros, -1.0),
    BenchmarkSpec("zakharov", zakharov, -5.0, 10.0, _zeros, 0.0),
    BenchmarkSpec("salomon", salomon, -100.0, 100.0, _zeros, 0.0),
    BenchmarkSpec("quartic", quartic, -1.28, 1.28, _zeros, 0.0, noisy=True),
    BenchmarkSpec("levy", levy, -10.0, 10.0, _ones, 0.0),
)

REGISTRY = {spec.name: spec for spec in _SPECS}


class UnknownFunction(KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"unknown function {self.name!r}; valid names: {', '.join(REGISTRY)}"


def list_functions() -> list[BenchmarkSpec]:
    return list(_SPECS)


def get_spec(name: str) -> BenchmarkSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownFunction(name) from None


def evaluate(name: str, x, rng: Optional[np.random.Generator] = None) -> float:
    """Evaluate benchmark ``name`` at ``x``.

    ``rng`` is only consulted by noisy functions; when omitted for one of
    those a fresh unseeded generator is used.
    """
    spec = get_spec(name)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < spec.min_dim:
        raise ContractViolation(f"{name} needs a 1-d vector of length >= {spec.min_dim}")
    if np.any(x < spec.low) or np.any(x > spec.high):
        raise ContractViolation(f"point outside the {name} box [{spec.low}, {spec.high}]^n")
    y = float(spec.func(x))
    if spec.noisy:
        if rng is None:
            rng = np.random.default_rng()
        y += rng.random()
    return y


class Benchmark:
    """A registered function bound to a dimension; satisfies FitnessFunction."""

    def __init__(self, name: str, dim: int):
        self.spec = get_spec(name)
        if dim < self.spec.min_dim:
            raise ContractViolation(f"{name} needs dim >= {self.spec.min_dim}")
        self.name = name
        self.space = self.spec.space(dim)

    @property
    def dim(self) -> int:
        return self.space.dim

    def __call__(self, x, rng=None) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ContractViolation(f"expected a vector of length {self.dim}, got shape {x.shape}")
        return evaluate(self.name, x, rng)

    def __repr__(self):
        return f"Benchmark({self.name!r}, dim={self.dim})"
