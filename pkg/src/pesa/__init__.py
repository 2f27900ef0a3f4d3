"""PESA: PSO, ES and SA coupled through a prioritized replay memory."""
from .benchmarks import Benchmark, get_spec, list_functions
from .core import Candidate, ContractViolation, FitnessError, SearchSpace
from .es import ESConfig
from .hybrid import ALGORITHMS, GenerationRecord, PESAConfig, run, run_algorithm, run_standalone
from .memory import MemoryConfig, ReplayMemory
from .pso import PSOConfig
from .sa import SAConfig

__all__ = [
    "ALGORITHMS",
    "Benchmark",
    "Candidate",
    "ContractViolation",
    "ESConfig",
    "FitnessError",
    "GenerationRecord",
    "MemoryConfig",
    "PESAConfig",
    "PSOConfig",
    "ReplayMemory",
    "SAConfig",
    "SearchSpace",
    "get_spec",
    "list_functions",
    "run",
    "run_algorithm",
    "run_standalone",
]
__version__ = "0.1.0"
