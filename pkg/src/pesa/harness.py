"""Experiment runner behind the ``pesa-bench`` command.

Runs PESA and/or the standalone algorithms over functions and seeds and
writes plain CSV: ``convergence.csv`` (one row per generation per run),
``summary.csv`` (one row per run), ``pesa_components.csv`` (per-algorithm
bests inside PESA) and ``config.json``, the resolved configuration. Feeding
``config.json`` back through ``--config`` reproduces the run.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .benchmarks import REGISTRY, Benchmark, UnknownFunction, get_spec, list_functions
from .core import ContractViolation
from .es import ESConfig
from .hybrid import ALGORITHMS, PESAConfig, run_algorithm
from .memory import MemoryConfig
from .pso import PSOConfig
from .sa import SAConfig

log = logging.getLogger(__name__)

CONVERGENCE_HEADER = ["function", "algorithm", "seed", "generation", "gen_min", "best_so_far", "mean", "std", "alpha", "evals"]
SUMMARY_HEADER = ["function", "algorithm", "seed", "final_best", "gens_to_1e-2", "wall_seconds"]
COMPONENTS_HEADER = ["function", "seed", "generation", "es_best", "pso_best", "sa_best"]
THRESHOLD = 1e-2

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    functions: list = field(default_factory=lambda: ["sphere"])
    dim: int = 50
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    seeds: list = field(default_factory=lambda: [0])
    n_gen: int = 100
    n_warmup: int = 500
    # ES
    lambda_: int = 60
    mu: int = 30
    mu_replay: int = 30
    cx_prob: float = 0.6
    mut_prob: float = 0.15
    # PSO
    eta: int = 30
    eta_replay: int = 30
    c1: float = 2.05
    c2: float = 2.05
    # SA
    t_max: float = 10000.0
    t_min: float = 1.0
    chi: float = 0.1
    chain_size: int = 60
    alpha_backdoor: float = 0.1
    step_scale: float = 0.05
    # replay memory
    alpha_init: float = 0.01
    alpha_end: float = 1.0
    capacity_max: Optional[int] = None
    dedup_tol: float = 1e-12
    # execution
    out: str = "results"
    parallel: bool = False
    dump_memory: bool = False

    def validate(self) -> "ExperimentConfig":
        if not self.functions or not self.algorithms or not self.seeds:
            raise UsageError("need at least one function, one algorithm and one seed")
        for name in self.functions:
            if name not in REGISTRY:
                raise UsageError(str(UnknownFunction(name)))
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise UsageError(f"unknown algorithm {algo!r}; valid: {', '.join(ALGORITHMS)}")
        try:
            self.pesa_config(self.seeds[0])
        except ContractViolation as exc:
            raise UsageError(f"invalid hyperparameters: {exc}") from exc
        return self

    def pesa_config(self, seed: int) -> PESAConfig:
        return PESAConfig(
            n_gen=self.n_gen,
            n_warmup=self.n_warmup,
            es=ESConfig(mu=self.mu, mu_replay=self.mu_replay, lambda_=self.lambda_,
                        cx_prob=self.cx_prob, mut_prob=self.mut_prob),
            pso=PSOConfig(eta=self.eta, eta_replay=self.eta_replay, c1=self.c1, c2=self.c2),
            sa=SAConfig(t_max=self.t_max, t_min=self.t_min, chi=self.chi, chain_size=self.chain_size,
                        alpha_backdoor=self.alpha_backdoor, step_scale=self.step_scale),
            memory=MemoryConfig(capacity_max=self.capacity_max, alpha_init=self.alpha_init,
                                alpha_end=self.alpha_end, dedup_tol=self.dedup_tol),
            seed=seed,
            parallel=self.parallel,
        )


_FIELD_TYPES = {f.name: f for f in fields(ExperimentConfig)}


def _coerce(key: str, value):
    """Check one config value against the type of its default."""
    default = getattr(ExperimentConfig(), key)
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, list):
            if isinstance(value, str):
                value = [v.strip() for v in value.split(",") if v.strip()]
            if not isinstance(value, list):
                raise TypeError
            return [int(v) for v in value] if key == "seeds" else [str(v) for v in value]
        if key == "capacity_max":
            return None if value is None else int(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise UsageError(f"malformed value for {key!r}: {value!r}") from None


def config_from_mapping(data: dict, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise UsageError(f"unknown configuration keys: {', '.join(unknown)}")
    cfg = base or ExperimentConfig()
    for key, value in data.items():
        setattr(cfg, key, _coerce(key, value))
    return cfg


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return data


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pesa-bench", description="Run PESA and standalone ES/PSO/SA on benchmark functions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--function", help="function name(s), comma separated")
        p.add_argument("--dim", help="problem dimension n")
        p.add_argument("--seeds", help="comma separated seeds, e.g. 0,1,2")
        p.add_argument("--gens", help="number of generations")
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="JSON file of configuration values")
        p.add_argument("--parallel", action="store_true", default=None,
                       help="run ES, PSO and SA of each PESA generation in threads")
        p.add_argument("--dump-memory", action="store_true", default=None,
                       help="write the final replay memory of each run")

    p_run = sub.add_parser("run", help="run one algorithm")
    common(p_run)
    p_run.add_argument("--algo", help="pesa, es, pso or sa (comma separated for several)")
    p_cmp = sub.add_parser("compare", help="run PESA and the three standalone algorithms")
    common(p_cmp)
    sub.add_parser("list-functions", help="list the benchmark functions")
    return parser


def parse_config(argv: Sequence[str]) -> tuple[str, Optional[ExperimentConfig]]:
    """Resolve a configuration: flags override the file, which overrides defaults."""
    args = build_parser().parse_args(list(argv))
    if args.command == "list-functions":
        return args.command, None
    cfg = ExperimentConfig()
    if args.config:
        cfg = config_from_mapping(load_config_file(args.config), cfg)
    flags = {
        "functions": args.function,
        "dim": args.dim,
        "seeds": args.seeds,
        "n_gen": args.gens,
        "out": args.out,
        "parallel": args.parallel,
        "dump_memory": args.dump_memory,
    }
    if args.command == "run":
        flags["algorithms"] = args.algo
    cfg = config_from_mapping({k: v for k, v in flags.items() if v is not None}, cfg)
    if args.command == "compare":
        cfg.algorithms = list(ALGORITHMS)
    elif args.algo is None and not args.config:
        cfg.algorithms = ["pesa"]
    return args.command, cfg.validate()


@dataclass
class RunArtifacts:
    config: ExperimentConfig
    convergence: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    components: list = field(default_factory=list)
    memory_dumps: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def run_experiment(config: ExperimentConfig) -> RunArtifacts:
    art = RunArtifacts(config=config)
    for fname in config.functions:
        fitness = Benchmark(fname, config.dim)
        target = get_spec(fname).threshold(THRESHOLD)
        for seed in config.seeds:
            pesa_cfg = config.pesa_config(seed)
            for algo in config.algorithms:
                log.info("running %s on %s (seed %d)", algo, fname, seed)
                t0 = time.perf_counter()
                try:
                    best, history, state = run_algorithm(algo, pesa_cfg, fitness, return_state=True)
                except Exception as exc:  # one failed run must not sink the others
                    log.error("%s on %s seed %d failed: %s", algo, fname, seed, exc)
                    art.failures.append((fname, algo, seed, str(exc)))
                    art.summary.append([fname, algo, seed, None, None, time.perf_counter() - t0])
                    continue
                wall = time.perf_counter() - t0
                reached = next((r.generation for r in history if r.best_so_far <= target), None)
                for r in history:
                    art.convergence.append(
                        [fname, algo, seed, r.generation, r.gen_min, r.best_so_far, r.mean, r.std, r.alpha, r.evaluations]
                    )
                    if algo == "pesa":
                        art.components.append([fname, seed, r.generation, r.es_best, r.pso_best, r.sa_best])
                art.summary.append([fname, algo, seed, history[-1].best_so_far, reached, wall])
                if config.dump_memory:
                    art.memory_dumps[(fname, algo, seed)] = state.memory.dump_rows()
    return art


def preflight(directory) -> Path:
    """Create ``directory`` and prove it is writable before any computation."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    probe = path / ".write_probe"
    probe.write_text("", encoding="utf-8")
    probe.unlink()
    return path


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_config(config: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(asdict(config), fh, indent=2)
        fh.write("\n")


def write_outputs(art: RunArtifacts, directory) -> list[Path]:
    path = preflight(directory)
    written = [path / "convergence.csv", path / "summary.csv", path / "config.json"]
    _write_csv(written[0], CONVERGENCE_HEADER, art.convergence)
    summary = [row[:5] + [f"{row[5]:.3f}"] for row in art.summary]
    _write_csv(written[1], SUMMARY_HEADER, summary)
    write_config(art.config, written[2])
    if art.components:
        written.append(path / "pesa_components.csv")
        _write_csv(written[-1], COMPONENTS_HEADER, art.components)
    for (fname, algo, seed), rows in art.memory_dumps.items():
        dim = len(rows[0]) - 2 if rows else art.config.dim
        out = path / f"memory_{fname}_{algo}_{seed}.csv"
        _write_csv(out, ["rank", "y"] + [f"x_{i}" for i in range(1, dim + 1)], rows)
        written.append(out)
    if art.failures:
        out = path / "failures.csv"
        _write_csv(out, ["function", "algorithm", "seed", "error"], art.failures)
        written.append(out)
    return written


def _list_functions(stream) -> None:
    for i, spec in enumerate(list_functions(), start=1):
        noise = "  (+U[0,1) noise)" if spec.noisy else ""
        print(f"{i:2d}  {spec.name:<12} [{spec.low:g}, {spec.high:g}]^n  f* = {spec.optimum_y:g}{noise}", file=stream)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        command, cfg = parse_config(argv)
    except UsageError as exc:
        print(f"pesa-bench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if command == "list-functions":
        _list_functions(sys.stdout)
        return EXIT_OK
    try:
        out = preflight(cfg.out)
    except OSError as exc:
        print(f"pesa-bench: cannot write to {cfg.out}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("resolved configuration: %s", json.dumps(asdict(cfg), sort_keys=True))
    art = run_experiment(cfg)
    try:
        write_outputs(art, out)
    except OSError as exc:
        print(f"pesa-bench: writing outputs failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for row in art.summary:
        fname, algo, seed, final, reached, wall = row
        final_s = "FAILED" if final is None else f"{final:.6g}"
        print(f"{fname:<12} {algo:<5} seed={seed:<4} best={final_s:<12} gens_to_1e-2={reached or '-':<4} {wall:.2f}s")
    return EXIT_RUNTIME if art.failures else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
