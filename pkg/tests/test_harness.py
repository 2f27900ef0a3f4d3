import csv
import json
import os

import numpy as np
import pytest

from pesa.benchmarks import list_functions
from pesa.harness import (
    CONVERGENCE_HEADER,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    SUMMARY_HEADER,
    ExperimentConfig,
    UsageError,
    config_from_mapping,
    main,
    parse_config,
    preflight,
    run_experiment,
    write_outputs,
)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_defaults_from_compare():
    cmd, cfg = parse_config(["compare", "--function", "sphere"])
    assert cmd == "compare"
    assert (cfg.lambda_, cfg.mu, cfg.mu_replay) == (60, 30, 30)
    assert (cfg.c1, cfg.c2, cfg.t_max, cfg.t_min, cfg.chi) == (2.05, 2.05, 1e4, 1.0, 0.1)
    assert (cfg.chain_size, cfg.alpha_backdoor, cfg.n_gen, cfg.n_warmup, cfg.dim) == (60, 0.1, 100, 500, 50)
    assert cfg.algorithms == ["pesa", "es", "pso", "sa"]


def test_dim_override():
    assert parse_config(["run", "--dim", "10"])[1].dim == 10


def test_run_defaults_to_pesa():
    assert parse_config(["run"])[1].algorithms == ["pesa"]
    assert parse_config(["run", "--algo", "es,sa"])[1].algorithms == ["es", "sa"]


def test_unknown_function_lists_names(capsys):
    assert main(["run", "--function", "sphereee"]) == EXIT_USAGE
    err = capsys.readouterr().err
    names = [s.name for s in list_functions()]
    assert len(names) == 12 and all(n in err for n in names)


@pytest.mark.parametrize("argv,key", [(["run", "--dim", "ten"], "dim"), (["run", "--gens", "2.5"], "n_gen"),
                                      (["run", "--seeds", "0,x"], "seeds")])
def test_malformed_numeric_names_key(argv, key):
    with pytest.raises(UsageError, match=key):
        parse_config(argv)


def test_unknown_algorithm():
    with pytest.raises(UsageError, match="pesa, es, pso, sa"):
        parse_config(["run", "--algo", "ga"])


def test_unknown_config_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"dimm": 3}))
    with pytest.raises(UsageError, match="dimm"):
        parse_config(["run", "--config", str(p)])


def test_flag_overrides_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"dim": 7, "n_gen": 3, "chi": 0.2}))
    cfg = parse_config(["run", "--config", str(p), "--dim", "4"])[1]
    assert (cfg.dim, cfg.n_gen, cfg.chi) == (4, 3, 0.2)


def test_invalid_hyperparameters():
    with pytest.raises(UsageError, match="hyperparameters"):
        config_from_mapping({"c1": 1.0, "c2": 1.0}).validate()


def test_bad_subcommand_exit_code():
    assert main(["fly"]) == EXIT_USAGE


def test_list_functions(capsys):
    assert main(["list-functions"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 12 and "quartic" in lines[10]


def small_config(tmp_path, **kw):
    base = dict(functions=["sphere"], dim=5, n_gen=100, n_warmup=60, out=str(tmp_path))
    base.update(kw)
    return config_from_mapping(base).validate()


def test_compare_row_counts(tmp_path):
    cfg = small_config(tmp_path)
    art = run_experiment(cfg)
    files = write_outputs(art, tmp_path)
    conv = read_csv(tmp_path / "convergence.csv")
    assert conv[0] == CONVERGENCE_HEADER and len(conv) == 401
    summary = read_csv(tmp_path / "summary.csv")
    assert summary[0] == SUMMARY_HEADER and len(summary) == 5
    assert (tmp_path / "pesa_components.csv") in files
    assert len(read_csv(tmp_path / "pesa_components.csv")) == 101
    for row in conv[1:]:
        assert 1 <= int(row[3]) <= 100
    groups = {}
    for row in conv[1:]:
        groups.setdefault(tuple(row[:3]), []).append(float(row[5]))
    for key, ys in groups.items():
        assert all(b <= a for a, b in zip(ys, ys[1:]))
    for row in summary[1:]:
        last = groups[tuple(row[:3])][-1]
        assert float(row[3]) == last
    with open(tmp_path / "convergence.csv", "rb") as fh:
        raw = fh.read()
    assert b"\r" not in raw and raw.endswith(b"\n")


def test_single_run_line_count(tmp_path):
    assert main(["run", "--function", "ackley", "--dim", "4", "--gens", "100", "--out", str(tmp_path)]) == EXIT_OK
    with open(tmp_path / "convergence.csv", encoding="utf-8") as fh:
        assert len(fh.read().splitlines()) == 101


def test_threshold_never_reached_is_empty(tmp_path):
    cfg = small_config(tmp_path, functions=["sphere"], dim=50, n_gen=3, algorithms=["sa"], n_warmup=100)
    art = run_experiment(cfg)
    write_outputs(art, tmp_path)
    row = read_csv(tmp_path / "summary.csv")[1]
    assert row[4] == ""


def test_threshold_offsets_nonzero_optimum(tmp_path):
    # exponential bottoms out at -1, so the threshold is -0.99, not 0.01
    cfg = small_config(tmp_path, functions=["exponential"], dim=3, n_gen=30, algorithms=["pesa"])
    art = run_experiment(cfg)
    reached = art.summary[0][4]
    ys = [row[5] for row in art.convergence]
    assert reached is not None and ys[reached - 1] <= -0.99
    assert reached == 1 or ys[reached - 2] > -0.99


def test_rerun_from_echo_is_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["compare", "--function", "griewank", "--dim", "4", "--gens", "15", "--seeds", "0,1", "--out", str(a)]) == 0
    assert main(["run", "--config", str(a / "config.json"), "--out", str(b)]) == 0
    assert (a / "convergence.csv").read_bytes() == (b / "convergence.csv").read_bytes()
    echo = json.loads((a / "config.json").read_text())
    assert echo["algorithms"] == ["pesa", "es", "pso", "sa"] and echo["seeds"] == [0, 1]


@pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0, reason="root ignores permissions")
def test_unwritable_directory(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir(mode=0o500)
    with pytest.raises(OSError):
        preflight(locked / "out")


def test_preflight_blocked_by_file(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--gens", "1", "--dim", "2", "--out", str(blocker / "out")]) == EXIT_RUNTIME
    assert "cannot write" in capsys.readouterr().err


def test_memory_dump_format(tmp_path):
    assert main(["run", "--function", "sphere", "--dim", "3", "--gens", "2", "--algo", "pesa,sa",
                 "--out", str(tmp_path), "--dump-memory"]) == 0
    rows = read_csv(tmp_path / "memory_sphere_pesa_0.csv")
    assert rows[0] == ["rank", "y", "x_1", "x_2", "x_3"]
    ranks = [int(r[0]) for r in rows[1:]]
    ys = [float(r[1]) for r in rows[1:]]
    assert ranks == list(range(1, len(ranks) + 1)) and ys == sorted(ys)
    for r in rows[1:]:
        x = np.array([float(v) for v in r[2:]])
        assert float(r[1]) == pytest.approx(float(np.sum(x**2)), rel=1e-12)
    assert (tmp_path / "memory_sphere_sa_0.csv").exists()




def test_failed_run_is_recorded(tmp_path, monkeypatch):
    import pesa.harness as h

    real = h.run_algorithm

    def flaky(algo, *a, **kw):
        if algo == "es":
            raise RuntimeError("exploded")
        return real(algo, *a, **kw)

    monkeypatch.setattr(h, "run_algorithm", flaky)
    assert main(["compare", "--dim", "2", "--gens", "3", "--out", str(tmp_path)]) == EXIT_RUNTIME
    fails = read_csv(tmp_path / "failures.csv")
    assert fails[1][:3] == ["sphere", "es", "0"] and "exploded" in fails[1][3]
    summary = read_csv(tmp_path / "summary.csv")
    assert len(summary) == 5 and summary[2][3] == ""
    assert len(read_csv(tmp_path / "convergence.csv")) == 1 + 3 * 3


def test_config_dataclass_defaults():
    cfg = ExperimentConfig()
    assert cfg.functions == ["sphere"] and cfg.seeds == [0] and not cfg.parallel
