import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

import mero.main as cli
from mero import __version__
from mero.config import update_settings
from mero.config.run_config import Algorithm, load_run_config, nest_dotted
from mero.errors import BudgetExhaustedError, ConfigurationError, InvalidArgumentError
from mero.evaluation import TraceRecord, exact_minimal_risk, read_rstar_file, write_trace_csv
from mero.experiment import cmd_estimate_rstar, cmd_run
from mero.geometry import PrimalGeometry
from mero.problems.sources.finite_support import write_finite_support
from mero.report import cmd_report, load_traces

from .conftest import random_distribution

SMALL_RUN = """
# two algorithms, two seeds
algorithm = mero-anytime, gdro
task.kind = synthetic
task.synthetic.m = 2
task.synthetic.dimension = 5
iters = 200
checkpoint_every = 20
seeds = 0, 1
n_eval = 500
rstar.method = erm
rstar.train_n = 500
rstar.eval_n = 500
output_dir = out
"""


def _config(tmp_path: Path, text: str, name: str = "run.cfg") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_dotted_keys_nest():
    assert nest_dotted({"a.b": "1", "a.c": "2", "d": "3"}) == {"a": {"b": "1", "c": "2"}, "d": "3"}
    with pytest.raises(ConfigurationError):
        nest_dotted({"a": "1", "a.b": "2"})
    with pytest.raises(ConfigurationError):
        nest_dotted({"a.b": "2", "a": "1"})
    with pytest.raises(ConfigurationError):
        nest_dotted({"a": None})


def test_load_run_config(tmp_path):
    config = load_run_config(_config(tmp_path, SMALL_RUN))
    assert config.algorithm == [Algorithm.MERO_ANYTIME, Algorithm.GDRO]
    assert config.seeds == [0, 1]
    assert config.task.synthetic.m == 2 and config.task.synthetic.dimension == 5
    assert config.rstar.train_n == 500
    assert config.output_dir == tmp_path / "out"
    assert config.constants.radius == 5.0


def test_config_hash_follows_content(tmp_path):
    first = load_run_config(_config(tmp_path, SMALL_RUN))
    assert first.config_hash() == load_run_config(_config(tmp_path, SMALL_RUN, "copy.cfg")).config_hash()
    other = load_run_config(_config(tmp_path, SMALL_RUN.replace("iters = 200", "iters = 300"), "other.cfg"))
    assert other.config_hash() != first.config_hash()


def test_synthetic_flip_probabilities_are_split(tmp_path):
    text = "algorithm = gdro\niters = 10\ntask.synthetic.m = 3\ntask.synthetic.flip_probs = 0.05, 0.1, 0.3\n"
    config = load_run_config(_config(tmp_path, text))
    assert config.task.synthetic.flip_probs == [0.05, 0.1, 0.3]


@pytest.mark.parametrize("text", [
    "algorithm = mero-anytime\n",
    "algorithm = mero-weighted\ntask.synthetic.m = 3\nbudgets = 100, 50\n",
    "algorithm = mero-weighted\nbudgets = 100, 50, 25\niters = 10\n",
    "algorithm = gdro\niters = 10\nseeds = 1, 1\n",
    "algorithm = gdro\niters = 10\nseeds = -1\n",
    "algorithm = mero-reference\niters = 10\n",
    "algorithm = gdro\niters = 10\nrstar.method = exact\n",
    "algorithm = gdro\niters = 10\nrstar.method = file\n",
    "algorithm = sgd\niters = 10\n",
    "algorithm = gdro\niters = 10\ntask.kind = adult\n",
])
def test_invalid_configs(tmp_path, text):
    with pytest.raises(ValidationError):
        load_run_config(_config(tmp_path, text))


def test_config_file_problems(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_run_config(tmp_path / "absent.cfg")
    with pytest.raises(ConfigurationError):
        load_run_config(_config(tmp_path, "# nothing here\n"))


def test_main_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["run", str(_config(tmp_path, "algorithm = mero-anytime\n"))]) == cli.EXIT_CONFIG
    assert cli.main(["run", str(tmp_path / "absent.cfg")]) == cli.EXIT_IO
    assert cli.main(["report", str(tmp_path)]) == cli.EXIT_IO

    def exhausted(args):
        raise BudgetExhaustedError(0, 10, 1)

    monkeypatch.setattr(cli, "dispatch", exhausted)
    assert cli.main(["run", "whatever.cfg"]) == cli.EXIT_BUDGET


def test_main_rejects_bad_job_count(tmp_path):
    assert cli.main(["run", str(_config(tmp_path, SMALL_RUN)), "--jobs", "0"]) == cli.EXIT_CONFIG


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_run_writes_traces_and_manifest(tmp_path):
    update_settings(record_wall_clock=False)
    config = load_run_config(_config(tmp_path, SMALL_RUN))
    manifest_path = cmd_run(config)
    assert manifest_path == tmp_path / "out" / "manifest.json"

    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    assert {"version", "config_hash", "config", "seeds", "task", "rstar", "runs", "wall_seconds"} <= set(manifest)
    assert manifest["config_hash"] == config.config_hash()
    assert manifest["seeds"] == [0, 1]
    assert len(manifest["rstar"]["values"]) == 2
    assert len(manifest["runs"]) == 4
    for run in manifest["runs"]:
        assert run["rounds"] == 200
        assert run["samples_per_dist"] == [200, 200]
        assert "saddle_bound_anytime" in run

    trace = pd.read_csv(tmp_path / "out" / "trace_mero-anytime_seed0.csv")
    assert len(trace) == 10
    assert trace["t"].tolist() == list(range(20, 201, 20))
    assert (trace["wall_ms"] == 0).all()
    np.testing.assert_allclose(trace["mer"], trace[["excess_1", "excess_2"]].max(axis=1), rtol=1e-8)


def test_runs_replay_byte_for_byte(tmp_path):
    update_settings(record_wall_clock=False)
    config = load_run_config(_config(tmp_path, SMALL_RUN))
    cmd_run(config, out_dir=tmp_path / "a")
    cmd_run(config, out_dir=tmp_path / "b")
    for name in ("trace_mero-anytime_seed1.csv", "trace_gdro_seed0.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_offset_shifts_runs(tmp_path):
    update_settings(record_wall_clock=False, seed_offset=10)
    config = load_run_config(_config(tmp_path, SMALL_RUN.replace("seeds = 0, 1", "seeds = 0")))
    manifest = json.loads(cmd_run(config).read_text(encoding="utf-8"))
    assert manifest["seeds"] == [10] and manifest["seed_offset"] == 10
    assert (tmp_path / "out" / "trace_gdro_seed10.csv").exists()


def _finite_config(tmp_path: Path) -> Path:
    rng = np.random.default_rng(2)
    folder = tmp_path / "dists"
    folder.mkdir()
    for name in ("a.csv", "b.csv"):
        write_finite_support(folder / name, random_distribution(rng, atoms=8, dimension=2))
    text = "algorithm = gdro\niters = 50\ntask.kind = finite\ntask.finite.path = dists\nrstar.method = exact\n"
    return _config(tmp_path, text)


def test_estimate_rstar_exactly(tmp_path):
    path = _finite_config(tmp_path)
    assert cli.main(["estimate-rstar", str(path), "--out", str(tmp_path / "rs")]) == cli.EXIT_OK
    estimate = read_rstar_file(tmp_path / "rs" / "rstar.csv", m=2)

    config = load_run_config(path)
    from mero.experiment import build_task
    from mero.problems import LogisticLoss, Purpose

    task = build_task(config, 0)
    geom = PrimalGeometry(dimension=2, radius=config.constants.radius)
    expected = [exact_minimal_risk(o.distribution, LogisticLoss(), geom)[0] for o in task.oracles(Purpose.EVALUATION)]
    np.testing.assert_allclose(estimate.values, expected, rtol=1e-12)


def test_estimate_rstar_refuses_file_method(tmp_path):
    (tmp_path / "rstar.csv").write_text("dist,rstar_hat,se,method,train_n,eval_n,seed\n", encoding="utf-8")
    text = "algorithm = gdro\niters = 5\nrstar.method = file\nrstar.path = rstar.csv\n"
    with pytest.raises(ConfigurationError):
        cmd_estimate_rstar(load_run_config(_config(tmp_path, text)))


def _records(algo, seed, ts, scale=1.0, m=2):
    return [
        TraceRecord(
            run_id=f"{algo}-{seed}", algo=algo, seed=seed, t=int(t), samples_total=int(t) * m,
            samples_per_dist=[int(t)] * m, risks=[1.0] * m, excess=[scale / np.sqrt(t)] * m,
            mer=scale / np.sqrt(t), mwer=scale / np.sqrt(t), q=[1.0 / m] * m,
        )
        for t in ts
    ]


def test_report_slopes_and_charts(tmp_path):
    ts = range(100, 2001, 100)
    for seed in (0, 1):
        write_trace_csv(tmp_path / f"trace_gdro_seed{seed}.csv", _records("gdro", seed, ts))
    summary = cmd_report(tmp_path)

    agg = pd.read_csv(summary.aggregate)
    assert len(agg) == 20
    assert (agg["n_seeds"] == 2).all()
    np.testing.assert_allclose(agg["mer_se"], 0.0, atol=1e-12)
    slopes = pd.read_csv(summary.slopes)
    assert slopes.loc[slopes["metric"] == "mer", "slope"].iloc[0] == pytest.approx(-0.5, abs=0.01)
    names = sorted(p.name for p in summary.charts)
    assert names == ["mer_linear.svg", "mer_loglog.svg", "mwer_linear.svg", "mwer_loglog.svg"]
    assert all(p.read_text(encoding="utf-8").startswith("<svg") for p in summary.charts)


def test_report_standard_error_across_seeds(tmp_path):
    ts = range(100, 1101, 100)
    write_trace_csv(tmp_path / "trace_gdro_seed0.csv", _records("gdro", 0, ts, scale=1.0))
    write_trace_csv(tmp_path / "trace_gdro_seed1.csv", _records("gdro", 1, ts, scale=3.0))
    agg = pd.read_csv(cmd_report(tmp_path).aggregate)
    first = agg.iloc[0]
    # two values 0.1 and 0.3: std 0.1414.., se = std/√2 = 0.1
    assert first["mer_mean"] == pytest.approx(0.2)
    assert first["mer_se"] == pytest.approx(0.1)


def test_report_resamples_mismatched_grids(tmp_path, caplog):
    write_trace_csv(tmp_path / "trace_gdro_seed0.csv", _records("gdro", 0, range(100, 2001, 100)))
    write_trace_csv(tmp_path / "trace_gdro_seed1.csv", _records("gdro", 1, range(200, 2001, 200)))
    with caplog.at_level(logging.WARNING, logger="mero.report"):
        agg = pd.read_csv(cmd_report(tmp_path).aggregate)
    assert "resampling" in caplog.text
    assert agg["t"].tolist() == list(range(200, 2001, 200))
    assert (agg["n_seeds"] == 2).all()


def test_report_rejects_mixed_widths(tmp_path):
    write_trace_csv(tmp_path / "trace_gdro_seed0.csv", _records("gdro", 0, range(1, 11), m=2))
    write_trace_csv(tmp_path / "trace_gdro_seed1.csv", _records("gdro", 1, range(1, 11), m=3))
    with pytest.raises(InvalidArgumentError):
        load_traces(tmp_path)
