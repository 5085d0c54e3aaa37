import csv
import io
import json
from types import SimpleNamespace

import pytest
import yaml
from typer.testing import CliRunner

from src.cli import app
from src.config import Config, ExperimentSettings, load_config
from src.errors import ConfigError, NumericalError, PathDependenceError
from src.experiment import ExperimentConfig, ResultCache, SuiteContext, load_experiment, render_csv, run, verify
from src.experiment import stages, suites
from src.experiment.suites import Check, at_least, at_most, holds, run_suite

runner = CliRunner()


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data, allow_unicode=True), encoding="utf-8")
    return path


@pytest.fixture
def config_file(tmp_path):
    return write_yaml(
        tmp_path / "config.yaml",
        {
            "paths": {
                "cache_dir": str(tmp_path / "cache"),
                "output_dir": str(tmp_path / "output"),
                "logs_dir": str(tmp_path / "logs"),
            },
            "experiment": {"kind": "orbits", "max_period": 2},
        },
    )


class TestExperimentConfig:
    def test_digest_is_stable(self, experiment_config):
        again = ExperimentConfig.from_config(Config())
        assert experiment_config.digest == again.digest
        assert len(experiment_config.digest) == 64

    def test_seed_changes_digest(self, experiment_config):
        reseeded = experiment_config.with_seed(11)
        assert reseeded.experiment.seed == 11
        assert reseeded.digest != experiment_config.digest

    def test_experiment_file_overrides_defaults(self, tmp_path):
        path = write_yaml(tmp_path / "exp.yaml", {"experiment": {"kind": "closing", "segments": 2}})
        exp = load_experiment(path, Config())
        assert exp.experiment.kind == "closing"
        assert exp.experiment.segments == 2
        assert exp.experiment.max_period == ExperimentSettings().max_period

    @pytest.mark.parametrize(
        "data, message",
        [
            ({"plotting": {}}, "unknown experiment sections"),
            ({"experiment": {"kind": "dichotomy"}}, "校验失败"),
            ({"map": {"matrix": [[1, 0], [0, 1]]}}, "校验失败"),
        ],
    )
    def test_invalid_experiment_files(self, tmp_path, data, message):
        path = write_yaml(tmp_path / "exp.yaml", data)
        with pytest.raises(ConfigError, match=message):
            load_experiment(path, Config())

    def test_missing_experiment_file(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_experiment(tmp_path / "missing.yaml", Config())
        assert info.value.exit_code == 2

    def test_environment_overrides(self, config_file, tmp_path, monkeypatch):
        monkeypatch.setenv("RIGIDITY_CACHE_DIR", str(tmp_path / "elsewhere"))
        monkeypatch.setenv("RIGIDITY_LOG_LEVEL", "debug")
        config = load_config(config_file)
        assert config.paths.cache_dir == str(tmp_path / "elsewhere")
        assert config.logging.level == "DEBUG"


class TestResultCache:
    def test_round_trip_and_counters(self, tmp_path):
        cache = ResultCache(tmp_path)
        assert cache.get("orbits", "abc") is None
        cache.put("orbits", "abc", {"summary": {"orbits": 2}})
        assert cache.get("orbits", "abc") == {"summary": {"orbits": 2}}
        assert (cache.hits, cache.misses) == (1, 1)

    def test_corrupt_entry_is_dropped(self, tmp_path):
        cache = ResultCache(tmp_path)
        cache.put("parry", "abc", {"x": 1})
        entry = cache.inspect()[0]
        (tmp_path / entry.name).write_text("{not json", encoding="utf-8")
        assert cache.get("parry", "abc") is None
        assert cache.inspect() == []

    def test_clear_by_prefix(self, tmp_path):
        cache = ResultCache(tmp_path)
        cache.put("parry", "a", {})
        cache.put("orbits", "a", {})
        assert cache.clear("parry") == 1
        assert [e.name.split("-")[0] for e in cache.inspect()] == ["orbits"]
        assert cache.clear() == 1

    def test_disabled_cache_never_writes(self, tmp_path):
        cache = ResultCache(tmp_path / "off", enabled=False)
        cache.put("orbits", "a", {})
        assert cache.get("orbits", "a") is None
        assert not (tmp_path / "off").exists()


def test_csv_carries_the_digest():
    text = render_csv(["period", "trace", "flag"], [[1, 0.1, True], [2, None, False]], "d" * 64)
    lines = text.splitlines()
    assert lines[0] == f"# digest: {'d' * 64}"
    assert lines[1] == "period,trace,flag"
    assert lines[2] == "1,0.10000000000000001,true"
    assert lines[3] == "2,,false"


def test_csv_quotes_commas_and_quotes():
    text = render_csv(["label", "note"], [["g1", 'say "hi", ok']], "d" * 64)
    rows = list(csv.reader(io.StringIO(text.split("\n", 1)[1])))
    assert rows == [["label", "note"], ["g1", 'say "hi", ok']]


class TestPipeline:
    def test_orbits_run_writes_artifacts(self, tmp_path):
        config = ExperimentConfig(experiment=ExperimentSettings(kind="orbits", max_period=3))
        cache = ResultCache(tmp_path / "cache")
        manifest = run(config, tmp_path / "out", cache)
        assert manifest.status == "ok"
        assert set(manifest.artifacts) == {"orbits.csv", "orbits.json"}

        document = json.loads((tmp_path / "out" / "orbits.json").read_text(encoding="utf-8"))
        assert document["manifest_digest"] == config.digest
        assert document["counts"] == {
            "1": {"points": 1, "expected": 1},
            "2": {"points": 3, "expected": 3},
            "3": {"points": 1, "expected": 1},
        }
        assert (tmp_path / "out" / "orbits.csv").read_text(encoding="utf-8").startswith(f"# digest: {config.digest}")
        assert json.loads((tmp_path / "out" / "manifest.json").read_text(encoding="utf-8"))["kind"] == "orbits"
        assert (tmp_path / "out" / "report.md").exists()

    def test_second_run_hits_the_cache(self, tmp_path):
        config = ExperimentConfig(experiment=ExperimentSettings(kind="orbits", max_period=1))
        cache = ResultCache(tmp_path / "cache")
        run(config, tmp_path / "first", cache)
        manifest = run(config, tmp_path / "second", cache)
        assert [s.status for s in manifest.stages if s.name == "orbits"] == ["cached"]
        assert manifest.cache_hits == 1

    def test_cached_artifacts_match_the_computed_ones(self, tmp_path):
        config = ExperimentConfig(experiment=ExperimentSettings(kind="orbits", max_period=2))
        cache = ResultCache(tmp_path / "cache")
        run(config, tmp_path / "cold", cache)
        run(config, tmp_path / "warm", cache)
        assert cache.hits == 1
        for name in ("orbits.csv", "orbits.json"):
            assert (tmp_path / "cold" / name).read_bytes() == (tmp_path / "warm" / name).read_bytes()

    def test_inconclusive_dichotomy_reports_a_violation(self, monkeypatch):
        field_ = SimpleNamespace(max_residual=1e-2, max_disagreement=0.0, residual_tolerance=1e-4)
        report = SimpleNamespace(
            verdict="inconclusive",
            conjugacy_field=field_,
            to_dict=lambda: {"verdict": "inconclusive"},
            trace_match=SimpleNamespace(table=lambda: []),
        )
        monkeypatch.setattr(stages, "_base", lambda cocycle: cocycle)
        monkeypatch.setattr(stages, "normalize_cocycle", lambda *args: SimpleNamespace(to_dict=lambda: {}))
        monkeypatch.setattr(stages, "dichotomy_report", lambda *args: report)
        ctx = SimpleNamespace(
            cocycle_a=None, cocycle_b=None, model=None, orbits=[], loops=[], words=[], p=None,
            config=ExperimentConfig(), tolerance=1e-9, jobs=1,
        )
        out = stages.dichotomy_stage(ctx)
        assert out["summary"]["verdict"] == "inconclusive"
        assert out["violation"]["type"] == "ToleranceViolation"
        assert out["violation"]["details"]["max_residual"] == 1e-2


class TestSuites:
    def test_check_helpers(self):
        assert at_most("gap", 1e-9, 1e-8).passed
        assert not at_least("exponent", 0.2, 0.35).passed
        assert holds("verdict", True).relation == "holds"

    @pytest.mark.parametrize(
        "outcome, code",
        [
            (lambda ctx: [Check("a", 1.0, 0.5, "<=", False)], 4),
            (lambda ctx: [Check("a", 0.1, 0.5, "<=", True)], 0),
        ],
    )
    def test_suite_exit_codes(self, monkeypatch, experiment_config, outcome, code):
        monkeypatch.setitem(suites.SUITES, "stub", outcome)
        result = run_suite("stub", SuiteContext(experiment_config))
        assert result.exit_code == code

    @pytest.mark.parametrize("error, code", [(NumericalError("diverged"), 3), (PathDependenceError("paths", 0.1), 4)])
    def test_aborted_suite_keeps_the_error_code(self, monkeypatch, experiment_config, error, code):
        def failing(ctx):
            raise error

        monkeypatch.setitem(suites.SUITES, "stub", failing)
        result = verify(["stub"], SuiteContext(experiment_config))[0]
        assert not result.passed
        assert result.exit_code == code
        assert result.to_dict()["error"].startswith(type(error).__name__)

    def test_linear_degeneracy_suite_passes(self, experiment_config):
        result = run_suite("linear-degeneracy", SuiteContext(experiment_config, samples=2))
        assert result.passed, result.to_dict()
        assert result.exit_code == 0
        assert len(result.checks) == 4

    def test_acceptance_sample_counts(self, experiment_config):
        ctx = SuiteContext(experiment_config)
        assert len(ctx.points(suites.HOLONOMY_POINTS)) == 50
        assert len(ctx.points(suites.QUADRILATERAL_CONFIGURATIONS)) == 20
        assert len(SuiteContext(experiment_config, samples=3).points(suites.PCH_LOOPS)) == 3


class TestCli:
    def test_config_show(self, config_file):
        result = runner.invoke(app, ["config-show", "--config", str(config_file)])
        assert result.exit_code == 0
        assert "orbits" in result.output

    def test_unknown_suite_exits_with_config_code(self):
        result = runner.invoke(app, ["verify", "no-such-suite"])
        assert result.exit_code == 2

    def test_bad_config_exits_with_config_code(self, tmp_path):
        path = write_yaml(tmp_path / "bad.yaml", {"map": {"matrix": [[1]]}})
        result = runner.invoke(app, ["config-show", "--config", str(path)])
        assert result.exit_code == 2

    def test_run_and_cache_commands(self, config_file, tmp_path):
        out = tmp_path / "run"
        result = runner.invoke(app, ["run", "--config", str(config_file), "--out", str(out), "--quiet"])
        assert result.exit_code == 0, result.output
        assert (out / "manifest.json").exists()

        listed = runner.invoke(app, ["cache", "inspect", "--config", str(config_file)])
        assert "共 1 项" in listed.output
        cleared = runner.invoke(app, ["cache", "clear", "orbits", "--config", str(config_file)])
        assert "已删除 1 项" in cleared.output

    def test_run_accepts_a_tolerance_scale(self, config_file, tmp_path):
        out = tmp_path / "scaled"
        result = runner.invoke(app, ["run", "--config", str(config_file), "--out", str(out), "--tol-scale", "10", "--quiet"])
        assert result.exit_code == 0, result.output
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        expected = load_experiment(None, load_config(config_file)).with_tol_scale(10.0)
        assert manifest["config_digest"] == expected.digest


def test_tolerance_scale_only_touches_acceptance_tolerances(experiment_config):
    scaled = experiment_config.with_tol_scale(10.0)
    assert scaled.parry.residual_tolerance == pytest.approx(10 * experiment_config.parry.residual_tolerance)
    assert scaled.orbits.srb_tolerance == pytest.approx(10 * experiment_config.orbits.srb_tolerance)
    assert scaled.holonomy.tolerance == experiment_config.holonomy.tolerance
    assert experiment_config.with_tol_scale(1.0) is experiment_config
