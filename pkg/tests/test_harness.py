import dataclasses
import json
import math
from pathlib import Path

import numpy as np
import pytest

from robin_scope.implementations import band1d
from robin_scope.implementations.datastructures import (
    ConvergenceReport,
    FailedResult,
    RunReport,
    SuccessResult,
)
from robin_scope.implementations.errors import HarnessErrors, SolverErrors, SpectralException
from robin_scope.implementations.harness import checks
from robin_scope.implementations.harness.cli import main
from robin_scope.implementations.harness.config import (
    EXPERIMENTS,
    RunConfig,
    RunSection,
    load_config,
    parse_config,
)
from robin_scope.implementations.harness.dependencies import Dependencies
from robin_scope.implementations.harness.experiments import REGISTRY, build_experiment, run_experiment, validate_all
from robin_scope.implementations.harness.helpers.condition_executor import ConditionChain
from robin_scope.implementations.harness.reports import ReportWriter, summary_text, to_plain
from robin_scope.implementations.harness.templates.base import Condition, Experiment
from robin_scope.implementations.harness.workspace import Workspace


def error_code_of(fn, *args, **kwargs) -> str:
    with pytest.raises(SpectralException) as exc:
        fn(*args, **kwargs)
    return exc.value.error_code


def run_with(config: RunConfig, experiment: str, **sections) -> RunReport:
    for name, values in sections.items():
        config = dataclasses.replace(config, **{name: dataclasses.replace(getattr(config, name), **values)})
    return run_experiment(config.with_overrides(experiment=experiment))


def write_toml(path: Path, config: RunConfig, out: Path, extra: str = "") -> Path:
    band = config.band
    gammas = ", ".join(f"{g}" for g in band.gamma_grid)
    path.write_text(
        f"""
[run]
out = "{out}"
threads = 2
log_level = "warning"

[band]
gamma_grid = [{gammas}]
spacing = {band.spacing}
table = "{band.table}"

[tolerances]
anchor = 1e-4
boundary_value = 1e-4
{extra}
"""
    )
    return path


# ============================================================================
# Configuration
# ============================================================================

class TestConfig:

    def test_defaults_are_valid(self):
        config = load_config(None)
        assert config.run.experiment == "validate"
        assert config.run.budget == "quick"
        assert config.study.h_list == (0.1, 0.05, 0.025)

    def test_lists_become_tuples(self):
        config = parse_config({"study": {"h_list": [0.2, 0.1]}})
        assert config.study.h_list == (0.2, 0.1)
        assert config.geometry == RunConfig().geometry

    @pytest.mark.parametrize(
        "raw",
        [
            {"colour": {"red": 1}},
            {"run": {"speed": 3}},
            {"run": "fast"},
            {"run": {"threads": 0}},
            {"run": {"budget": "huge"}},
            {"physics": {"alpha": 0.25}},
            {"physics": {"lam": 1.5}},
            {"physics": {"count_lam": 1.0}},
            {"physics": {"field_slope": -1.0}},
            {"geometry": {"shape": "triangle"}},
            {"tolerances": {"fiber": 0.0}},
            {"study": {"h_list": [0.1, 0.2]}},
            {"study": {"square_flux": [0, 4]}},
            {"band": {"xi_min": 3.0, "xi_max": 1.0}},
            {"band": {"gamma_grid": [1.0, 0.0]}},
            {"run": {"threads": "4"}},
            {"physics": {"alpha": "1"}},
            {"study": {"h_list": 0.1}},
        ],
    )
    def test_invalid_values(self, raw):
        assert error_code_of(parse_config, raw) == HarnessErrors.CONFIG_INVALID

    @pytest.mark.parametrize(
        "raw, message",
        [
            ({"run": {"threads": "4"}}, "run.threads: expected int, got '4'"),
            ({"physics": {"alpha": "1"}}, "physics.alpha: expected float, got '1'"),
            ({"study": {"h_list": 0.1}}, "study.h_list: expected list of float, got 0.1"),
            ({"run": {"seed": True}}, "run.seed: expected int, got True"),
            ({"models": {"torus_flux": [1, 2.5]}}, "models.torus_flux: expected list of int, got (1, 2.5)"),
        ],
    )
    def test_wrong_types_name_the_field(self, raw, message):
        with pytest.raises(SpectralException) as exc:
            parse_config(raw)
        assert exc.value.error_code == HarnessErrors.CONFIG_INVALID
        assert exc.value.message == message

    def test_integers_are_accepted_for_floats(self):
        config = parse_config({"physics": {"alpha": 1}, "band": {"gamma_grid": [-1, 0, 1]}})
        assert config.physics.alpha == 1
        assert config.band.gamma_grid == (-1, 0, 1)

    def test_unknown_experiment(self):
        assert error_code_of(parse_config, {"run": {"experiment": "fly"}}) == HarnessErrors.UNKNOWN_EXPERIMENT

    def test_missing_file(self, tmp_path):
        assert error_code_of(load_config, tmp_path / "absent.toml") == HarnessErrors.CONFIG_INVALID

    def test_broken_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[run\nthreads = ")
        assert error_code_of(load_config, path) == HarnessErrors.CONFIG_INVALID

    def test_overrides_skip_missing_values(self, default_config):
        assert default_config.with_overrides(out=None) is default_config
        changed = default_config.with_overrides(out="elsewhere", threads=None)
        assert changed.run.out == "elsewhere"
        assert changed.run.threads == default_config.run.threads

    def test_as_dict_lists_every_section(self, default_config):
        sections = default_config.as_dict()
        assert set(sections) == {"run", "geometry", "physics", "band", "study", "models", "tolerances"}
        assert sections["physics"]["gamma"] == -1.0


# ============================================================================
# Condition chains
# ============================================================================

class Passing(Condition):
    criterion = "passing"

    def validate(self, *, context, run_id):
        return SuccessResult(run_id=run_id)


class Failing(Condition):
    criterion = "failing"

    def validate(self, *, context, run_id):
        return FailedResult(run_id=run_id, message="no", error_code=HarnessErrors.CHECK_FAILED)


class FailingLater(Condition):
    criterion = "failing-later"

    def validate(self, *, context, run_id):
        return FailedResult(run_id=run_id, message="later", error_code=HarnessErrors.CHECK_FAILED)


class Raising(Condition):
    criterion = "raising"

    def validate(self, *, context, run_id):
        raise SpectralException(SolverErrors.GRID_TOO_COARSE, "coarse")


class Exploding(Condition):
    criterion = "exploding"

    def validate(self, *, context, run_id):
        raise ZeroDivisionError("boom")


class TestConditionChain:

    def test_execute_stops_at_the_first_failure(self):
        result = ConditionChain([Passing(), Failing(), Raising()]).execute(context={}, run_id="r")
        assert result.status is False
        assert result.error_code == HarnessErrors.CHECK_FAILED

    def test_execute_without_stopping_returns_the_first_failure(self):
        chain = ConditionChain([Passing(), Failing(), FailingLater(), Passing()], stop_on_failure=False)
        result = chain.execute(context={}, run_id="r")
        assert result.status is False
        assert result.message == "no"

    def test_execute_passes(self):
        assert ConditionChain([Passing(), Passing()]).execute(context={}, run_id="r").status

    def test_collect_runs_everything(self):
        results = ConditionChain(
            [Passing(), Failing(), Raising(), Exploding()], stop_on_failure=False
        ).collect(context={}, run_id="r")
        assert [r.criterion for r in results] == ["passing", "failing", "raising", "exploding"]
        assert [r.status for r in results] == [True, False, False, False]
        assert results[2].error_code == HarnessErrors.CHECK_CRASHED
        assert SolverErrors.GRID_TOO_COARSE in results[2].message
        assert "ZeroDivisionError" in results[3].message

    def test_collect_can_stop(self):
        results = ConditionChain([Failing(), Passing()]).collect(context={}, run_id="r")
        assert len(results) == 1


# ============================================================================
# Reports
# ============================================================================

class TestReports:

    def test_to_plain(self):
        report = ConvergenceReport(rows=[], energy_limit=None, count_limit=1.0, count_exponent=0.5)
        plain = to_plain({"a": np.arange(3), "b": np.float64(2.5), "c": math.inf, "d": report, "e": (1, 2)})
        assert plain["a"] == [0, 1, 2]
        assert plain["b"] == 2.5
        assert plain["c"] == "inf"
        assert plain["d"]["count_exponent"] == 0.5
        assert plain["e"] == [1, 2]
        json.dumps(plain)

    def test_report_and_summary_files(self, tmp_path, default_config):
        report = RunReport(
            experiment="band",
            run_id="run-1",
            config=default_config.as_dict(),
            results={"theta": {"0": 0.59}},
            checks=[
                SuccessResult(run_id="run-1", message="fine", criterion="c01"),
                FailedResult(run_id="run-1", message="off", error_code=HarnessErrors.CHECK_FAILED, criterion="c02"),
            ],
            timings={"run": 0.5},
        )
        writer = ReportWriter(tmp_path / "out")
        path = writer.write_report(report)
        payload = json.loads(path.read_text())
        assert payload["passed"] is False
        assert payload["checks"][1]["error_code"] == HarnessErrors.CHECK_FAILED
        summary = (tmp_path / "out" / "summary.txt").read_text()
        assert summary == summary_text(report)
        assert "[FAIL] c02" in summary
        assert "theta.0" in summary

    def test_columns_and_csv(self, tmp_path):
        writer = ReportWriter(tmp_path)
        path = writer.write_columns("x.dat", "a b", ([1.0, 2.0], [3.0, 4.0]))
        assert path.read_text().startswith("# a b")
        assert np.loadtxt(path).shape == (2, 2)
        csv_path = writer.write_csv("rows.csv", [{"h": 0.1, "count": 3}])
        assert csv_path.read_text().splitlines() == ["h,count", "0.1,3"]


# ============================================================================
# Checks
# ============================================================================

class TestChecks:

    def test_quick_suite_leaves_out_the_studies(self):
        quick = {c.criterion for c in checks.suite("quick")}
        full = {c.criterion for c in checks.suite("full")}
        assert "c08_energy_convergence" not in quick
        assert quick < full
        assert len(full) == len(checks.ALL_CHECKS)

    def test_torus_check_on_a_workspace(self, quick_config):
        config = dataclasses.replace(quick_config, models=dataclasses.replace(quick_config.models, torus_flux=(1, 2)))
        context = {"workspace": Workspace(config)}
        result = checks.TorusLandauCheck().validate(context=context, run_id="r")
        assert result.status
        assert context["results"]["c06_torus_landau"]["flux2"]["multiplicity"] == 2

    def test_crashing_evaluation_is_a_failed_check(self, quick_config):
        config = dataclasses.replace(
            quick_config, models=dataclasses.replace(quick_config.models, dirichlet_side=-1.0)
        )
        context = {"workspace": Workspace(config)}
        result = checks.DirichletSquareCheck().validate(context=context, run_id="r")
        assert result.criterion == "c07_dirichlet_square"
        assert result.status is False
        assert context["results"]["c07_dirichlet_square"]["error"]

    def test_snapshot_mismatch(self, tmp_path, quick_config):
        small = band1d.band_table([0.0], np.linspace(-1.0, 1.0, 5), 2, quick_config.band.discretization)
        tampered = dataclasses.replace(small, mu=small.mu.copy())
        tampered.mu[1, 0, 3] += 1e-6
        path = band1d.save_band_table(tampered, tmp_path / "snapshot.dat")
        config = quick_config.with_overrides(snapshot=str(path))
        result = checks.SnapshotCheck().validate(context={"workspace": Workspace(config)}, run_id="r")
        assert result.status is False
        assert result.error_code == HarnessErrors.SNAPSHOT_MISMATCH
        assert "j=2" in result.message

    def test_snapshot_matches_itself(self, tmp_path, quick_config):
        small = band1d.band_table([0.0], np.linspace(-1.0, 1.0, 5), 2, quick_config.band.discretization)
        path = band1d.save_band_table(small, tmp_path / "snapshot.dat")
        config = quick_config.with_overrides(snapshot=str(path))
        assert checks.SnapshotCheck().validate(context={"workspace": Workspace(config)}, run_id="r").status


# ============================================================================
# Experiments
# ============================================================================

class TestExperiments:

    def test_registry_covers_every_experiment(self):
        assert set(REGISTRY) == set(EXPERIMENTS)

    def test_unknown_experiment(self):
        deps = Dependencies(RunConfig(run=RunSection(experiment="fly")))
        assert error_code_of(build_experiment, deps) == HarnessErrors.UNKNOWN_EXPERIMENT

    def test_experiment_without_preconditions(self, tmp_path):
        class Echo(Experiment):
            name = "echo"

            def _run(self, context, run_id):
                return {"value": 1}

        deps = Dependencies(RunConfig(run=RunSection(out=str(tmp_path))))
        experiment = Echo(clock=deps.clock, config=deps.config, logger=deps.logger, writer=deps.writer)
        report = experiment.execute(context={}, run_id="echo-1")
        assert report.results == {"value": 1}
        assert report.checks == []
        assert set(report.timings) == {"preconditions", "run", "checks"}
        assert (tmp_path / "report.json").is_file()

    def test_band_run_writes_its_files(self, quick_config):
        report = run_with(quick_config, "band")
        out = Path(quick_config.run.out)
        for name in ("report.json", "summary.txt", "band_table.dat", "theta.dat"):
            assert (out / name).is_file()
        assert report.results["theta"]["0"]["Theta"] == pytest.approx(0.590106125, abs=1e-5)
        by_name = {c.criterion: c for c in report.checks}
        assert by_name["c03_monotonicity_limits"].status
        assert by_name["snapshot_regression"].status
        assert set(report.timings) == {"preconditions", "run", "checks"}

    def test_band_table_must_exist(self, quick_config, tmp_path):
        code = error_code_of(run_with, quick_config, "band", band={"table": str(tmp_path / "missing.dat")})
        assert code == HarnessErrors.CONFIG_INVALID

    def test_limits_need_gamma_in_the_table(self, quick_config):
        code = error_code_of(run_with, quick_config, "limits", physics={"gamma": -3.0})
        assert code == HarnessErrors.CONFIG_INVALID

    def test_disk_study_needs_a_circle(self, quick_config):
        code = error_code_of(run_with, quick_config, "disk-converge", geometry={"shape": "square"})
        assert code == HarnessErrors.CONFIG_INVALID

    def test_square_count_needs_two_sizes(self, quick_config):
        code = error_code_of(run_with, quick_config, "square-count", study={"square_flux": (4,)})
        assert code == HarnessErrors.CONFIG_INVALID

    def test_disk_study_over_budget(self, quick_config):
        code = error_code_of(run_with, quick_config, "disk-converge", study={"budget_unknowns": 1})
        assert code == SolverErrors.BUDGET_EXCEEDED

    @pytest.mark.integration
    def test_limits_run(self, quick_config):
        report = run_with(quick_config, "limits")
        assert report.results["energy_limit"].value > 0.0
        assert report.results["count_methods_gap"] < 5e-3
        table = np.loadtxt(Path(quick_config.run.out) / "limits.dat")
        assert table.shape == (11, 3)
        assert np.isnan(table[-1, 2])
        assert report.passed

    @pytest.mark.slow
    def test_lieb_thirring_run(self, quick_config):
        report = run_with(quick_config, "lt-check")
        assert report.results["all_hold"]
        assert report.passed
        assert (Path(quick_config.run.out) / "lieb_thirring.csv").is_file()

    @pytest.mark.slow
    def test_validate_all_runs_every_quick_check(self, quick_config):
        report = validate_all("quick", quick_config)
        expected = [check.criterion for check in checks.suite("quick")]
        assert report.experiment == "validate"
        assert report.results["suite"] == expected
        assert [c.criterion for c in report.checks] == expected
        assert (Path(quick_config.run.out) / "summary.txt").is_file()


# ============================================================================
# Command line
# ============================================================================

@pytest.mark.e2e
class TestCli:

    def test_band_command(self, tmp_path, quick_config, capsys):
        out = tmp_path / "out"
        config = write_toml(tmp_path / "run.toml", quick_config, out)
        assert main(["band", "--config", str(config)]) == 0
        assert (out / "report.json").is_file()
        assert "status      PASS" in capsys.readouterr().out

    def test_out_flag_wins(self, tmp_path, quick_config):
        config = write_toml(tmp_path / "run.toml", quick_config, tmp_path / "from_file")
        main(["band", "--config", str(config), "--out", str(tmp_path / "from_flag")])
        assert (tmp_path / "from_flag" / "report.json").is_file()
        assert not (tmp_path / "from_file").exists()

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text("[nonsense]\nvalue = 1\n")
        assert main(["band", "--config", str(path)]) == 2
        assert HarnessErrors.CONFIG_INVALID in capsys.readouterr().err

    def test_bad_thread_count_exits_2(self, tmp_path, quick_config):
        config = write_toml(tmp_path / "run.toml", quick_config, tmp_path / "out")
        assert main(["band", "--config", str(config), "--threads", "0"]) == 2

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            main(["fly"])
        assert exc.value.code == 2

    def test_budget_exceeded_writes_a_partial_report(self, tmp_path, quick_config):
        out = tmp_path / "out"
        config = write_toml(tmp_path / "run.toml", quick_config, out, "\n[study]\nbudget_unknowns = 1\n")
        assert main(["disk-converge", "--config", str(config)]) == 1
        payload = json.loads((out / "report.json").read_text())
        assert payload["passed"] is False
        assert payload["checks"][0]["criterion"] == "budget"
        assert payload["checks"][0]["error_code"] == SolverErrors.BUDGET_EXCEEDED
        assert payload["results"]["partial"]["partial"] is True
