import json

import pytest
from click.testing import CliRunner

from affinefourier import cli


@pytest.fixture
def runner():
    return CliRunner()


class TestInvariance:
    def test_passes_and_writes_reports(self, runner, tmp_path):
        out = tmp_path / "reports"
        result = runner.invoke(cli.main, [
            "invariance", "--out", str(out), "--format", "line-json"])
        assert result.exit_code == 0, result.output
        lines = (out / "invariance.jsonl").read_text().splitlines()
        assert len(lines) >= 3
        for line in lines:
            rec = json.loads(line)
            assert rec["residual"] < cli._tolerance_for(rec["identity"])

    def test_csv_format(self, runner, tmp_path):
        out = tmp_path / "reports"
        result = runner.invoke(cli.main, [
            "invariance", "--out", str(out), "--format", "csv"])
        assert result.exit_code == 0, result.output
        text = (out / "invariance.csv").read_text()
        assert text.splitlines()[0].startswith("identity,")


class TestPlancherel:
    def test_config_file(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"level": "N", "grid_size": 48}))
        result = runner.invoke(cli.main, ["plancherel", "--config", str(cfg)])
        assert result.exit_code == 0, result.output
        assert "ok" in result.output

    def test_bad_config_exits_2(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"level": "X"}))
        result = runner.invoke(cli.main, ["plancherel", "--config", str(cfg)])
        assert result.exit_code == 2
        assert "error:" in result.output

    def test_unknown_profile(self, runner):
        result = runner.invoke(cli.main, ["plancherel", "--profile", "huge"])
        assert result.exit_code != 0
        assert "unknown profile" in result.output

    def test_byte_stable_across_runs(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"level": "S", "grid_size": 48}))
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            result = runner.invoke(cli.main, [
                "plancherel", "--config", str(cfg), "--out", str(out)])
            assert result.exit_code == 0, result.output
            outs.append((out / "plancherel.jsonl").read_bytes())
        assert outs[0] == outs[1]


class TestSweep:
    def test_sweep_writes_csv(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"level": "N", "grid_size": 16,
                                   "span": [-9.0, 9.0]}))
        out = tmp_path / "reports"
        result = runner.invoke(cli.main, [
            "sweep", "--config", str(cfg), "--steps", "2", "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "grid,residual,flagged"
        assert len(lines) == 3


class TestToleranceLookup:
    def test_known_families(self):
        assert cli._tolerance_for("plancherel[S]") == 1e-3
        assert cli._tolerance_for("component-doubling[GL]") == 1e-12
        assert cli._tolerance_for("convolution[solvable-spectral]") == 5e-2

    def test_unknown_family_default(self):
        assert cli._tolerance_for("mystery[x]") == 1e-6
