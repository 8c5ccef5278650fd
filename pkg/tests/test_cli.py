"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import json
from pathlib import Path

import pandas as pd
import pytest

from gumbel_phcs.cli import format_summary, main
from gumbel_phcs.sim import INTERVAL_COLUMNS


def read_report(directory: Path, command: str) -> dict:
    return json.loads((directory / f"{command}.json").read_text(encoding="utf-8"))


class TestFit:
    def test_bundled(self, tmp_path: Path) -> None:
        assert main(["fit", "--bundled-covid", "--out", str(tmp_path)]) == 0
        report = read_report(tmp_path, "fit")
        assert report["command"] == "fit"
        fit = report["results"]["fit"]
        assert fit["converged"]
        assert fit["alpha"] == pytest.approx(2.0130, rel=5e-3)
        assert [interval["method"] for interval in report["results"]["aci"]] == ["ACI", "ACI"]

    def test_byte_identical(self, tmp_path: Path) -> None:
        argv = ["fit", "--bundled-covid", "--T", "10", "--removals", "0*39,50", "--out", str(tmp_path)]
        assert main(argv) == 0
        first = (tmp_path / "fit.json").read_bytes()
        assert main(argv) == 0
        assert (tmp_path / "fit.json").read_bytes() == first

    def test_text_summary(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["fit", "--bundled-covid", "--out", str(tmp_path)]) == 0
        text = (tmp_path / "fit.txt").read_text(encoding="utf-8")
        assert capsys.readouterr().out == text
        assert text.startswith("gumbel-phcs fit\n")
        assert "alpha: 2.01" in text
        assert text.count("ACI") == 2

    def test_input_file(self, tmp_path: Path, covid) -> None:
        path = tmp_path / "data.txt"
        path.write_text("\n".join(str(value) for value in covid), encoding="utf-8")
        assert main(["mps", "--input", str(path), "--out", str(tmp_path)]) == 0
        assert read_report(tmp_path, "mps")["results"]["fit"]["method"] == "MPS"


class TestExitStatus:
    def test_unknown_command(self) -> None:
        with pytest.raises(SystemExit) as info:
            main(["bogus"])
        assert info.value.code == 2

    def test_two_sources(self, tmp_path: Path) -> None:
        assert main(["fit", "--bundled-covid", "--input", "x.txt", "--out", str(tmp_path)]) == 2

    def test_invalid_plan(self, tmp_path: Path) -> None:
        assert main(["fit", "--bundled-covid", "--removals", "0*10", "--out", str(tmp_path)]) == 2

    def test_missing_input(self, tmp_path: Path) -> None:
        assert main(["fit", "--input", str(tmp_path / "missing.txt"), "--out", str(tmp_path)]) == 4

    def test_malformed_input(self, tmp_path: Path) -> None:
        path = tmp_path / "data.txt"
        path.write_text("1.0\nabc\n", encoding="utf-8")
        assert main(["fit", "--input", str(path), "--out", str(tmp_path)]) == 4

    def test_censor_needs_plan(self, tmp_path: Path) -> None:
        assert main(["censor", "--bundled-covid", "--out", str(tmp_path)]) == 2


class TestCommands:
    def test_censor(self, tmp_path: Path) -> None:
        argv = ["censor", "--bundled-covid", "--T", "10", "--removals", "0*39,50", "--out", str(tmp_path)]
        assert main(argv) == 0
        table = pd.read_csv(tmp_path / "censored.csv")
        assert list(table.columns) == ["i", "time", "removals"]
        assert len(table) == 40
        assert read_report(tmp_path, "censor")["results"]["sample"]["m"] == 40

    def test_bayes(self, tmp_path: Path) -> None:
        argv = ["bayes", "--bundled-covid", "--chain", "2000", "--loss", "linex", "--p", "0.5", "--out", str(tmp_path)]
        assert main(argv) == 0
        results = read_report(tmp_path, "bayes")["results"]
        assert list(results["estimates"]) == ["LINEX(p=0.5)"]
        assert results["burn_in"] == 400
        assert len(results["hpd"]) == 2

    def test_simulate(self, tmp_path: Path) -> None:
        config = tmp_path / "campaign.toml"
        config.write_text(
            '[simulate]\nestimators = ["MLE"]\nintervals = ["ACI"]\n'
            "plans = [{n = 30, m = 15, T = 1.5, scheme = 1}]\n",
            encoding="utf-8",
        )
        assert main(["simulate", "--config", str(config), "--reps", "2", "--out", str(tmp_path)]) == 0
        estimators = pd.read_csv(tmp_path / "estimators.csv")
        assert list(estimators["estimator"]) == ["MLE"]
        header = (tmp_path / "intervals.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == ",".join(INTERVAL_COLUMNS)

    def test_plotdata(self, tmp_path: Path) -> None:
        assert main(["plotdata", "--bundled-covid", "--out", str(tmp_path)]) == 0
        tables = read_report(tmp_path, "plotdata")["results"]["tables"]
        assert tables == [
            "boxplot.csv",
            "ecdf.csv",
            "profile_alpha.csv",
            "profile_beta.csv",
            "qq.csv",
            "ttt.csv",
        ]

    @pytest.mark.slow
    def test_gof(self, tmp_path: Path) -> None:
        assert main(["gof", "--bundled-covid", "--boot", "200", "--out", str(tmp_path)]) == 0
        table = pd.read_csv(tmp_path / "gof.csv")
        assert list(table["model"]) == ["GT-II", "NH", "BurrIII", "IKum"]

    @pytest.mark.slow
    def test_intervals(self, tmp_path: Path) -> None:
        argv = ["intervals", "--bundled-covid", "--boot", "100", "--chain", "2000", "--out", str(tmp_path)]
        assert main(argv) == 0
        methods = [i["method"] for i in read_report(tmp_path, "intervals")["results"]["intervals"]]
        assert methods == ["ACI", "ACI", "BootP", "BootP", "BootT", "BootT", "HPD", "HPD"]


class TestSummary:
    def test_sections(self) -> None:
        results = {
            "acceptance_rate": 0.3125,
            "sample": {"n": 90, "m": 40, "T": 10.0, "removals": [0] * 39 + [50]},
            "estimates": {"SELF": {"alpha": 2.0, "beta": 80.0}},
            "models": [{"model": "GT-II", "ad": 2.4733436}, {"model": "NH", "ad": 3.673023}],
        }
        text = format_summary("gof", results)
        lines = text.splitlines()
        assert lines[:2] == ["gumbel-phcs gof", "acceptance_rate: 0.3125"]
        assert "  removals: 40 values from 0 to 50" in lines
        assert any(line.startswith("SELF") and "80" in line for line in lines)
        assert any("GT-II" in line and "2.47334" in line for line in lines)
        assert text.endswith("\n")
