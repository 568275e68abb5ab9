import csv
import io
import json
import math

import numpy as np
import pytest

from hermite_jost import cli, jost, verify
from hermite_jost.errors import ConfigError
from hermite_jost.jacobi import FiniteSupport, Power, Tabulated

SMALL = "c=power:0.1:0.5\nb=power:0.2:1.0\nlambda=-1:1:3\nn_max=1000\n"


class TestParseConfig:
    def test_defaults(self):
        cfg = cli.parse_config("")
        assert cfg.spec.is_free
        assert cfg.points == 33 and cfg.format == "csv"
        assert cfg.outputs == frozenset({"density"})

    def test_full(self):
        cfg = cli.parse_config(
            "# comment\nc = power:0.1:0.5\nb=finite:0.5\nlambda=-2:2:5\nn_max=2000\n"
            "tol=1e-9\nout=density,limit-formula\nformat=json\nseed=7\noracle-n=500\n")
        assert isinstance(cfg.spec.c, Power) and isinstance(cfg.spec.b, FiniteSupport)
        assert np.allclose(cfg.grid, [-2, -1, 0, 1, 2])
        assert cfg.n_max == 2000 and cfg.tol == 1e-9 and cfg.seed == 7 and cfg.oracle_n == 500
        assert cfg.outputs == {"density", "limit-formula"}
        assert cfg.format == "json"

    @pytest.mark.parametrize("text,field", [
        ("lambda=1:0:5", "lambda"), ("lambda=0:1", "lambda"), ("lambda=0:9:5", "lambda"),
        ("lambda=0:1:1", "lambda"), ("n_max=10", "n_max"), ("tol=1e-2", "tol"),
        ("out=density,bogus", "out"), ("format=xml", "format"), ("c=power:1", "c"),
        ("oracle_n=0", "oracle_n"), ("seed=x", "seed"), ("c=table", "c"),
    ])
    def test_field_errors(self, text, field):
        with pytest.raises(ConfigError) as info:
            cli.parse_config(text)
        assert info.value.field == field

    @pytest.mark.parametrize("text,line", [("c=zero\nwhat\n", 2), ("\n\nfoo=1\n", 3),
                                           ("c=zero\nc=zero\n", 2)])
    def test_line_errors(self, text, line):
        with pytest.raises(ConfigError) as info:
            cli.parse_config(text)
        assert info.value.line == line

    def test_file_spec(self, tmp_path):
        p = tmp_path / "pert.txt"
        p.write_text("1 0.1 0.2\n2 0.05 0.0\n")
        cfg = cli.parse_config(f"file={p}\nc=table\nb=table\nc_tail=power:0.1:1.5\n")
        assert isinstance(cfg.spec.c, Tabulated)
        assert cfg.spec.c(np.array([1, 3]))[1] == pytest.approx(0.1 * 3 ** -1.5)
        assert cfg.spec.b.tail_rule is None


class TestRows:
    def test_csv_round_trip(self):
        rows = [{"lambda": 0.1, "re_F": 1 / 3, "im_F": -math.pi, "terms_used": 42}]
        buf = io.StringIO()
        cli.write_rows(rows, cli.COLUMNS, "csv", buf)
        text = buf.getvalue()
        assert "\r" not in text
        back = cli.read_csv_rows(text)
        assert back[0]["re_F"] == 1 / 3 and back[0]["im_F"] == -math.pi
        assert back[0]["terms_used"] == 42 and back[0]["rho"] is None

    def test_json(self):
        buf = io.StringIO()
        cli.write_rows([{"lambda": 0.5, "rho": 0.25}], cli.COLUMNS, "json", buf)
        data = json.loads(buf.getvalue())
        assert data[0]["rho"] == 0.25 and data[0]["re_F"] is None


class TestPipeline:
    def test_density_matches_library(self):
        cfg = cli.parse_config(SMALL + "out=density,limit-formula\n")
        buf = io.StringIO()
        assert cli.run_pipeline(cfg, buf) == cli.EXIT_OK
        rows = cli.read_csv_rows(buf.getvalue())
        assert [r["lambda"] for r in rows] == [-1.0, 0.0, 1.0]
        ref = {-1.0: 0.19986771982374568, 0.0: 0.34083832928491109, 1.0: 0.29068599710514159}
        for r in rows:
            assert r["rho"] == pytest.approx(ref[r["lambda"]], rel=1e-8)
            assert r["im_m"] == pytest.approx(math.pi * r["rho"], rel=1e-8)
            assert abs(r["rho_limit"] - r["rho"]) < 5e-3 * r["rho"]

    def test_deterministic(self):
        cfg = cli.parse_config(SMALL)
        a, b = io.StringIO(), io.StringIO()
        cli.run_pipeline(cfg, a)
        cli.run_pipeline(cfg, b)
        assert a.getvalue() == b.getvalue()

    def test_oracle_column(self):
        cfg = cli.parse_config("lambda=-1:1:3\nout=density,oracle-compare\noracle_n=2000\n")
        buf = io.StringIO()
        assert cli.run_pipeline(cfg, buf) == cli.EXIT_OK
        rows = cli.read_csv_rows(buf.getvalue())
        assert all(r["rho_oracle_cdf_dev"] < 5e-3 for r in rows)

    def test_inadmissible(self):
        err = io.StringIO()
        cfg = cli.parse_config("b=const:0.5\nlambda=0:1:2\n")
        assert cli.run_pipeline(cfg, io.StringIO(), err) == cli.EXIT_ADMISSIBILITY
        assert "divergent series" in err.getvalue()

    def test_numerical_failure(self, monkeypatch):
        # a short horizon cannot reach the tolerance
        monkeypatch.setattr(jost, "DEFAULT_HORIZON", 2 ** 14)
        cfg = cli.parse_config("c=power:0.1:0.5\nlambda=0:1:2\ntol=1e-12\nn_max=100\n")
        err = io.StringIO()
        assert cli.run_pipeline(cfg, io.StringIO(), err) == cli.EXIT_NUMERICAL
        assert "lambda=0.0" in err.getvalue()


class TestMain:
    def test_density_to_file(self, tmp_path):
        out = tmp_path / "rho.csv"
        code = cli.main(["density", "--c", "power:0.1:0.5", "--lambda=-1:1:3", "--n-max", "500",
                         "-o", str(out)])
        assert code == 0
        rows = cli.read_csv_rows(out.read_text())
        assert len(rows) == 3

    def test_config_file_with_override(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("c=power:0.1:0.5\nlambda=0:1:5\nformat=csv\n")
        out = tmp_path / "rho.json"
        code = cli.main(["density", "--config", str(cfgfile), "--lambda=0:1:2", "--format", "json",
                         "-o", str(out)])
        assert code == 0
        assert [r["lambda"] for r in json.loads(out.read_text())] == [0.0, 1.0]

    def test_config_error_exit(self, capsys):
        assert cli.main(["density", "--tol", "5"]) == cli.EXIT_CONFIG
        assert "tol" in capsys.readouterr().err

    def test_missing_file_exit(self, tmp_path):
        assert cli.main(["density", "--file", str(tmp_path / "nope.txt"), "--c", "table"]) == cli.EXIT_CONFIG

    def test_bad_subcommand(self):
        assert cli.main(["frobnicate"]) == cli.EXIT_CONFIG

    def test_admissibility_exit(self):
        assert cli.main(["density", "--b", "const:0.5", "--lambda=0:1:2"]) == cli.EXIT_ADMISSIBILITY

    def test_oracle_subcommand(self, capsys):
        assert cli.main(["oracle-compare", "--lambda=-0.5:0.5:2", "--oracle-n", "1000"]) == 0
        rows = cli.read_csv_rows(capsys.readouterr().out)
        assert all(r["rho_oracle_cdf_dev"] is not None for r in rows)

    def test_verify_exit_codes(self, monkeypatch, capsys):
        ok = verify.CheckResult("ok", True, "fine")
        bad = verify.CheckResult("bad", False, "off")
        monkeypatch.setattr(verify, "ALL_CHECKS", (lambda: ok,))
        assert cli.main(["verify"]) == cli.EXIT_OK
        monkeypatch.setattr(verify, "ALL_CHECKS", (lambda: ok, lambda: bad))
        assert cli.main(["verify"]) == cli.EXIT_NUMERICAL
        out = capsys.readouterr().out
        assert "[FAIL] bad" in out and "1/2 checks passed" in out

    def test_asymptotics_subcommand(self, capsys):
        assert cli.main(["asymptotics-check"]) == cli.EXIT_OK
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 8 * len(verify.PR_NS)
        top = [r for r in rows if int(r["n"]) == max(verify.PR_NS)]
        assert all(float(r["rel_error"]) < 0.05 for r in top)
        assert {r["form"] for r in rows} == {"scaled", "fixed-z"}
