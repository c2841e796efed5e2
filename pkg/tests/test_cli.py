import csv
import json
import os
import re
import subprocess
import sys

import pytest

from secureas.cli import DEFAULTS, build_spec, cmd_run, dumps_scenario, loads_scenario, main, parse_scenario
from secureas.errors import ConfigError
from secureas.model import dbm_to_watts

DESK = """\
# desk-scale profile
num_antennas = 12
num_rf_chains = 4
num_users = 3
num_eves = 2
power_dbm = 10
num_realizations = 1
rng_seed = 3
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def desk_file(tmp_path):
    path = tmp_path / "desk.ini"
    path.write_text(DESK)
    return path


class TestParse:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.ini"
        path.write_text("")
        spec = parse_scenario(path)
        cfg = spec.base
        assert (cfg.M, cfg.N, cfg.K, cfg.J) == (24, 6, 6, 4)
        assert cfg.weights.tolist() == [1.0] * 6
        assert cfg.noise_ut.tolist() == [dbm_to_watts(-120.0)] * 6
        assert cfg.noise_eve.tolist() == [dbm_to_watts(-120.0)] * 4
        assert spec.pdd.rho_init == 1.0 and spec.pdd.chi == 0.1 and spec.pdd.violation_threshold_init == 1.0
        assert spec.path_loss_db == -120.0 and spec.num_realizations == 500

    def test_rf_chain_invariant(self):
        with pytest.raises(ConfigError, match="N < M") as err:
            loads_scenario("num_rf_chains = 30")
        assert err.value.field == "num_rf_chains"

    def test_unknown_key_lists_valid_keys(self):
        with pytest.raises(ConfigError, match="num_antennas") as err:
            loads_scenario("num_antenas = 8")
        assert "num_antenas" in str(err.value)

    @pytest.mark.parametrize("text", ["num_antennas = many", "so_refine = maybe", "weights = 1, x"])
    def test_malformed_values(self, text):
        with pytest.raises(ConfigError):
            loads_scenario(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_scenario(tmp_path / "nope.ini")

    def test_inline_comments_and_vectors(self):
        spec = loads_scenario("num_users = 2  # two users\nweights = 1, 2\npdd_chi = 0.2\nso_refine = yes")
        assert spec.base.weights.tolist() == [1.0, 2.0]
        assert spec.pdd.chi == 0.2 and spec.so_refine

    @pytest.mark.parametrize(
        "text",
        ["", DESK, "num_users = 2\nweights = 0.5, 2\nnoise_ut_dbm = -110, -100\nsweep = power\nsweep_values = -3.5, 0, 7.25\npdd_rho_init = 0.5",
         "num_antennas = 8\nsweep = rf\nsweep_values = 2, 3\nschemes = so, mrt\npower_dbm = -7.3"],
    )
    def test_round_trip(self, text):
        spec = loads_scenario(text)
        again = loads_scenario(dumps_scenario(spec))
        assert again == spec
        assert dumps_scenario(again) == dumps_scenario(spec)

    def test_defaults_cover_every_key(self):
        spec = build_spec(dict(DEFAULTS))
        assert spec.base.M == 24


class TestRun:
    def test_single_mrt_row_is_deterministic(self, desk_file, tmp_path):
        args = ["run", "--config", str(desk_file), "--schemes", "mrt", "--realizations", "1"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        a, b = (tmp_path / d / "wssr_vs_sweep.csv" for d in "ab")
        assert a.read_bytes() == b.read_bytes()
        rows = read_csv(a)
        assert len(rows) == 1 and rows[0]["scheme"] == "mrt" and rows[0]["n_ok"] == "1"
        assert list(rows[0]) == ["sweep_value", "scheme", "mean_wssr", "stderr", "n_ok", "n_fail"]
        meta = json.loads((tmp_path / "a" / "run_meta.json").read_text())
        assert meta["schema_version"] == 1 and meta["seed"] == 3 and meta["paired_channels"]
        assert meta["spec"]["num_antennas"] == 12

    def test_rf_sweep_rows(self, desk_file, tmp_path):
        code = main(["run", "--config", str(desk_file), "--sweep", "rf", "--values", "2,4,6",
                     "--schemes", "so,mrt", "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "wssr_vs_sweep.csv")
        assert [(r["sweep_value"], r["scheme"]) for r in rows] == [
            (v, s) for v in ("2", "4", "6") for s in ("so", "mrt")
        ]

    def test_pdd_trace_columns_and_final_violation(self, desk_file, tmp_path):
        assert main(["run", "--config", str(desk_file), "--schemes", "pdd", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "pdd_trace.csv")
        assert list(rows[0])[:5] == ["realization", "inner_iter_count", "outer_iter", "objective", "violation"]
        assert [int(r["inner_iter_count"]) for r in rows] == list(range(1, len(rows) + 1))
        assert float(rows[-1]["violation"]) <= 1e-4

    def test_floats_have_twelve_significant_digits(self, desk_file, tmp_path):
        main(["run", "--config", str(desk_file), "--schemes", "mrt", "--out", str(tmp_path)])
        value = read_csv(tmp_path / "wssr_vs_sweep.csv")[0]["mean_wssr"]
        assert len(value.replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 12

    def test_unwritable_output(self, desk_file, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert cmd_run(parse_scenario(desk_file), blocker / "sub", out=lambda *_: None) == 3

    def test_majority_failures_exit_nonzero(self, desk_file, tmp_path, monkeypatch):
        import secureas.sim as sim

        def broken(cfg, ch):
            raise FloatingPointError("boom")

        monkeypatch.setattr(sim, "mrt_scheme", broken)
        lines = []
        spec = build_spec({**dict(DEFAULTS), "num_antennas": 12, "num_rf_chains": 4, "num_users": 3,
                           "num_eves": 2, "num_realizations": 1, "schemes": ("mrt",)})
        assert cmd_run(spec, tmp_path, out=lines.append) == 3
        assert any("mrt failed" in line for line in lines)

    def test_exit_codes(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("num_rf_chains = 30\n")
        assert main(["run", "--config", str(bad)]) == 2
        with pytest.raises(SystemExit) as err:
            main(["run"])
        assert err.value.code == 1
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 1


class TestSelftest:
    def test_passes(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        for name in ("surrogate-tightness", "bisection", "greedy-vs-exhaustive"):
            assert re.search(rf"^PASS\s+{name}\s", out, re.M)

    def test_corrupted_tolerance_names_the_property(self):
        env = dict(os.environ, SECUREAS_SELFTEST_TOL_SCALE="1e-30")
        proc = subprocess.run([sys.executable, "-m", "secureas", "selftest"], capture_output=True, text=True, env=env)
        assert proc.returncode != 0
        assert re.search(r"^FAIL\s+surrogate-tightness\s", proc.stdout, re.M)
