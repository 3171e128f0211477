import csv
import io
import json

import numpy as np
import pytest

from lpsmooth.campanato import campanato_norm
from lpsmooth.cover import IntervalFamily
from lpsmooth.errors import ConfigError, CoverError
from lpsmooth.harness import ExperimentConfig, Params, build_config, check_triple, run
from lpsmooth.harness.cli import main
from lpsmooth.harness.config import DEFAULTS, EXPERIMENTS, load_config, parse_params
from lpsmooth.harness.emit import EmitError, emit, to_csv, to_json
from lpsmooth.harness.experiments import (
    run_decomp_check, run_l2_facts, run_rf_inequality, trial_seed,
)
from lpsmooth.operators import apply_S
from lpsmooth.signal_core import SampledSignal, SampleGrid, random_bandlimited


class TestParameterGate:
    @pytest.mark.parametrize("i,r,s", [(1, 1, 0.0), (1, 1, 0.5), (2, 2, 1.0), (3, 3, 2.9),
                                       (1, 2, -0.4)])
    def test_accepts(self, i, r, s):
        check_triple(i, r, s)

    @pytest.mark.parametrize("i,r,s,name", [
        (2, 1, 0.5, "r > max{s, i-1}"),
        (1, 1, 1.0, "r > max{s, i-1}"),
        (1, 3, 1.5, "s in (-1/2, i]"),
        (1, 1, -0.5, "s in (-1/2, i]"),
    ])
    def test_rejects_naming_constraint(self, i, r, s, name):
        with pytest.raises(ConfigError, match=name.replace("{", r"\{").replace("}", r"\}")
                           .replace("(", r"\(").replace(")", r"\)").replace("[", r"\[")
                           .replace("]", r"\]").replace("+", r"\+")):
            check_triple(i, r, s)

    def test_params_validation(self):
        with pytest.raises(ConfigError):
            Params(A=1.0)
        with pytest.raises(ConfigError):
            Params(sigma_max=3)
        with pytest.raises(ConfigError):
            Params(p=0.5)

    def test_triples_checked(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("bound-scan", 256, 16.0, triples=((2, 0.5, 1),))


class TestBuildConfig:
    def test_defaults(self):
        for name in EXPERIMENTS:
            cfg = build_config(name)
            assert cfg.n == DEFAULTS[name]["n"] and cfg.trials == DEFAULTS[name]["trials"]

    def test_precedence(self, tmp_path):
        data = {"seed": 5, "n": 512, "params": {"r": 2, "s": 0.5}, "A": 1.02}
        cfg = build_config("bound-scan", data, n=256, params={"s": 1.0})
        assert (cfg.seed, cfg.n, cfg.params.r, cfg.params.s, cfg.params.A) == \
            (5, 256, 2, 1.0, 1.02)
        assert cfg.scan_triples() == ((1, 1.0, 2),)

    def test_intervals_inline_and_file(self, tmp_path):
        path = tmp_path / "fam.json"
        path.write_text(json.dumps([{"a": 1, "b": 2}]))
        assert build_config("decomp-check", intervals=str(path)).family == ((1.0, 2.0),)
        cfg = build_config("decomp-check", {"intervals": [[1, 2], [4, 5]]})
        assert cfg.interval_family().intervals == ((1.0, 2.0), (4.0, 5.0))

    @pytest.mark.parametrize("data", [
        {"bogus": 1}, {"n": 1000}, {"n": 12.5}, {"seed": -1}, {"seed": "x"},
        {"trials": 0}, {"period": -1.0}, {"intervals": [[-1, 1]]}, {"format": "xml"},
        {"params": {"i": 2, "r": 1}},
    ])
    def test_rejects(self, data):
        with pytest.raises(ConfigError):
            build_config("decomp-check", data)

    def test_parse_params(self):
        assert parse_params("i=1, r=2,s=0.5") == {"i": 1, "r": 2, "s": 0.5}
        with pytest.raises(ConfigError):
            parse_params("q=1")
        with pytest.raises(ConfigError):
            parse_params("r=two")

    def test_load_config_errors(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(bad)
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")
        arr = tmp_path / "arr.json"
        arr.write_text("[]")
        with pytest.raises(ConfigError):
            load_config(arr)

    def test_echo_omits_output_fields(self):
        echo = build_config("shift-lip", out="x.json", workers=4).echo()
        assert "out" not in echo and "workers" not in echo and "format" not in echo


class TestDeterminism:
    def test_trial_seed(self):
        assert trial_seed(0, 1) == trial_seed(0, 1)
        assert len({trial_seed(s, t) for s in range(5) for t in range(5)}) == 25

    def test_worker_count_irrelevant(self):
        cfg = build_config("rf-inequality", trials=6, n=512)
        assert to_json(run(cfg)) == to_json(run(cfg.with_(workers=4)))

    def test_byte_identical_json(self, tmp_path):
        paths = [tmp_path / f"r{k}.json" for k in range(2)]
        for p in paths:
            assert main(["counterexample", "--out", str(p), "--quiet"]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_seed_changes_records(self):
        a = run(build_config("rf-inequality", trials=3, n=512, seed=1))
        b = run(build_config("rf-inequality", trials=3, n=512, seed=2))
        assert a.records != b.records


class TestExperiments:
    def test_decomp_defaults_small(self):
        rep = run_decomp_check(build_config("decomp-check", trials=4, n=1024, period=16.0))
        assert rep.passed
        assert rep.aggregate["max_residual"] <= 1e-10

    def test_decomp_zero_trial(self):
        cfg = build_config("decomp-check", trials=2, n=1024, period=16.0)
        rep = run_decomp_check(cfg)
        zero = [r for r in rep.records if r.get("zero")]
        assert all(r["residual"] == 0.0 for r in zero)

    def test_decomp_cover_error(self):
        cfg = build_config("decomp-check", trials=1, n=1024, period=16.0, A=4.0, D=1)
        with pytest.raises(CoverError, match="cover for family"):
            run(cfg)

    def test_l2_facts(self):
        rep = run_l2_facts(build_config("decomp-check", trials=5, n=1024, period=16.0))
        assert rep.passed

    def test_rf_single_interval(self):
        cfg = build_config("rf-inequality", trials=3, n=512, intervals=[[1.0, 3.0]])
        rep = run_rf_inequality(cfg)
        eq2 = [r["ratio"] for r in rep.records if r["arm"].startswith("eq2")]
        assert np.allclose(eq2, 1.0, atol=1e-12)

    def test_single_plateau_ratio(self):
        grid = SampleGrid(16.0, 2048)
        fam = IntervalFamily(((3.0, 8.0), (-6.0, -4.0)))
        for seed in range(5):
            f = random_bandlimited(seed, grid, (3.0, 4.6))
            out = apply_S(f, fam)
            demod = SampledSignal(grid, np.exp(-2j * np.pi * 3.0 * grid.points) * f.values)
            ratio = campanato_norm(out, 1) / campanato_norm(f, 1)
            assert ratio == pytest.approx(campanato_norm(demod, 1) / campanato_norm(f, 1),
                                          rel=1e-10)
            assert ratio <= 1 + 1e-10

    def test_dump_profile(self):
        rep = run(build_config("dump-profile", profile="psi_tilde", n=64))
        assert rep.passed and len(rep.records) == 64

    def test_unknown_profile(self):
        with pytest.raises(ConfigError):
            run(build_config("dump-profile", profile="nope"))


class TestEmit:
    def test_csv_rows(self):
        cfg = build_config("rf-inequality", trials=3, n=512)
        rep = run(cfg)
        rows = list(csv.DictReader(io.StringIO(to_csv(rep))))
        arms = {r["arm"] for r in rows}
        assert len(rows) == cfg.trials * len(arms)
        assert all(r["experiment"] == "rf-inequality" for r in rows)

    def test_json_schema(self):
        d = json.loads(to_json(run(build_config("counterexample"))))
        assert d["schema"] == "lpsmooth.report/1"
        assert set(d) == {"schema", "experiment", "config", "records", "aggregate",
                          "criteria", "passed"}

    def test_nonfinite_become_null(self):
        from lpsmooth.harness.experiments import Report
        rep = Report("x", {}, [{"arm": "a", "v": float("nan")}], {"m": np.float64("inf")})
        d = json.loads(to_json(rep))
        assert d["records"][0]["v"] is None and d["aggregate"]["m"] is None

    def test_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        rep = run(build_config("counterexample"))
        with pytest.raises(EmitError, match=str(blocker)):
            emit(rep, "json", blocker / "sub" / "r.json")


class TestCli:
    def test_pass_exit_zero(self, capsys):
        assert main(["counterexample"]) == 0
        out = capsys.readouterr()
        assert json.loads(out.out)["passed"] is True
        assert "PASS  f_bounded" in out.err

    def test_csv_to_file(self, tmp_path):
        path = tmp_path / "out" / "r.csv"
        assert main(["rf-inequality", "--trials", "2", "--n", "512", "--format", "csv",
                     "--out", str(path), "--quiet"]) == 0
        assert path.read_text().startswith("experiment,")

    def test_failure_exit_one(self, capsys):
        # the fine partition is preasymptotic over the default Smooth1 range
        assert main(["kernel-decay", "--kernel", "smooth1", "--params", "r=1,i=1,s=0"]) == 1
        assert "FAIL  slope[r=1]" in capsys.readouterr().err

    def test_bad_triple_exit_two(self, capsys):
        assert main(["bound-scan", "--params", "i=2,r=1,s=0.5"]) == 2
        assert "r > max{s, i-1}" in capsys.readouterr().err

    def test_cover_error_exit_two(self, capsys):
        assert main(["decomp-check", "--A", "4", "--D", "1", "--trials", "1",
                     "--n", "1024", "--period", "16"]) == 2
        err = capsys.readouterr().err
        assert "CoverError" in err and err.count("decrease A") == 1

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n": 256, "profile": "theta"}))
        assert main(["dump-profile", "--config", str(cfg), "--quiet"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["config"]["profile"] == "theta" and len(d["records"]) == 256

    def test_missing_config_exit_two(self, tmp_path):
        assert main(["shift-lip", "--config", str(tmp_path / "none.json")]) == 2

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main(["nope"])
        assert info.value.code == 2
