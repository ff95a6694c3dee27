import json

import pytest

from ordfuse.cli import ConfigError, load_config, main, run_experiment
from ordfuse.dp_policy import CostMode, PolicyTable
from ordfuse.sensing_model import MeasurementModel


def _write(tmp_path, text, name="config.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadConfig:
    def test_empty_file_gives_default_bundle(self, tmp_path):
        bundle = load_config(_write(tmp_path, ""))
        assert bundle.scenario.M == 10
        assert bundle.scenario.K == 8
        assert bundle.scenario.N == 3
        assert bundle.scenario.pi0 == 0.5
        assert bundle.scenario.sigma2 == 1.0
        assert bundle.scenario.sigma2_s == (2.0,) * 10
        assert bundle.scenario.tau == 0.1
        assert bundle.scenario.tau_N == 0.2
        assert bundle.scenario.tau_s == 1.0
        assert bundle.cost.mode is CostMode.ERROR_MIN
        assert bundle.cost.c == 0.0001
        assert bundle.fading is None
        assert bundle.experiment.preset == "custom"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.ini")

    def test_malformed_ini_reports_parse_error(self, tmp_path):
        path = _write(tmp_path, "M = 10\n")  # key before any section header
        with pytest.raises(ConfigError, match="parse error"):
            load_config(path)

    def test_timing_invariant_named(self, tmp_path):
        path = _write(tmp_path, "[scenario]\nM = 20\nK = 12\n")
        with pytest.raises(ConfigError, match="tau_s - tau_N - K\\*tau"):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = _write(tmp_path, "[scenario]\nbogus = 3\n")
        with pytest.raises(ConfigError, match="unknown key 'bogus'"):
            load_config(path)

    def test_unknown_section_rejected(self, tmp_path):
        path = _write(tmp_path, "[wat]\nx = 1\n")
        with pytest.raises(ConfigError, match="unknown section"):
            load_config(path)

    def test_bad_number_reported_with_field(self, tmp_path):
        path = _write(tmp_path, "[scenario]\npi0 = maybe\n")
        with pytest.raises(ConfigError, match="pi0"):
            load_config(path)

    def test_scalar_sigma_broadcasts(self, tmp_path):
        bundle = load_config(_write(tmp_path, "[scenario]\nM = 12\nsigma2_s = 3.5\n"))
        assert bundle.scenario.sigma2_s == (3.5,) * 12
        assert bundle.scenario.K == 8

    def test_sigma_list_length_checked(self, tmp_path):
        path = _write(tmp_path, "[scenario]\nM = 4\nsigma2_s = 1, 2, 3\n")
        with pytest.raises(ConfigError, match="sigma2_s"):
            load_config(path)

    def test_shift_in_mean_defaults(self, tmp_path):
        bundle = load_config(_write(tmp_path, "[scenario]\nmeasurement_model = shift-in-mean\n"))
        assert bundle.scenario.measurement_model is MeasurementModel.SHIFT_IN_MEAN_GAUSSIAN
        assert bundle.scenario.mu0 == (-1.0,) * 10
        assert bundle.scenario.mu1 == (1.0,) * 10

    def test_fading_section_parsed(self, tmp_path):
        bundle = load_config(_write(tmp_path, "[fading]\nW = 50000\nbits = 20\n"))
        assert bundle.fading is not None
        assert bundle.fading.W == 50000.0
        assert bundle.fading.m == 10

    def test_cost_section(self, tmp_path):
        text = "[cost]\nmode = weighted-throughput\nomega = 0.9\nc = 0.001\n"
        bundle = load_config(_write(tmp_path, text))
        assert bundle.cost.mode is CostMode.WEIGHTED_THROUGHPUT
        assert bundle.cost.omega == 0.9
        assert bundle.cost.c == 0.001

    def test_unknown_preset_rejected(self, tmp_path):
        path = _write(tmp_path, "[experiment]\npreset = fig-nope\n")
        with pytest.raises(ConfigError, match="preset"):
            load_config(path)

    def test_unknown_detector_rejected(self, tmp_path):
        path = _write(tmp_path, "[experiment]\ndetector = magic\n")
        with pytest.raises(ConfigError, match="detector"):
            load_config(path)


class TestRunExperiment:
    def test_custom_preset_writes_csv_and_meta(self, tmp_path):
        cfg = _write(
            tmp_path,
            f"[experiment]\npreset = custom\ntrials = 500\nseed = 4\n"
            f"output = {tmp_path / 'out'}\ndetector = bs\n",
        )
        bundle = load_config(cfg)
        written = run_experiment(bundle.experiment, bundle)
        csv_path = tmp_path / "out" / "custom.csv"
        meta_path = tmp_path / "out" / "custom.meta.json"
        assert csv_path in written and meta_path in written
        header = csv_path.read_text().splitlines()[0]
        assert header.startswith("detector,trials,seed,p_error")
        meta = json.loads(meta_path.read_text())
        assert meta["trials"] == 500
        assert meta["scenario"]["M"] == 10
        assert meta["cost"]["mode"] == "error-min"

    def test_byte_identical_reruns(self, tmp_path):
        cfg = _write(
            tmp_path,
            f"[experiment]\npreset = custom\ntrials = 400\nseed = 11\n"
            f"output = {tmp_path / 'out'}\ndetector = block-map\n",
        )
        bundle = load_config(cfg)
        run_experiment(bundle.experiment, bundle)
        first = (tmp_path / "out" / "custom.csv").read_bytes()
        first_meta = (tmp_path / "out" / "custom.meta.json").read_bytes()
        run_experiment(bundle.experiment, bundle)
        assert (tmp_path / "out" / "custom.csv").read_bytes() == first
        assert (tmp_path / "out" / "custom.meta.json").read_bytes() == first_meta

    def test_thresholds_preset_rows(self, tmp_path):
        cfg = _write(
            tmp_path,
            f"[experiment]\npreset = fig-thresholds-vs-stage\ntrials = 1\nseed = 1\n"
            f"output = {tmp_path / 'out'}\n",
        )
        bundle = load_config(cfg)
        run_experiment(bundle.experiment, bundle)
        lines = (tmp_path / "out" / "fig-thresholds-vs-stage.csv").read_text().splitlines()
        assert lines[0] == "c,stage,pi_low,pi_high,llr_equiv_declare_busy,llr_equiv_declare_free"
        assert len(lines) == 1 + 3 * 8  # three costs, eight stages
        rows = [line.split(",") for line in lines[1:]]
        zero_cost_rows = [r for r in rows if float(r[0]) == 0.0 and int(r[1]) < 8]
        assert all(float(r[2]) == 0.0 for r in zero_cost_rows)

    def test_sensing_vs_c_preset(self, tmp_path):
        cfg = _write(
            tmp_path,
            f"[experiment]\npreset = fig-sensing-vs-c\ntrials = 1500\nseed = 2\n"
            f"output = {tmp_path / 'out'}\nc_values = 0, 0.001\n",
        )
        bundle = load_config(cfg)
        run_experiment(bundle.experiment, bundle)
        lines = (tmp_path / "out" / "fig-sensing-vs-c.csv").read_text().splitlines()
        assert lines[0].startswith("c,avg_sensing_time,p_error")
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == pytest.approx(1.0)


class TestPresetSmoke:
    @pytest.mark.parametrize(
        "preset,extra",
        [
            ("fig-perror-vs-M", "m_values = 8, 10\n"),
            ("fig-throughput-vs-M", "m_values = 10\nomega_values = 0.5\n"),
            ("fig-probed-vs-M", "m_values = 10\n"),
            ("fig-throughput-compare", "m_values = 10\n"),
            ("fig-probed-vs-K", "k_values = 4\n"),
            ("fig-fading-probed", "m_values = 8\n"),
        ],
    )
    def test_preset_emits_csv(self, tmp_path, preset, extra):
        cfg = _write(
            tmp_path,
            f"[experiment]\npreset = {preset}\ntrials = 300\nseed = 1\n"
            f"output = {tmp_path / 'out'}\n{extra}",
        )
        bundle = load_config(cfg)
        written = run_experiment(bundle.experiment, bundle)
        csv_path = tmp_path / "out" / f"{preset}.csv"
        assert csv_path in written
        lines = csv_path.read_text().splitlines()
        assert len(lines) >= 2 and "," in lines[0]


class TestMain:
    def test_validate_ok(self, tmp_path, capsys):
        cfg = _write(tmp_path, "[scenario]\nM = 12\n")
        assert main(["validate", "--config", str(cfg)]) == 0
        assert "OK" in capsys.readouterr().out

    def test_validate_bad_config_exit_2(self, tmp_path, capsys):
        cfg = _write(tmp_path, "[scenario]\npi0 = 2.0\n")
        assert main(["validate", "--config", str(cfg)]) == 2
        assert "pi0" in capsys.readouterr().err

    def test_solve_writes_policy(self, tmp_path):
        cfg = _write(tmp_path, "[cost]\nmode = weighted-throughput\n")
        out = tmp_path / "policy.json"
        assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
        policy = PolicyTable.load(out)
        assert policy.k_max == 8
        assert policy.kind == "two-threshold"

    def test_solve_one_threshold_flag(self, tmp_path):
        cfg = _write(tmp_path, "[cost]\nmode = weighted-throughput\nc = 0\n")
        out = tmp_path / "policy.json"
        assert main(["solve", "--config", str(cfg), "--out", str(out), "--one-threshold"]) == 0
        assert PolicyTable.load(out).kind == "one-threshold"

    def test_solve_incompatible_cost_exit_3(self, tmp_path, capsys):
        cfg = _write(tmp_path, "[cost]\nmode = weighted-throughput\nc = 0.1\n")
        out = tmp_path / "policy.json"
        assert main(["solve", "--config", str(cfg), "--out", str(out), "--one-threshold"]) == 3
        assert "one-threshold" in capsys.readouterr().err

    def test_run_with_overrides(self, tmp_path, capsys):
        cfg = _write(tmp_path, "[experiment]\npreset = custom\ndetector = bs\n")
        out_dir = tmp_path / "results"
        code = main([
            "run", "--config", str(cfg), "--trials", "300", "--seed", "9",
            "--out", str(out_dir),
        ])
        assert code == 0
        assert (out_dir / "custom.csv").exists()
        meta = json.loads((out_dir / "custom.meta.json").read_text())
        assert meta["trials"] == 300
        assert meta["seed"] == 9
