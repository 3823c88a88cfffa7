import json
from pathlib import Path

import pytest

from weaklab.cli import main, parse_weight

GOLDEN = Path(__file__).parent / "golden"


def run(tmp_path, name, args):
    out = tmp_path / name
    code = main(args + ["--output", str(out)])
    return code, out


class TestSubcommands:
    def test_characteristic_runs(self, tmp_path):
        code, out = run(tmp_path, "c.csv", ["characteristic", "--weight", "powerlog:a=-0.5", "--p", "2"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("#schema=v1,kind,")
        assert len(lines) == 2

    def test_weaktype_runs(self, tmp_path):
        code, out = run(
            tmp_path, "w.csv",
            ["weaktype", "--operator", "AS", "--weight", "powerlog:a=0.5", "--p", "2",
             "--trials", "3", "--level", "6"],
        )
        assert code == 0
        assert len(out.read_text().splitlines()) == 4

    def test_lowerbound_json(self, tmp_path):
        jout = tmp_path / "lb.json"
        code, out = run(
            tmp_path, "lb.csv",
            ["lowerbound", "--delta", "0.2,0.1", "--json-output", str(jout)],
        )
        assert code == 0
        payload = json.loads(jout.read_text())
        assert "slope_log_quotient_vs_log_inv_delta" in payload
        assert len(payload["rows"]) == 2

    def test_sparse_check_passes(self, tmp_path):
        code, _ = run(tmp_path, "s.csv", ["sparse-check", "--seed", "7", "--trials", "10", "--level", "6"])
        assert code == 0

    def test_matrix_check_passes(self, tmp_path):
        code, _ = run(tmp_path, "m.csv", ["matrix-check", "--seed", "0", "--trials", "2"])
        assert code == 0

    def test_constants_runs(self, tmp_path):
        code, out = run(tmp_path, "k.csv", ["constants", "--a-list", "0.3,0.6"])
        assert code == 0
        assert len(out.read_text().splitlines()) == 3


class TestExitCodes:
    def test_invalid_exponent_relation_is_2(self, tmp_path):
        code, _ = run(
            tmp_path, "x.csv",
            ["weaktype", "--operator", "Ialpha", "--weight", "powerlog:a=-0.2",
             "--p", "2", "--q", "3", "--alpha", "0.25", "--trials", "1"],
        )
        assert code == 2

    def test_bad_delta_is_2(self, tmp_path):
        code, _ = run(tmp_path, "x.csv", ["lowerbound", "--delta", "0.7"])
        assert code == 2

    def test_numerical_failure_is_3(self, tmp_path):
        # |x|^(-1/2) squared is non-integrable: RH_2 must fail with exit 3
        code, _ = run(
            tmp_path, "x.csv",
            ["characteristic", "--weight", "powerlog:a=-0.5", "--kind", "rh", "--s", "2"],
        )
        assert code == 3

    def test_unresolved_level_set_is_3(self, tmp_path):
        code, _ = run(
            tmp_path, "x.csv",
            ["lowerbound", "--delta", "0.05", "--x-min", "1e-4", "--cells-per-band", "4",
             "--no-closed-form"],
        )
        assert code == 3


class TestDeterminism:
    @pytest.mark.parametrize(
        "args",
        [
            ["characteristic", "--weight", "powerlog:a=-0.5", "--p", "2"],
            ["weaktype", "--operator", "AS", "--weight", "powerlog:a=0.5", "--p", "2",
             "--trials", "3", "--level", "6", "--seed", "11"],
            ["lowerbound", "--delta", "0.2"],
            ["sparse-check", "--seed", "7", "--trials", "5", "--level", "6"],
            ["matrix-check", "--seed", "1", "--trials", "2"],
            ["constants", "--a-list", "0.3"],
        ],
        ids=["characteristic", "weaktype", "lowerbound", "sparse-check", "matrix-check", "constants"],
    )
    def test_byte_identical_reruns(self, tmp_path, args):
        _, out1 = run(tmp_path, "r1.csv", list(args))
        _, out2 = run(tmp_path, "r2.csv", list(args))
        assert out1.read_bytes() == out2.read_bytes()


class TestGoldenFiles:
    @pytest.mark.parametrize(
        "golden,args",
        [
            ("characteristic_a-05_p2.csv",
             ["characteristic", "--weight", "powerlog:a=-0.5", "--p", "2"]),
            ("constants_p2.csv", ["constants", "--p", "2", "--a-list", "0.3,0.6,0.9"]),
            ("lowerbound_d02.csv", ["lowerbound", "--delta", "0.2"]),
            ("sparse_check_seed7.csv",
             ["sparse-check", "--seed", "7", "--trials", "20", "--level", "6"]),
            ("weaktype_as_seed3.csv",
             ["weaktype", "--operator", "AS", "--weight", "powerlog:a=0.5", "--p", "2",
              "--trials", "5", "--level", "6", "--seed", "3"]),
            ("matrix_check_seed0.csv", ["matrix-check", "--seed", "0", "--trials", "3"]),
        ],
        ids=["characteristic", "constants", "lowerbound", "sparse-check", "weaktype", "matrix-check"],
    )
    def test_pinned_output(self, tmp_path, golden, args):
        _, out = run(tmp_path, "g.csv", args)
        assert out.read_bytes() == (GOLDEN / golden).read_bytes()


class TestConfigAndEnv:
    def test_config_file_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("weight = powerlog:a=-0.5\np = 2\n")
        out = tmp_path / "c.csv"
        code = main(["--config", str(cfg), "characteristic", "--output", str(out)])
        assert code == 0
        assert "powerlog:a=-0.5" in out.read_text()

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("weight = powerlog:a=-0.5\ntrials = 50\n")
        out = tmp_path / "w.csv"
        code = main(
            ["--config", str(cfg), "weaktype", "--trials", "2", "--level", "6",
             "--output", str(out)]
        )
        assert code == 0
        assert len(out.read_text().splitlines()) == 3  # header + 2 trials

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("WEAKLAB_OUT", str(tmp_path))
        code = main(["characteristic", "--weight", "powerlog:a=-0.5", "--p", "2"])
        assert code == 0
        assert (tmp_path / "characteristic.csv").exists()

    def test_parse_weight_descriptors(self, tmp_path):
        w = parse_weight("powerlog:a=-0.5,b=1,c=2")
        assert (w.exponent, w.log_exponent, w.scale) == (-0.5, 1.0, 2.0)
        data = {"mesh": {"radius": 1.0, "level": 3}, "values": [1.0] * 16}
        path = tmp_path / "w.json"
        path.write_text(json.dumps(data))
        ws = parse_weight(f"sampled:{path}")
        assert ws.mesh.n_cells == 16
        with pytest.raises(ValueError):
            parse_weight("fourier:a=1")
