"""Command-line interface: outputs, determinism, exit codes."""

import json

import pytest

from stlc import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


SIM_CFG = {
    "schema_version": 1,
    "lattice": "L4",
    "Q": 2,
    "snr_db_grid": [3, 6],
    "trials_per_point": 120,
    "seed": 77,
}


@pytest.fixture
def sim_config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(SIM_CFG))
    return p


class TestOneShotCommands:
    def test_mindet(self, capsys):
        code, out, _ = run(capsys, "mindet", "--lattice", "L6", "--box", "2")
        assert code == 0
        assert out.splitlines()[1].startswith("L6,2,64,")

    def test_mindet_unknown_lattice(self, capsys):
        code, _, err = run(capsys, "mindet", "--lattice", "L9")
        assert code == 2 and "L9" in err

    def test_member(self, capsys):
        code, out, _ = run(capsys, "member", "--lattice", "L4", "--x", "1,1,0,0,0,0,0,0")
        assert code == 0 and out.splitlines()[1].endswith("true")

    def test_rate(self, capsys):
        code, out, _ = run(capsys, "rate", "--lattice", "L4", "--Q", "4")
        assert code == 0 and out.splitlines()[1] == "L4,4,3.75"

    def test_dmt_single(self, capsys):
        code, out, _ = run(capsys, "dmt", "--family", "optimal", "--r", "0")
        assert code == 0 and out.splitlines()[1] == "optimal,0,4"

    def test_dmt_out_of_range(self, capsys):
        code, _, err = run(capsys, "dmt", "--family", "L1-like", "--r", "0.9")
        assert code == 2

    def test_energy_single(self, capsys):
        code, out, _ = run(capsys, "energy", "--lattice", "L2", "--K", "1")
        assert code == 0 and out.splitlines()[1] == "L2,1,false,1"

    def test_json_format(self, capsys):
        code, out, _ = run(capsys, "rate", "--lattice", "L2", "--Q", "4", "--format", "json")
        assert code == 0
        assert json.loads(out) == {"lattice": "L2", "Q": 4, "rate_bpcu": 4.0}


class TestSimulate:
    def test_writes_csv_metadata_figure(self, capsys, sim_config, tmp_path):
        out_csv = tmp_path / "run.csv"
        code, _, _ = run(capsys, "simulate", "--config", str(sim_config), "--output", str(out_csv))
        assert code == 0
        text = out_csv.read_text()
        assert text.splitlines()[0] == "snr_db,trials,block_errors,bler,avg_nodes,p95_nodes"
        assert len(text.splitlines()) == 3
        meta = json.loads((tmp_path / "run.meta.json").read_text())
        assert meta["config"]["lattice"] == "L4"
        assert "snr_convention" in meta
        assert (tmp_path / "run.png").exists()

    def test_byte_identical_reruns(self, capsys, sim_config, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "simulate", "--config", str(sim_config), "--output", str(a), "--no-plot")
        run(capsys, "simulate", "--config", str(sim_config), "--output", str(b), "--no-plot")
        assert a.read_bytes() == b.read_bytes()

    def test_seed_env_override(self, capsys, sim_config, tmp_path, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "simulate", "--config", str(sim_config), "--output", str(a), "--no-plot")
        monkeypatch.setenv("STLC_SEED", "123456")
        run(capsys, "simulate", "--config", str(sim_config), "--output", str(b), "--no-plot")
        assert a.read_bytes() != b.read_bytes()

    def test_empty_grid_rejected(self, capsys, tmp_path):
        bad = dict(SIM_CFG, snr_db_grid=[])
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(bad))
        code, _, err = run(capsys, "simulate", "--config", str(p), "--output", str(tmp_path / "x.csv"))
        assert code == 2 and "snr_db_grid" in err

    def test_wrong_schema_rejected(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(dict(SIM_CFG, schema_version=2)))
        code, _, _ = run(capsys, "simulate", "--config", str(p), "--output", str(tmp_path / "x.csv"))
        assert code == 2

    def test_missing_config(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "simulate", "--config", str(tmp_path / "nope.json"),
            "--output", str(tmp_path / "x.csv"),
        )
        assert code == 2


class TestProfileCommand:
    def test_profile_output(self, capsys, tmp_path):
        cfg = dict(SIM_CFG, lattice="L2", snr_db_grid=[6], trials_per_point=200)
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        out_csv = tmp_path / "prof.csv"
        code, _, _ = run(
            capsys, "profile", "--config", str(p), "--output", str(out_csv), "--bins", "5"
        )
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "bin,sens_lo,sens_hi,count,mean_nodes,p95_nodes"
        assert len(lines) == 6
        assert (tmp_path / "prof.png").exists()


class TestDecodeTrace:
    def test_trace_output(self, capsys, tmp_path):
        inst = {
            "h": [[0.3, 0.1], [-0.5, 0.9], [1.1, -0.2], [0.4, 0.7]],
            "y": [[0.2, -1.0], [0.9, 0.3], [-0.4, 0.2], [1.0, -0.6]],
            "Q": 2,
            "lattice": "L4",
        }
        p = tmp_path / "inst.json"
        p.write_text(json.dumps(inst))
        code, out, _ = run(capsys, "decode-trace", "--instance", str(p))
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "level,value,partial_dist,action"
        assert lines[-1].startswith("# q_hat=")
        assert any(line.endswith("accept") for line in lines)


class TestDmtGrid:
    def test_grid_csv_and_figure(self, capsys, tmp_path):
        out_csv = tmp_path / "dmt.csv"
        code, _, _ = run(
            capsys, "dmt", "--family", "L2-like", "--grid", "0:0.5:0.25",
            "--output", str(out_csv),
        )
        assert code == 0
        assert out_csv.read_text().splitlines() == [
            "family,r,d",
            "L2-like,0,4",
            "L2-like,0.25,2",
            "L2-like,0.5,0",
        ]
        assert (tmp_path / "dmt.png").exists()

    def test_grid_validation(self, capsys):
        code, _, _ = run(capsys, "dmt", "--family", "optimal", "--grid", "junk")
        assert code == 2
