"""CLI orchestration: outputs, determinism, exit codes."""

import json

from cocyclelab import cli


def run(argv):
    return cli.main(argv)


def test_claims_writes_csv(tmp_path):
    out = tmp_path / "r"
    assert run(["claims", "--n-max", "60", "--out", str(out), "--check"]) == 0
    text = (out / "claims.csv").read_text()
    assert text.startswith("# seed=")
    assert "growth" in text and "power_d3" in text


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["lclt", "--source", "u-exact", "--ns", "64,256",
                    "--out", str(out)]) == 0
    assert (a / "lclt_u-exact.csv").read_bytes() == (b / "lclt_u-exact.csv").read_bytes()


def test_decomp_check_mode(tmp_path):
    out = tmp_path / "r"
    assert run(["decomp", "--cases", "10", "--n-max", "500",
                "--out", str(out), "--check"]) == 0
    rows = (out / "decomp.csv").read_text().splitlines()
    assert len(rows) == 12  # comment + header + 10 cases


def test_exit_code_config_error(tmp_path, capsys):
    code = run(["range", "--poly", "n", "--grid", "50", "--samples", "30",
                "--out", str(tmp_path)])
    assert code == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert json.loads(err)["error"]["kind"] == "config"


def test_exit_code_horizon_error(tmp_path, capsys):
    code = run(["range", "--poly", "10000000000*n^9", "--grid", "100000",
                "--samples", "30", "--out", str(tmp_path)])
    assert code == cli.EXIT_HORIZON
    err = capsys.readouterr().err
    assert json.loads(err)["error"]["kind"] == "horizon"


def test_config_file_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_max=40\ncases=5\n")
    out = tmp_path / "r"
    assert run(["--config", str(cfg), "decomp", "--out", str(out)]) == 0
    rows = (out / "decomp.csv").read_text().splitlines()
    assert len(rows) == 7
    assert "cases=5" in rows[0]


def test_config_file_bad(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("not a kv line")
    assert run(["--config", str(cfg), "claims"]) == cli.EXIT_CONFIG


def test_smallball_and_charfn(tmp_path):
    out = tmp_path / "r"
    assert run(["smallball", "--ns", "64", "--out", str(out), "--check"]) == 0
    assert run(["charfn", "--ns", "64,256", "--out", str(out), "--check"]) == 0
    lines = (out / "charfn.csv").read_text().splitlines()
    assert lines[1].split(",")[0] == "n"


def test_transfer_cli(tmp_path):
    out = tmp_path / "r"
    assert run(["transfer", "--ns", "64,256", "--out", str(out)]) == 0
    assert (out / "transfer.csv").exists()


def test_diverge_small(tmp_path):
    out = tmp_path / "r"
    assert run(["diverge", "--epochs", "2,2,1", "--samples", "2",
                "--out", str(out)]) == 0
    text = (out / "divergence.csv").read_text()
    assert "avg_at_n" in text
    assert (out / "divergence_tags.csv").exists()
    assert (out / "epochs.csv").read_text().splitlines()[1] == "k,n_mark,m_mark"
    pair_rows = (out / "pairprob.csv").read_text().splitlines()
    assert pair_rows[1] == "n,pair_prob,tag"
    assert len(pair_rows) == 2 + 64  # one row per n < M_1
