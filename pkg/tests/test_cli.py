import json

import numpy as np
import pytest

from dualsiso import cli, harness
from dualsiso.cli import main, parse_ebn0


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestParsing:
    def test_ebn0_range_inclusive(self):
        assert parse_ebn0("0:6:1") == [0, 1, 2, 3, 4, 5, 6]
        assert parse_ebn0("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
        assert parse_ebn0("1,2.5") == [1.0, 2.5]

    @pytest.mark.parametrize("bad", ["3:1", "0:1:0", "a,b", "1:2:3:4"])
    def test_ebn0_bad(self, bad):
        with pytest.raises(cli.UsageError):
            parse_ebn0(bad)


class TestCommands:
    def test_codes(self, capsys):
        code, out, _ = run(capsys, "codes")
        assert code == 0
        assert [line.split("\t")[0] for line in out.splitlines()] == list(harness.BUILTIN_CODES)

    def test_encode(self, capsys):
        code, out, _ = run(capsys, "encode", "--code", "gf4:(1+x)", "--info", "1,2,3")
        data = json.loads(out)
        assert code == 0 and data["codeword"][:3] == [1, 3, 1] and data["tail_len"] == 2

    def test_decode_json(self, capsys, tmp_path):
        pmfs = np.full((6, 4), .25)
        pmfs[0] = [.7, .1, .1, .1]
        path = tmp_path / "frame.json"
        path.write_text(json.dumps({"pmfs": pmfs.tolist()}))
        results = {}
        for dec in ("bcjr", "dual-combined"):
            code, out, _ = run(capsys, "decode", "--code", "gf4:(1+x)", "--pmfs-in", str(path),
                               "--decoder", dec)
            assert code == 0
            results[dec] = np.array(json.loads(out)["posteriors"])
        assert results["bcjr"].shape == (6, 4)
        np.testing.assert_allclose(results["bcjr"], results["dual-combined"], atol=1e-12)

    def test_simulate_example(self, capsys, tmp_path):
        out_csv = tmp_path / "ber.csv"
        code, out, err = run(capsys, "simulate", "--code", "gf4:(1+x)", "--decoder", "dual-combined",
                             "--ebn0", "0:6:1", "--frames", "1000", "--seed", "7",
                             "--out", str(out_csv))
        assert code == 0
        rows = harness.read_records(out_csv)
        assert len(rows) == 7 and all(r[10] == "7" for r in rows)
        assert (tmp_path / "ber.gp").exists()
        assert "stop rule" in err and out == ""

    def test_simulate_config_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"code": "gf4:(1+x)", "seed": 1, "frame_len": 16,
                                   "max_frames": 32, "ebn0": [1, 2]}))
        code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--ebn0", "3", "--no-timing",
                           "--transform-mode", "fast-transform")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("code,decoder,ebn0_db") and len(lines) == 2
        assert lines[1].split(",")[2] == "3" and lines[1].split(",")[9] == "0.000"

    def test_verify_all(self, capsys):
        code, out, _ = run(capsys, "verify", "--all", "--frames", "100", "--seed", "1")
        assert code == 0 and out.count(" ok") == 5

    def test_bench_zero_frames(self, capsys):
        code, out, _ = run(capsys, "bench", "--frames", "0")
        assert code == 0 and out.startswith("field,n,N")


class TestExitCodes:
    @pytest.mark.parametrize("argv", [[], ["simulate", "--code", "gf4:(1+x)"],
                                      ["simulate", "--code", "gf4:(1+x)", "--seed", "1",
                                       "--decoder", "viterbi"],
                                      ["encode", "--code", "gf4:(1+x)", "--info", "7"],
                                      ["verify"], ["decode", "--code", "gf4:(1+x)", "--pmfs-in", "/nonexistent"]])
    def test_usage(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 1 and out == "" and err

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"code": "gf4:(1+x)", "seed": 1, "bogus": 2}))
        code, _, err = run(capsys, "simulate", "--config", str(cfg))
        assert code == 1 and "bogus" in err

    def test_verification_failure(self, capsys, monkeypatch):
        failing = harness.VerifyReport([harness.CodeVerification("x", 1, 1.0, 0, 0, 0, True, 1, 1)])
        monkeypatch.setattr(harness, "verify_theorems", lambda *a, **k: failing)
        code, out, err = run(capsys, "verify", "--all")
        assert code == 2 and "FAIL" in out and "FAILED" in err

    def test_numerical_failure(self, capsys, tmp_path):
        # an impossible observation: a symbol sequence that no terminated frame produces
        pmfs = np.eye(4)[[1, 0, 0]]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(pmfs.tolist()))
        code, out, err = run(capsys, "decode", "--code", "gf4:(1+x)", "--pmfs-in", str(path))
        assert code == 3 and "numerical" in err and out == ""
