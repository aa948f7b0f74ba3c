import json
import math
import socket
import threading
import time

import pytest

from entrodim import cli
from entrodim.errors import CertificationError
from oracles import LOG_GOLDEN

LOG2 = math.log(2.0)

FULL_SET = {"cylinders": [{"word": [0], "anchor": 0}, {"word": [1], "anchor": 0}]}


def run_cli(args):
    return cli.main(args)


class TestEntropyCommand:
    def test_golden_depth20(self, tmp_path, capsys):
        out = tmp_path / "ent.json"
        code = run_cli(["entropy", "--system", "golden", "--depth", "20",
                        "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["estimate"] == pytest.approx(LOG_GOLDEN, abs=2e-2)
        assert payload["version"]
        assert payload["config"]["depth"] == 20

    def test_csv_table(self, tmp_path):
        out = tmp_path / "ent.csv"
        code = run_cli(["entropy", "--system", "full2", "--depth", "10",
                        "--format", "csv", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "N,D,s_star,delta"
        assert len(lines) == 3

    def test_deterministic_artifacts(self, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["entropy", "--system", "golden", "--schedule", "2:8,2:12"]
        assert run_cli(argv + ["--out", str(out1)]) == 0
        assert run_cli(argv + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestValidationExits:
    def test_missing_file_is_exit_2(self, tmp_path, capsys):
        code = run_cli(["entropy", "--system", str(tmp_path / "nope.json"),
                        "--depth", "8"])
        assert code == 2
        assert "nope.json" in capsys.readouterr().err

    def test_malformed_json_is_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = run_cli(["entropy", "--system", str(bad), "--depth", "8"])
        assert code == 2
        assert "bad.json" in capsys.readouterr().err

    def test_missing_depth_and_schedule_is_exit_2(self, capsys):
        assert run_cli(["entropy", "--system", "golden"]) == 2

    def test_unknown_subcommand_is_exit_2(self):
        assert run_cli(["frobnicate"]) == 2

    def test_certification_error_is_exit_3(self, monkeypatch, capsys):
        def boom(req):
            raise CertificationError("forced failure")

        monkeypatch.setitem(cli._HANDLERS, "audit",
                            (cli._HANDLERS["audit"][0], boom))
        code = run_cli(["audit", "--suite", "vitali", "--count", "1"])
        assert code == 3


class TestVitaliCommand:
    def test_idempotent_on_own_output(self, tmp_path):
        fam = {"epsilon": 0.5, "balls": [
            {"word": [0, 0, 1, 1], "order": 2},
            {"word": [0, 0, 0, 0], "order": 4},
            {"word": [1, 0, 1], "order": 1}]}
        src = tmp_path / "fam.json"
        src.write_text(json.dumps(fam))
        out1 = tmp_path / "sel1.json"
        assert run_cli(["vitali", "--family", str(src), "--out", str(out1)]) == 0
        first = json.loads(out1.read_text())
        assert first["triples_cover"]
        again = tmp_path / "fam2.json"
        again.write_text(json.dumps(first["selected"]))
        out2 = tmp_path / "sel2.json"
        assert run_cli(["vitali", "--family", str(again), "--out", str(out2)]) == 0
        second = json.loads(out2.read_text())
        assert second["selected"] == first["selected"]


class TestSkewCommand:
    def test_csv_slices_positive_margin(self, tmp_path):
        out = tmp_path / "skew.csv"
        code = run_cli(["skew", "--slices", "2,3,4", "--no-lowers",
                        "--format", "csv", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "j,upper,margin"
        for line in lines[1:]:
            j, upper, margin = line.split(",")
            assert float(margin) > 0


class TestLogisticCommand:
    def test_scan_jobs_matches_serial(self, tmp_path):
        argv = ["logistic", "--op", "scan", "--grid", "3.0:4.0:6",
                "--n-max", "12"]
        out1, out2 = tmp_path / "s1.json", tmp_path / "s2.json"
        assert run_cli(argv + ["--out", str(out1)]) == 0
        assert run_cli(argv + ["--jobs", "3", "--out", str(out2)]) == 0
        p1 = json.loads(out1.read_text())["result"]
        p2 = json.loads(out2.read_text())["result"]
        assert p1["clean"] and p2["clean"]
        for e1, e2 in zip(p1["entries"], p2["entries"]):
            assert e1["a"] == pytest.approx(e2["a"])
            assert e1["h"] == pytest.approx(e2["h"], abs=1e-12)


class TestAuditCommand:
    def test_small_audit_passes(self, tmp_path):
        out = tmp_path / "audit.json"
        code = run_cli(["audit", "--count", "3", "--depth", "6",
                        "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["passed"]

    def test_seed_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ENTRODIM_SEED", "777")
        out = tmp_path / "audit.json"
        assert run_cli(["audit", "--suite", "vitali", "--count", "2",
                        "--out", str(out)]) == 0
        assert json.loads(out.read_text())["config"]["seed"] == 777


class TestFrostmanCommand:
    def test_full_shift(self, tmp_path):
        kset = tmp_path / "set.json"
        kset.write_text(json.dumps(FULL_SET))
        out = tmp_path / "fr.json"
        code = run_cli(["frostman", "--system", "full2", "--set", str(kset),
                        "--gauge", f"exp:{LOG2}", "--n-min", "1",
                        "--depth", "6", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["c"] == pytest.approx(1.0, abs=1e-8)
        assert payload["sandwich"]["holds"]


@pytest.mark.filterwarnings("ignore")
class TestRemoteDispatch:
    def test_base_url_round_trip(self, tmp_path):
        import uvicorn

        from entrodim.service.app import create_app

        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        sock.close()
        config = uvicorn.Config(create_app(), host="127.0.0.1", port=port,
                                log_level="error")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        try:
            deadline = time.time() + 10
            import urllib.request
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(
                            f"http://127.0.0.1:{port}/v1/health", timeout=1):
                        break
                except OSError:
                    time.sleep(0.05)
            else:
                pytest.skip("server did not come up")
            out_local = tmp_path / "local.json"
            out_remote = tmp_path / "remote.json"
            argv = ["entropy", "--system", "golden", "--depth", "12"]
            assert run_cli(argv + ["--out", str(out_local)]) == 0
            assert run_cli(argv + ["--base-url", f"http://127.0.0.1:{port}",
                                   "--out", str(out_remote)]) == 0
            local = json.loads(out_local.read_text())
            remote = json.loads(out_remote.read_text())
            assert remote["estimate"] == pytest.approx(local["estimate"],
                                                       abs=1e-12)
            assert remote["config"] == local["config"]
        finally:
            server.should_exit = True
            thread.join(timeout=5)
