import json
import subprocess
import sys

import numpy as np

from mdspir import bench, cli, harness, wire
from mdspir.plan import derive_parameters


def run_cli(*args):
    return cli.main([str(a) for a in args])


def test_run_inprocess_and_sockets_agree(tmp_path):
    outs = []
    for mode in harness.MODES:
        out = tmp_path / f"{mode}.json"
        r = harness.run(harness.RunConfig(5, 3, 3, 2, seed=7, mode=mode, out=out))
        assert r.ok and [t.download for t in r.transcripts] == [49, 49, 49]
        outs.append(harness.read_transcripts(out))
    assert outs[0] == outs[1]


def test_records_file(tmp_path):
    P = derive_parameters(3, 2, 2, 2)
    W = np.array([[1, 0, 1], [0, 1, 1]])
    path = tmp_path / "rec.txt"
    path.write_text(wire.format_records(W, 2))
    out = tmp_path / "t.json"
    assert run_cli("run", "--n", 3, "--t", 2, "--m", 2, "--q", 2, "--records", path, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["ok"] and all(sum(len(a) for a in t["answers"]) == P.D == 5 for t in doc["transcripts"])
    assert [t["retrieved"] for t in doc["transcripts"]] == W.tolist()
    path.write_text(wire.format_records(np.zeros((2, 4), dtype=int), 2))
    assert run_cli("run", "--n", 3, "--t", 2, "--m", 2, "--q", 2, "--records", path) == 2


def test_corrupt_hook_fails(capsys):
    assert run_cli("run", "--n", 5, "--t", 3, "--m", 3, "--q", 2, "--seed", 7, "--corrupt", "2:0") == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_plan_command(capsys, tmp_path):
    out = tmp_path / "plan.txt"
    assert run_cli("plan", "--n", 5, "--t", 3, "--m", 3, "--q", 2, "--out", out) == 0
    text = capsys.readouterr().out
    assert "L = 25" in text and "D = 49" in text and out.read_text() == text
    assert run_cli("plan", "--n", 4, "--t", 2, "--m", 3, "--q", 2) == 2
    assert "smallest admissible q is 3" in capsys.readouterr().err
    assert run_cli("plan", "--n", 3, "--t", 3, "--m", 2) == 2
    run_cli("plan", "--n", 4, "--t", 2, "--m", 3)
    assert "least prime power 4" in capsys.readouterr().out


def test_verify_code_command(data_dir, capsys, tmp_path):
    assert run_cli("verify-code", "--matrix", data_dir / "g2_5_3_2.txt", "--quota", "2,2,2,0,0") == 0
    assert run_cli("verify-code", "--matrix", data_dir / "g1_5_3_3.txt", "--quota", "1,1,1,3,3") == 1
    out = capsys.readouterr().out
    assert "MDS: FAIL on 4 of 10 subsets: {0,1,2} {0,2,3} {0,2,4} {1,2,4}" in out
    assert "recovery: pass for quota (1, 1, 1, 3, 3): columns [0, 3, 6, 9, 10, 11, 12, 13, 14]" in out
    assert run_cli("verify-code", "--n", 5, "--t", 3, "--ell", 2, "--q", 2) == 0
    assert "all 45" in capsys.readouterr().out
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2 1 2\n1 1 0\n0 0 1\n")
    assert run_cli("verify-code", "--matrix", bad) == 1
    assert "{0,1}" in capsys.readouterr().out
    assert run_cli("verify-code", "--n", 5, "--t", 3) == 2


def test_audit_command(capsys, tmp_path):
    out = tmp_path / "a.json"
    assert run_cli("audit-privacy", "--n", 3, "--t", 2, "--m", 2, "--q", 2, "--mode", "exhaustive",
                   "--subset", "0,1", "--out", out) == 0
    assert json.loads(out.read_text())["passed"]
    assert run_cli("audit-privacy", "--n", 5, "--t", 3, "--m", 3, "--q", 2, "--mode", "exhaustive") == 2
    assert run_cli("audit-privacy", "--n", 3, "--t", 2, "--m", 2, "--subset", "0,5") == 2
    assert run_cli("audit-privacy", "--n", 3, "--t", 2, "--m", 2, "--samples", 500) == 0


def test_bench_command_and_determinism(capsys):
    a = bench.run_bench(5, 3, 3, 2, seed=1, repeat=2)
    b = bench.run_bench(5, 3, 3, 2, seed=1, repeat=1)
    assert a.ok and a.ops == b.ops and a.ops["downloaded_symbols"] == 49
    assert run_cli("bench", "--n", 5, "--t", 3, "--m", 3, "--q", 2, "--repeat", 1, "--backend", "all") == 0
    out = capsys.readouterr().out
    assert all(ph in out for ph in bench.PHASES)


def test_backends_agree_end_to_end():
    reps = bench.compare_backends(5, 3, 3, 2, repeat=1)
    assert all(r.ok for r in reps)
    assert len({tuple(sorted(r.ops.items())) for r in reps}) == 1


def test_console_entry_point():
    p = subprocess.run([sys.executable, "-m", "mdspir.cli", "plan", "--n", "3", "--t", "2", "--m", "2"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "D = 5" in p.stdout


def test_quota_helpers():
    assert cli._count_quotas(5, 3, 2) == len(list(cli._all_quotas(5, 3, 2))) == 45
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = cli.random_quota(6, 4, 3, rng)
        assert sum(m) == 12 and max(m) <= 3
