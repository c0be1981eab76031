import csv
import io
import math
from contextlib import redirect_stdout

import pytest

from vatsim.cli import BOUND_COLUMNS, RUN_COLUMNS, main, n_sweep


def run_cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestGen:
    def test_sequential_file(self, tmp_path):
        out = tmp_path / "s.trace"
        assert main(["gen", "--workload", "Sequential", "--n-min", "16",
                     "--trace-out", str(out)]) == 0
        head, body = out.read_text().split("\n\n")
        assert len(head.splitlines()) == 6 and len(body.split()) == 16

    def test_deterministic(self, tmp_path):
        for d in ("a", "b"):
            assert main(["gen", "--workload", "Permute", "--n-min", "100", "--n-max", "300",
                         "--n-ratio", "1.4", "--seed", "1", "--seed", "2",
                         "--out", str(tmp_path / d), "--binary"]) == 0
        a = sorted((tmp_path / "a").iterdir())
        b = sorted((tmp_path / "b").iterdir())
        assert len(a) == 8 and [p.read_bytes() for p in a] == [p.read_bytes() for p in b]

    def test_non_square_matrix(self, tmp_path):
        code = main(["gen", "--workload", "MatrixTransposeRowMajor", "--n-min", "15",
                     "--out", str(tmp_path)])
        assert code == 2

    def test_usage_errors(self):
        assert main(["gen"]) == 2
        assert main(["frobnicate"]) == 2
        assert main(["run", "--workload", "Nope", "--n-min", "4"]) == 2


class TestRun:
    def test_single_row(self):
        code, out = run_cli("run", "--workload", "Sequential", "--n-min", "64")
        r = rows(out)
        assert code == 0 and len(r) == 1 and list(r[0]) == RUN_COLUMNS
        assert r[0]["vat_cost"] == r[0]["total_faults"]

    def test_sweep_rows_sorted(self):
        code, out = run_cli("run", "--workload", "RandomScan", "--n-min", "1000",
                            "--n-max", "2000", "--n-ratio", "1.4",
                            "--policy", "MIN", "--policy", "LRU")
        r = rows(out)
        assert code == 0 and len(r) == 6
        keys = [(x["workload"], int(x["n"]), x["policy"], int(x["seed"])) for x in r]
        assert keys == sorted(keys)

    def test_random_scan_rate_grows_by_one_over_k(self):
        code, out = run_cli("run", "--workload", "RandomScan", "--n-min", "8192",
                            "--n-max", "65536", "--n-ratio", "2", "--W", "64")
        rates = [float(x["normalized_rate"]) for x in rows(out)]
        steps = [b - a for a, b in zip(rates, rates[1:])]
        assert all(0.8 <= s <= 1.3 for s in steps)

    def test_em_column(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["run", "--workload", "Jumping", "--stride", "8", "--n-min", "256",
                     "--em", "--out", str(out)]) == 0
        assert rows(out.read_text())[0]["em_block_faults"] == "256"

    def test_isp_policy_small_cache(self):
        code, _ = run_cli("run", "--workload", "Sequential", "--n-min", "4096",
                          "--policy", "ISLRU", "--W", "4")
        assert code == 2

    def test_explicit_depth_too_small(self):
        code, _ = run_cli("run", "--workload", "Sequential", "--n-min", "4096", "--d", "3")
        assert code == 2

    def test_replay_trace_file(self, tmp_path):
        p = tmp_path / "t.trace"
        main(["gen", "--workload", "Heapify", "--n-min", "500", "--trace-out", str(p)])
        _, from_file = run_cli("run", "--trace-in", str(p))
        _, direct = run_cli("run", "--workload", "Heapify", "--n-min", "500")
        assert from_file == direct


class TestBounds:
    def test_rows_align_with_run(self):
        args = ["--workload", "RandomScan", "--n-min", "512", "--n-max", "4096",
                "--n-ratio", "2", "--policy", "LRU", "--policy", "ISLRU", "--seed", "3"]
        _, run_out = run_cli("run", *args)
        _, bound_out = run_cli("bounds", *args)
        key = ("workload", "n", "k", "p", "d", "W", "tau", "policy", "seed")
        a, b = rows(run_out), rows(bound_out)
        assert [[r[c] for c in key] for r in a] == [[r[c] for c in key] for r in b]
        assert list(b[0]) == BOUND_COLUMNS

    def test_random_scan_band_and_clamp(self):
        _, out = run_cli("bounds", "--workload", "RandomScan", "--n-min", "256",
                         "--n-max", "8192", "--n-ratio", "32", "--W", "64")
        small, large = rows(out)
        assert small["clamped"] == "true" and float(small["lower_bound"]) == 0
        assert large["clamped"] == "false"
        assert float(large["lower_bound"]) == 8192 * math.log2(8192 / 512)
        assert large["bound_name"] == "random_scan"

    def test_sequential_upper_exact(self):
        _, out = run_cli("bounds", "--workload", "Sequential", "--n-min", "1000")
        r = rows(out)[0]
        assert r["bound_name"] == "seq_bound" and r["lower_bound"] == ""
        d = int(r["d"])
        expect = 2 * d + sum(math.ceil(1000 / (8 * 2 ** i)) for i in range(d + 1))
        assert float(r["upper_bound"]) == expect


class TestVerify:
    def test_small_suite_passes(self):
        code, out = run_cli("verify", "--traces", "5", "--length", "300")
        assert code == 0 and "FAIL" not in out and out.count("PASS") == 8

    def test_isp_with_small_cache(self):
        code, _ = run_cli("verify", "--W", "4", "--policy", "ISLRU", "--traces", "1")
        assert code == 2

    def test_tampered_trace(self, tmp_path):
        p = tmp_path / "t.bin"
        main(["gen", "--workload", "Sequential", "--n-min", "16", "--binary",
              "--trace-out", str(p)])
        data = bytearray(p.read_bytes())
        data[0:8] = b"VATTRCXX"
        p.write_bytes(bytes(data))
        code, _ = run_cli("verify", "--trace-in", str(p))
        assert code == 3

    def test_verify_trace_file(self, tmp_path):
        p = tmp_path / "t.trace"
        main(["gen", "--workload", "RandomScan", "--n-min", "200", "--trace-out", str(p)])
        code, out = run_cli("verify", "--trace-in", str(p))
        assert code == 0 and out.count("PASS") == 4


def test_n_sweep():
    assert n_sweep(100, 300, 1.4) == [100, 140, 196, 274]
    assert n_sweep(5, None, 1.4) == [5]
