"""End-to-end checks of the bcac command-line tool.

Usage: cli_test.py /path/to/bcac
"""

import json
import os
import random
import subprocess
import sys
import tempfile
import unittest

BIN = None


def run(*args, check=True, stdin=None):
    proc = subprocess.run([BIN, *map(str, args)], capture_output=True, input=stdin)
    if check and proc.returncode != 0:
        raise AssertionError(
            f"{args} exited {proc.returncode}: {proc.stderr.decode(errors='replace')}"
        )
    return proc


def run_json(*args):
    return json.loads(run(*args, "--json").stdout)


class CliTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.dir, name)

    def write(self, name, data):
        mode = "wb" if isinstance(data, bytes) else "w"
        with open(self.path(name), mode) as fh:
            fh.write(data)
        return self.path(name)

    def test_keygen_is_deterministic(self):
        a = run_json("keygen", "--seed", 0, "--m", 12)
        b = run_json("keygen", "--seed", 0, "--m", 12)
        self.assertEqual(a, b)
        self.assertEqual(a["key"], "882148618614")
        self.assertEqual(a["line"], "CACKEY v1 M=12 tail=1 key=882148618614")
        self.assertNotEqual(run_json("keygen", "--seed", 1, "--m", 12)["key"], a["key"])
        rbac = run_json("keygen", "--seed", 3, "--m", 40, "--modes", "1,5")
        self.assertTrue(set(rbac["key"]) <= {"1", "5"})
        self.assertEqual(rbac["pool"]["total"], str(2**40))
        run("keygen", "--seed", 0, "--m", 3, "--out", self.path("k.key"))
        with open(self.path("k.key")) as fh:
            self.assertEqual(fh.read(), "CACKEY v1 M=3 tail=1 key=882\n")

    def test_worked_example_decodes_under_pool_key(self):
        src = self.write("msg.txt", "001")
        summary = run_json("encode", "--in", src, "--text-bits", "--p", "0.5", "--key", "136",
                           "--exact", "--out", self.path("cw"))
        self.assertEqual(summary["payload_bits"], 4)
        self.assertEqual(summary["length_bound"], [3, 4])
        self.assertEqual(summary["pool"]["valid"], "8")
        with open(self.path("cw"), "rb") as fh:
            raw = fh.read()
        self.assertEqual(raw[:4], b"CAC1")
        self.assertEqual(len(raw), 28)
        for key in ("136", "245"):
            out = run("decode", "--in", self.path("cw"), "--key", key, "--exact", "--text-bits")
            self.assertEqual(out.stdout.decode().strip(), "001")

    def test_pool_listing(self):
        out = run("pool", "--key", "136", "--bits", "001", "--enumerate").stdout.decode().split("\n")
        keys = [line for line in out if line and not line.startswith("pool")]
        self.assertEqual(keys, ["135", "136", "145", "146", "235", "236", "245", "246"])
        j = run_json("pool", "--key", "136", "--bits", "001", "--enumerate")
        self.assertEqual(j["pairs"], [[1, 2], [3, 4], [6, 5]])
        self.assertEqual(j["pool"]["total"], "512")

    def test_empty_file_gives_header_only_stream(self):
        src = self.write("empty", b"")
        run("encode", "--in", src, "--out", self.path("cw"))
        self.assertEqual(os.path.getsize(self.path("cw")), 27)
        run("decode", "--in", self.path("cw"), "--key", "-", "--out", self.path("back"))
        self.assertEqual(os.path.getsize(self.path("back")), 0)

    def test_binary_roundtrip_with_generated_key(self):
        rng = random.Random(4)
        data = bytes(rng.getrandbits(8) & rng.getrandbits(8) for _ in range(3000))
        src = self.write("data.bin", data)
        for coder in (["--precision", "32"], ["--precision", "16"], ["--exact"]):
            run("encode", "--in", src, "--m", 64, "--seed", 7, "--key-out", self.path("k"),
                "--out", self.path("cw"), *coder)
            run("decode", "--in", self.path("cw"), "--key", self.path("k"),
                "--out", self.path("back"), *coder)
            with open(self.path("back"), "rb") as fh:
                self.assertEqual(fh.read(), data)

    def test_auto_probability_on_skewed_corpus(self):
        rng = random.Random(9)
        bits = ["0"] * 90000 + ["1"] * 10000
        rng.shuffle(bits)
        src = self.write("corpus.txt", "".join(bits))
        j = run_json("encode", "--in", src, "--text-bits", "--p", "auto", "--out", self.path("cw"))
        self.assertEqual(j["p_num"], 58982)
        rate = j["payload_bits"] / 100000
        self.assertGreaterEqual(rate, 0.4690)
        self.assertLessEqual(rate, 0.4790)

    def test_wrong_key_decodes_differently(self):
        src = self.write("m.txt", "0110100111010010" * 4)
        run("encode", "--in", src, "--text-bits", "--p-num", 30000, "--key", "12345678",
            "--out", self.path("cw"))
        good = run("decode", "--in", self.path("cw"), "--key", "12345678", "--text-bits")
        self.assertEqual(good.stdout.decode().strip(), "0110100111010010" * 4)
        bad = run("decode", "--in", self.path("cw"), "--key", "87654321", "--text-bits",
                  check=False)
        if bad.returncode == 0:
            self.assertNotEqual(bad.stdout.decode().strip(), "0110100111010010" * 4)
        else:
            self.assertEqual(bad.returncode, 2)

    def test_exit_codes(self):
        src = self.write("m.txt", "0101")
        run("encode", "--in", src, "--text-bits", "--p", "0.5", "--key", "12",
            "--out", self.path("cw"))
        # key of the wrong length
        self.assertEqual(run("decode", "--in", self.path("cw"), "--key", "1", check=False).returncode, 3)
        self.assertEqual(run("decode", "--in", self.path("cw"), "--key", "19", check=False).returncode, 3)
        # corrupted container
        with open(self.path("cw"), "rb") as fh:
            raw = bytearray(fh.read())
        raw[0] ^= 0xFF
        bad = self.write("bad", bytes(raw))
        self.assertEqual(run("decode", "--in", bad, "--key", "12", check=False).returncode, 2)
        self.assertEqual(
            run("encode", "--in", self.write("x.txt", "01a"), "--text-bits", check=False).returncode, 2)
        # capacity
        key17 = "1" * 17
        self.assertEqual(run("pool", "--key", key17, "--bits", "0" * 17, "--enumerate",
                             check=False).returncode, 4)
        self.assertEqual(run("sim", "--users", 9, "--m", 3, "--n", 10, check=False).returncode, 4)
        # usage
        self.assertEqual(run("encode", check=False).returncode, 1)
        self.assertEqual(run("keygen", "--seed", "x", "--m", 1, check=False).returncode, 1)

    def test_sim_report_schema(self):
        j = run_json("sim", "--users", 8, "--m", 3, "--n", 200, "--seed", 5)
        for field in ("users", "n", "m", "p_num", "coder", "scheme", "payload_bits",
                      "ciphertext_sha256", "single_ciphertext", "successes", "per_user",
                      "key_payload_bits_per_user", "wrap_overhead_bytes", "total_key_bits",
                      "raw_key_on_wire", "pool", "non_pool_probes", "brute_force"):
            self.assertIn(field, j)
        self.assertEqual(j["successes"], 8)
        self.assertTrue(j["single_ciphertext"])
        self.assertEqual(j["key_payload_bits_per_user"], 9)
        self.assertEqual(len({u["key"] for u in j["per_user"]}), 8)
        self.assertTrue(j["brute_force"]["contains_pool"])
        self.assertEqual(j["scheme"], "SEALBOX")
        again = run_json("sim", "--users", 8, "--m", 3, "--n", 200, "--seed", 5)
        self.assertEqual(again["ciphertext_sha256"], j["ciphertext_sha256"])
        null = run_json("sim", "--users", 2, "--m", 8, "--n", 64, "--scheme", "NULL-TEST")
        self.assertTrue(null["raw_key_on_wire"])
        collude = run_json("sim", "--users", 4, "--m", 8, "--n", 64, "--collude-k", 2)
        self.assertEqual(collude["trace"]["mix"]["misattributed"], 0)

    def test_trace_experiment_and_ledger_attribution(self):
        s = run_json("trace", "--users", 4, "--m", 8, "--n", 64, "--collude-k", 2, "--seed", 3)
        self.assertEqual(s["leak_attributed_correctly"], 100)
        self.assertEqual(s["mix"]["misattributed"], 0)
        self.assertEqual(s["non_pool"]["unknown"], s["non_pool"]["trials"])

        ledger = self.path("ledger.jsonl")
        issued = {}
        for user in ("alice", "bob"):
            j = run_json("issue", "--key", "136", "--bits", "001", "--user", user,
                         "--ledger", ledger, "--session", "s1", "--seed", 11,
                         "--scheme", "SEALBOX", "--blob-out", self.path(user + ".blob"))
            issued[user] = j["key"]
            self.assertTrue(j["new"])
        self.assertNotEqual(issued["alice"], issued["bob"])
        repeat = run_json("issue", "--key", "136", "--bits", "001", "--user", "alice",
                          "--ledger", ledger, "--session", "s1", "--seed", 11)
        self.assertEqual(repeat["key"], issued["alice"])
        self.assertFalse(repeat["new"])
        with open(ledger) as fh:
            rows = [json.loads(line) for line in fh]
        self.assertEqual([r["user"] for r in rows], ["alice", "bob"])
        self.assertEqual(list(rows[0].keys()), ["session", "user", "key", "issued_at"])

        def verdict(leaked):
            return run_json("trace", "--leaked", leaked, "--ledger", ledger, "--session", "s1",
                            "--key", "136", "--bits", "001")

        self.assertEqual(verdict(issued["bob"]), {"verdict": "attributed", "user": "bob"})
        self.assertEqual(verdict("333")["verdict"], "unknown")
        others = {"135", "136", "145", "146", "235", "236", "245", "246"} - set(issued.values())
        self.assertEqual(verdict(sorted(others)[0])["verdict"], "collusion-suspected")


if __name__ == "__main__":
    BIN = os.path.abspath(sys.argv.pop(1))
    unittest.main(verbosity=2)
