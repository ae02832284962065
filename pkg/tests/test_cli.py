import json

import pytest

from skbench.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture
def tiny_args(tmp_path):
    config = {
        "sizes": [6, 7, 8],
        "instances_per_size": 3,
        "samples_per_instance": 10,
        "methods": ["BF", "RS", "MH"],
        "master_seed": 11,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    return tmp_path, config_path


class TestGenerate:
    def test_writes_expected_files(self, tiny_args):
        tmp_path, config_path = tiny_args
        out = tmp_path / "run"
        assert run_cli("--config", str(config_path), "--out-dir", str(out), "generate") == EXIT_OK
        files = sorted((out / "instances").glob("*.json"))
        assert len(files) == 9

    def test_idempotent(self, tiny_args):
        tmp_path, config_path = tiny_args
        out = tmp_path / "run"
        run_cli("--config", str(config_path), "--out-dir", str(out), "generate")
        payloads = {p.name: p.read_bytes() for p in (out / "instances").glob("*.json")}
        assert run_cli("--config", str(config_path), "--out-dir", str(out), "generate") == EXIT_OK
        for p in (out / "instances").glob("*.json"):
            assert p.read_bytes() == payloads[p.name]

    def test_conflicting_file_needs_force(self, tiny_args):
        tmp_path, config_path = tiny_args
        out = tmp_path / "run"
        run_cli("--config", str(config_path), "--out-dir", str(out), "generate")
        victim = next((out / "instances").glob("*.json"))
        victim.write_text('{"n": 2, "seed": 0, "couplings": [1]}\n')
        assert run_cli("--config", str(config_path), "--out-dir", str(out), "generate") == EXIT_IO
        assert (
            run_cli("--config", str(config_path), "--out-dir", str(out), "--force", "generate")
            == EXIT_OK
        )

    def test_coupling_count_at_n13(self, tmp_path):
        out = tmp_path / "r13"
        assert (
            run_cli("--sizes", "13", "--seed", "3", "--out-dir", str(out), "generate") == EXIT_OK
        )
        sample = json.loads(next((out / "instances").glob("*.json")).read_text())
        assert len(sample["couplings"]) == 13 * 12 // 2 == 78


class TestBench:
    def test_requires_instances(self, tiny_args):
        tmp_path, config_path = tiny_args
        out = tmp_path / "nothing"
        assert run_cli("--config", str(config_path), "--out-dir", str(out), "bench") == EXIT_IO

    def test_full_flow_and_resume(self, tiny_args):
        tmp_path, config_path = tiny_args
        out = tmp_path / "run"
        base = ["--config", str(config_path), "--out-dir", str(out), "--jobs", "1"]
        assert run_cli(*base, "generate") == EXIT_OK
        assert run_cli(*base, "bench") == EXIT_OK
        first = (out / "records.csv").read_bytes()
        assert run_cli(*base, "bench") == EXIT_OK  # resume: manifest makes it a no-op
        assert (out / "records.csv").read_bytes() == first
        rows = first.decode().strip().splitlines()
        assert rows[0] == "method,n,instance,T,e_gs,e_avg,status"
        assert len(rows) == 1 + 3 * 3 * 3

    def test_fit_estimate_report(self, tiny_args):
        tmp_path, config_path = tiny_args
        out = tmp_path / "run"
        base = ["--config", str(config_path), "--out-dir", str(out), "--jobs", "1"]
        run_cli(*base, "generate")
        run_cli(*base, "bench")
        assert run_cli(*base, "fit") == EXIT_OK
        fits = json.loads((out / "fits.json").read_text())
        assert {f["method"] for f in fits} == {"BF", "RS", "MH"}
        for f in fits:
            assert f["b"] > 0
            assert f["n_range"] == [6, 8]

        assert run_cli(*base, "estimate") == EXIT_OK
        lines = (out / "estimates.csv").read_text().strip().splitlines()
        assert lines[0] == "method,n,days,galactic_years"
        assert len(lines) == 1 + 3 * 2  # methods x {64, 128}

        assert run_cli(*base, "report", "--ratio-max-n", "9") == EXIT_OK
        report = out / "report"
        for method in ("BF", "RS", "MH"):
            assert (report / f"series_{method}.csv").exists()
        ratio_lines = (report / "ratio_gap.csv").read_text().strip().splitlines()
        assert len(ratio_lines) == 1 + 4  # n = 6..9
        assert (report / "fits.json").exists()
        assert (report / "estimates.csv").exists()

    def test_fit_refused_below_three_sizes(self, tmp_path):
        out = tmp_path / "small"
        args = [
            "--sizes", "6,7", "--methods", "BF", "--seed", "5",
            "--out-dir", str(out), "--jobs", "1",
        ]
        run_cli(*args, "generate")
        run_cli(*args, "bench")
        assert run_cli(*args, "fit") == EXIT_CONFIG


class TestConfigHandling:
    def test_bad_alpha_rejected(self, tmp_path):
        config_path = tmp_path / "bad.json"
        config_path.write_text(json.dumps({"alpha": 1.5}))
        assert run_cli("--config", str(config_path), "generate") == EXIT_CONFIG

    def test_unknown_key_rejected(self, tmp_path):
        config_path = tmp_path / "bad.json"
        config_path.write_text(json.dumps({"alhpa": 0.9}))
        assert run_cli("--config", str(config_path), "generate") == EXIT_CONFIG

    def test_unknown_method_rejected(self, tmp_path):
        assert run_cli("--methods", "BF,NOPE", "--out-dir", str(tmp_path), "generate") == EXIT_CONFIG

    def test_flags_override_config(self, tmp_path):
        config_path = tmp_path / "c.json"
        config_path.write_text(json.dumps({"sizes": [9], "instances_per_size": 2}))
        out = tmp_path / "o"
        assert (
            run_cli("--config", str(config_path), "--sizes", "6", "--out-dir", str(out), "generate")
            == EXIT_OK
        )
        files = list((out / "instances").glob("*.json"))
        assert len(files) == 2
        assert all("n06" in f.name for f in files)
