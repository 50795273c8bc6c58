import json

import pytest

from texnoise.cli import main, parse_classifier, parse_descriptor
from texnoise.classifiers import KnnConfig, LogRegConfig, MlpConfig
from texnoise.descriptors import LbpParams, LdpParams
from texnoise.featurestore import read_records


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def last_json(text):
    return json.loads(text.strip().splitlines()[-1])


@pytest.fixture
def corpus(tmp_path, capsys):
    root = tmp_path / "corpus"
    code, out, _ = run_cli(
        capsys, "synth", str(root), "--classes", "3", "--images", "6",
        "--size", "24", "--seed", "3",
    )
    assert code == 0
    assert last_json(out)["images"] == 18
    return root


class TestParsers:
    def test_descriptor_specs(self):
        assert parse_descriptor("lbp:1,8") == LbpParams(1, 8)
        assert parse_descriptor("lbp:2,16") == LbpParams(2, 16)
        assert parse_descriptor("ldp:5") == LdpParams(5)
        for bad in ("lbp:1", "ldp:x", "hog:9", "lbp"):
            with pytest.raises(ValueError):
                parse_descriptor(bad)

    def test_classifier_specs(self):
        assert parse_classifier("knn") == KnnConfig()
        assert parse_classifier("knn:k=3") == KnnConfig(3)
        assert parse_classifier("logreg:l2=0.5,max_iters=10") == LogRegConfig(
            l2=0.5, max_iters=10
        )
        assert parse_classifier("mlp:seed=7") == MlpConfig(seed=7)
        for bad in ("svm", "knn:neighbors=3", "knn:k"):
            with pytest.raises(ValueError):
                parse_classifier(bad)


class TestCommands:
    def test_ingest(self, corpus, capsys):
        code, out, _ = run_cli(capsys, "ingest", str(corpus), "--resolution", "24x24")
        assert code == 0
        info = last_json(out)
        assert info["subjects"] == 3 and info["images"] == 18

    def test_ingest_failure_is_machine_readable(self, tmp_path, capsys):
        code, out, err = run_cli(capsys, "ingest", str(tmp_path / "missing"))
        assert code == 1
        payload = json.loads(err.strip().splitlines()[-1])
        assert payload["error"] == "DatasetError"
        assert "not a directory" in payload["message"]

    def test_noise_emit(self, corpus, tmp_path, capsys):
        out_dir = tmp_path / "noisy"
        code, out, _ = run_cli(
            capsys, "noise", str(corpus), "--level", "0.007", "--seed", "5",
            "--emit", str(out_dir), "--resolution", "24x24",
        )
        assert code == 0
        assert last_json(out)["emitted"] == 18
        assert len(list(out_dir.rglob("*.pgm"))) == 18

    def test_extract_then_eval(self, corpus, tmp_path, capsys):
        features = tmp_path / "feat" / "features.csv"
        code, out, _ = run_cli(
            capsys, "extract", str(corpus), "--descriptor", "ldp:3",
            "--out", str(features), "--resolution", "24x24",
        )
        assert code == 0
        info = last_json(out)
        assert info["dimension"] == 56 and info["count"] == 18
        header, records = read_records(features)
        assert header.descriptor_id == "ldp_k3"
        assert (features.parent / "labels.map").read_text().splitlines()[0] == "0,class_00"

        code, out, _ = run_cli(
            capsys, "eval", "--features", str(features),
            "--classifier", "logreg", "--seed", "2",
        )
        assert code == 0
        result = last_json(out)
        assert result["train_size"] == 15 and result["test_size"] == 3
        assert 0.0 <= result["accuracy_pct"] <= 100.0

    def test_bench_and_report(self, corpus, tmp_path, capsys):
        plan_path = tmp_path / "plan.json"
        plan_path.write_text(
            json.dumps(
                {
                    "noise_levels": [0.0, 0.007],
                    "descriptors": [{"kind": "ldp", "k": 3}],
                    "classifiers": [{"kind": "knn", "k": 3}, {"kind": "gnb"}],
                    "master_seed": 6,
                    "resolution": [24, 24],
                }
            )
        )
        out_dir = tmp_path / "run"
        code, out, _ = run_cli(
            capsys, "bench", str(corpus), "--plan", str(plan_path),
            "--out", str(out_dir),
        )
        assert code == 0
        assert (out_dir / "results.csv").exists()
        first = (out_dir / "results.csv").read_bytes()

        # Re-running from the emitted run.json reproduces results byte-for-byte.
        out_dir2 = tmp_path / "run2"
        code, _, _ = run_cli(
            capsys, "bench", str(corpus), "--plan", str(out_dir / "run.json"),
            "--out", str(out_dir2),
        )
        assert code == 0
        assert (out_dir2 / "results.csv").read_bytes() == first

        (out_dir / "tables.md").unlink()
        code, _, _ = run_cli(capsys, "report", "--in", str(out_dir))
        assert code == 0
        assert (out_dir / "tables.md").exists()

    def test_bench_default_plan_smoke(self, corpus, tmp_path, capsys):
        # Default plan on a tiny corpus, trimmed to one level via plan file.
        plan_path = tmp_path / "plan.json"
        plan_path.write_text(
            json.dumps({"noise_levels": [0.0], "resolution": [24, 24],
                        "classifiers": [{"kind": "knn"}],
                        "master_seed": 2})
        )
        code, out, _ = run_cli(
            capsys, "bench", str(corpus), "--plan", str(plan_path),
            "--out", str(tmp_path / "r"),
        )
        assert code == 0
        lines = (tmp_path / "r" / "results.csv").read_text().splitlines()
        assert len(lines) == 1 + 4  # four default descriptors x one classifier
