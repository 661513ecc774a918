import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from homoscope.cli import main
from homoscope.graph import write_features

TINY = Path(__file__).parent / "data" / "tiny"
GOLDEN = json.loads((TINY / "golden_metrics.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def tiny_args(features=True):
    args = ["--edges", TINY / "edges.txt", "--labels", TINY / "labels.txt"]
    if features:
        args += ["--features", TINY / "features.csv"]
    return args


@pytest.fixture
def sweep_config(tmp_path):
    def write(**extra):
        cfg = {"mu0": [-1, 0], "mu1": [0, 1], "sigma0_sq": 1, "sigma1_sq": 2, "d0": 5, "d1": 5}
        cfg.update(extra)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        return path
    return write


class TestMetrics:
    def test_golden_report(self, capsys):
        code, out, _ = run(capsys, "metrics", *tiny_args())
        assert code == 0
        got = json.loads(out)
        assert set(got) == set(GOLDEN)
        for key, val in GOLDEN.items():
            assert got[key] == pytest.approx(val, abs=1e-12), key

    def test_without_features(self, capsys):
        code, out, _ = run(capsys, "metrics", *tiny_args(features=False))
        assert code == 0
        assert "h_ge" not in json.loads(out)

    def test_csv_output(self, capsys, tmp_path):
        out_path = tmp_path / "m.csv"
        code, _, _ = run(capsys, "--csv", "metrics", *tiny_args(), "--out", out_path)
        assert code == 0
        rows = list(csv.reader(out_path.open()))
        assert rows[0][0] == "h_edge"
        assert float(rows[1][0]) == pytest.approx(GOLDEN["h_edge"])

    def test_edgeless(self, capsys, tmp_path):
        (tmp_path / "e.txt").write_text("# nothing\n")
        (tmp_path / "l.txt").write_text("0\n1\n")
        code, _, err = run(capsys, "metrics", "--edges", tmp_path / "e.txt",
                           "--labels", tmp_path / "l.txt")
        assert code == 3
        assert "h_edge" in err

    def test_parse_error(self, capsys, tmp_path):
        (tmp_path / "e.txt").write_text("0 1\n1 x\n")
        (tmp_path / "l.txt").write_text("0\n1\n")
        code, _, err = run(capsys, "metrics", "--edges", tmp_path / "e.txt",
                           "--labels", tmp_path / "l.txt")
        assert code == 2
        assert ":2" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "metrics", "--edges", tmp_path / "nope.txt",
                         "--labels", TINY / "labels.txt")
        assert code == 2

    def test_no_subcommand(self, capsys):
        assert main([]) == 2


class TestSweep:
    def test_bell_shaped_lp(self, capsys, sweep_config):
        code, out, _ = run(capsys, "sweep", "--config", sweep_config())
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        lp = np.array([float(r["lp_pbe"]) for r in rows])
        assert 0 < int(np.argmax(lp)) < len(lp) - 1
        assert {"regime", "h", "hp_nshd"} <= set(rows[0])

    def test_two_point_grid(self, capsys, sweep_config):
        code, out, _ = run(capsys, "sweep", "--config", sweep_config(h_grid=[0, 1]),
                           "--measures", "pbe")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [float(r["h"]) for r in rows] == [0.0, 1.0]

    def test_json_output(self, capsys, sweep_config):
        code, out, _ = run(capsys, "sweep", "--config", sweep_config(h_grid=[0, 0.5, 1]),
                           "--json")
        assert code == 0
        assert len(json.loads(out)["h"]) == 3

    def test_malformed_json(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(capsys, "sweep", "--config", bad)[0] == 2

    def test_unknown_measure(self, capsys, sweep_config):
        assert run(capsys, "sweep", "--config", sweep_config(), "--measures", "foo")[0] == 2


@pytest.fixture(scope="module")
def homophilous(tmp_path_factory):
    out = tmp_path_factory.mktemp("h09")
    assert main(["gen", "homophily", "--target-h", "0.9", "--out-dir", str(out)]) == 0
    return out


class TestCpm:
    def _args(self, d):
        return ["cpm", "--edges", d / "edges.txt", "--labels", d / "labels.txt",
                "--features", d / "features.csv"]

    def test_homophilous_graph(self, capsys, homophilous):
        code, out, _ = run(capsys, *self._args(homophilous), "--classifier", "gnb",
                           "--repeats", 30)
        assert code == 0
        assert json.loads(out)["score"] >= 0.95

    def test_deterministic(self, capsys, homophilous, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path, threads in ((a, 1), (b, 3)):
            assert run(capsys, *self._args(homophilous), "--samples", 100, "--repeats", 5,
                       "--seed", 3, "--threads", threads, "--out", path)[0] == 0
        assert a.read_text() == b.read_text()

    def test_unknown_classifier(self, capsys, homophilous):
        code, _, err = run(capsys, *self._args(homophilous), "--classifier", "svm")
        assert code == 2
        assert "usage" in err

    def test_singular_is_numeric_failure(self, capsys, tmp_path):
        (tmp_path / "e.txt").write_text("".join(f"{i} {(i + 1) % 8}\n" for i in range(8)))
        (tmp_path / "l.txt").write_text("0\n1\n" * 4)
        write_features(tmp_path / "f.csv", np.ones((8, 2)))
        code = run(capsys, "cpm", "--edges", tmp_path / "e.txt", "--labels", tmp_path / "l.txt",
                   "--features", tmp_path / "f.csv", "--samples", 8, "--repeats", 2,
                   "--ridge", 0)[0]
        assert code == 4

    def test_isolated_node(self, capsys, tmp_path):
        (tmp_path / "e.txt").write_text("0 1\n1 2\n")
        (tmp_path / "l.txt").write_text("0\n1\n0\n1\n")
        write_features(tmp_path / "f.csv", np.eye(4))
        code = run(capsys, "cpm", "--edges", tmp_path / "e.txt", "--labels", tmp_path / "l.txt",
                   "--features", tmp_path / "f.csv", "--samples", 4, "--repeats", 2)[0]
        assert code == 3


class TestGen:
    def test_homophily_manifest(self, capsys, tmp_path):
        out = tmp_path / "g"
        assert run(capsys, "gen", "homophily", "--target-h", 0.5, "--classes", 3,
                   "--nodes-per-class", 50, "--intra-edges", 200, "--out-dir", out)[0] == 0
        manifest = json.loads((out / "manifest.json").read_text())
        code, report, _ = run(capsys, "metrics", "--edges", out / "edges.txt",
                              "--labels", out / "labels.txt")
        assert code == 0
        assert json.loads(report)["h_edge"] == pytest.approx(manifest["realized_h_edge"])
        assert manifest["realized_h_edge"] == pytest.approx(0.5)

    def test_csbmh(self, capsys, tmp_path):
        out = tmp_path / "c"
        assert run(capsys, "gen", "csbmh", "--h", 0.7, "--n0", 30, "--n1", 30,
                   "--out-dir", out)[0] == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["directed"] is True
        assert manifest["realized_h_edge"] == pytest.approx(0.8)

    def test_same_seed_same_files(self, capsys, tmp_path):
        for name in ("a", "b"):
            assert run(capsys, "gen", "homophily", "--target-h", 0.3, "--classes", 2,
                       "--nodes-per-class", 40, "--intra-edges", 100, "--seed", 9,
                       "--out-dir", tmp_path / name)[0] == 0
        for f in ("edges.txt", "labels.txt", "features.csv", "manifest.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_exhaustion(self, capsys, tmp_path):
        code, _, err = run(capsys, "gen", "homophily", "--target-h", 0.005,
                           "--out-dir", tmp_path / "x")
        assert code == 2
        assert "pairs" in err


class TestProp:
    @pytest.fixture
    def dirs(self, tmp_path, rng):
        labels = np.repeat([0, 1], 20)
        (tmp_path / "labels.txt").write_text("".join(f"{c}\n" for c in labels))
        for name, shift in (("a", 0.5), ("b", 3.0)):
            d = tmp_path / name
            d.mkdir()
            for k in range(3):
                emb = rng.normal(size=(40, 2)) + shift * labels[:, None]
                write_features(d / f"run{k}.csv", emb)
        return tmp_path

    def test_same_directory(self, capsys, dirs):
        code, out, _ = run(capsys, "prop", "--embeddings-a", dirs / "a", "--embeddings-b",
                           dirs / "a", "--labels", dirs / "labels.txt")
        assert code == 0
        assert json.loads(out)["p_value"] == 0.5

    def test_better_model(self, capsys, dirs):
        code, out, _ = run(capsys, "prop", "--embeddings-a", dirs / "a", "--embeddings-b",
                           dirs / "b", "--labels", dirs / "labels.txt")
        assert code == 0
        assert json.loads(out)["p_value"] < 0.05

    def test_empty_directory(self, capsys, dirs):
        (dirs / "empty").mkdir()
        code = run(capsys, "prop", "--embeddings-a", dirs / "empty", "--embeddings-b",
                   dirs / "a", "--labels", dirs / "labels.txt")[0]
        assert code == 2
