import json

import numpy as np
import pytest

from musselseg import codec
from musselseg.cli import build_parser, derive_seed, main
from musselseg.core import MwoConfig
from musselseg.synthetic import gen_rgb_squares

FAST = ["--pop", "10", "--iters", "10"]


def usage_exit(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    return exc.value.code


@pytest.fixture
def squares(tmp_path):
    path = tmp_path / "squares.png"
    codec.write_image(path, gen_rgb_squares())
    return path


class TestSegment:
    def test_writes_outputs(self, tmp_path, squares, capsys):
        out, man, tr = tmp_path / "seg.png", tmp_path / "run.json", tmp_path / "trace.csv"
        rc = main(["segment", str(squares), "--features", "rgb", "--seed", "7", "--out", str(out),
                   "--manifest", str(man), "--trace", str(tr), "--iters", "30"])
        assert rc == 0
        seg = codec.read_image(out)
        assert seg.shape == (120, 120, 3)
        m = json.loads(man.read_text())
        assert m["seed"] == 7 and m["features"]["mode"] == "rgb"
        assert m["input_digest"] == codec.digest_bytes(squares.read_bytes())
        assert len(tr.read_text().splitlines()) == 31
        assert "k_eff=" in capsys.readouterr().out

    def test_kmax_one_is_usage_error(self, squares):
        assert usage_exit(["segment", str(squares), "--kmax", "1"]) == 2

    def test_mean_color_render(self, tmp_path, squares):
        out = tmp_path / "seg.ppm"
        assert main(["segment", str(squares), "--features", "rgb", "--render", "mean-color",
                     "--out", str(out), "--iters", "40"] + FAST[:2]) == 0
        seg = codec.read_image(out)
        # mean-color output only contains colors that are cluster means of the source
        assert len(np.unique(seg.reshape(-1, 3), axis=0)) <= 4

    def test_unreadable(self, tmp_path, capsys):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"not an image")
        assert main(["segment", str(bad)] + FAST) == 1
        assert "error" in capsys.readouterr().err
        assert main(["segment", str(tmp_path / "nope.png")] + FAST) == 1

    def test_help_shows_defaults(self, capsys):
        with pytest.raises(SystemExit):
            main(["segment", "--help"])
        text = capsys.readouterr().out
        d = MwoConfig()
        for flag, value in (("--pop", d.population), ("--kmax", d.k_max), ("--iters", d.max_iter),
                            ("--levy-cap", d.levy_cap), ("--sample", d.subsample_cap)):
            assert flag in text and f"default: {value}" in text


class TestCluster:
    def test_two_points(self, tmp_path):
        src, out, man = tmp_path / "p.csv", tmp_path / "o.csv", tmp_path / "m.json"
        src.write_text("x,y\n0,0\n5,5\n")
        assert main(["cluster", str(src), "-o", str(out), "--manifest", str(man)] + FAST) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,y,cluster"
        assert {lines[1].split(",")[-1], lines[2].split(",")[-1]} == {"0", "1"}
        m = json.loads(man.read_text())
        assert m["k_eff"] == 2 and m["rf"] == 0.0

    def test_keeps_label_column(self, tmp_path):
        src, out = tmp_path / "p.csv", tmp_path / "o.csv"
        src.write_text("x,label\n0,a\n1,a\n9,b\n10,b\n")
        assert main(["cluster", str(src), "-o", str(out)] + FAST) == 0
        assert out.read_text().splitlines()[0] == "x,label,cluster"

    def test_malformed(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        src.write_text("x,y\n0,0\n1,2,3\n")
        assert main(["cluster", str(src)] + FAST) == 1
        assert "line 3" in capsys.readouterr().err


class TestSynth:
    def test_rgb_squares(self, tmp_path):
        out = tmp_path / "sq.ppm"
        assert main(["synth", "rgb-squares", "-o", str(out)]) == 0
        img = codec.read_image(out)
        assert img.shape == (120, 120, 3)
        assert len(np.unique(img.reshape(-1, 3), axis=0)) == 4

    def test_six_colors(self, tmp_path):
        out = tmp_path / "six.png"
        assert main(["synth", "six-colors", "-o", str(out)]) == 0
        assert len(np.unique(codec.read_image(out).reshape(-1, 3), axis=0)) == 7

    def test_blobs_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["synth", "blobs", "--seed", "1", "-o", str(a)])
        main(["synth", "blobs", "--seed", "1", "-o", str(b)])
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().splitlines()[0] == "x,y,label"
        assert len(a.read_text().splitlines()) == 501
        assert "np." not in a.read_text()

    def test_blobs_feed_cluster(self, tmp_path):
        src, out = tmp_path / "b.csv", tmp_path / "o.csv"
        main(["synth", "blobs", "-o", str(src)])
        assert main(["cluster", str(src), "-o", str(out)] + FAST) == 0
        assert out.read_text().splitlines()[0] == "x,y,label,cluster"

    def test_unknown_kind(self, tmp_path):
        assert usage_exit(["synth", "spirals", "-o", str(tmp_path / "x")]) == 2


class TestEvalDb:
    def test_hand_instance(self, tmp_path, capsys):
        src = tmp_path / "d.csv"
        src.write_text("x,y,label\n0,0,0\n0,2,0\n10,0,1\n10,2,1\n")
        assert main(["eval-db", str(src)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("db=0.2") and "q_order=2" in out and "t_order=2" in out
        db = float(out.split()[0].split("=")[1])
        assert db == pytest.approx(0.2, rel=1e-12)

    def test_permuted_labels(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        a.write_text("x,label\n0,0\n1,0\n5,1\n9,2\n10,2\n")
        b.write_text("x,label\n0,7\n1,7\n5,3\n9,5\n10,5\n")
        main(["eval-db", str(a)])
        main(["eval-db", str(b)])
        first, second = capsys.readouterr().out.splitlines()
        assert first == second

    def test_separate_label_file(self, tmp_path, capsys):
        data, labels = tmp_path / "d.csv", tmp_path / "l.csv"
        data.write_text("x,y\n0,0\n0,2\n10,0\n10,2\n")
        labels.write_text("cluster\n1\n1\n0\n0\n")
        assert main(["eval-db", str(data), "--labels", str(labels)]) == 0
        assert capsys.readouterr().out.startswith("db=0.2")

    def test_agrees_with_cluster_output(self, tmp_path, capsys):
        src, out = tmp_path / "b.csv", tmp_path / "o.csv"
        main(["synth", "blobs", "-o", str(src)])
        main(["cluster", str(src), "-o", str(out)] + FAST)
        run_db = float(capsys.readouterr().out.split()[2].split("=")[1])
        for extra in ([], ["--labels", str(out)]):
            assert main(["eval-db", str(out), "--label-column", "cluster"] + extra) == 0
            db = float(capsys.readouterr().out.split()[0].split("=")[1])
            assert db == pytest.approx(run_db, rel=1e-5)

    def test_single_cluster(self, tmp_path, capsys):
        src = tmp_path / "d.csv"
        src.write_text("x,label\n0,1\n1,1\n")
        assert main(["eval-db", str(src)]) == 1
        assert "DB undefined for k < 2" in capsys.readouterr().err


def make_folder(path, count, corrupt=0):
    path.mkdir()
    rng = np.random.default_rng(0)
    for i in range(count):
        img = np.zeros((12, 12, 3), dtype=np.uint8)
        img[:] = rng.integers(0, 256, 3)
        y, x = rng.integers(0, 6, 2)
        img[y:y + 6, x:x + 6] = rng.integers(0, 256, 3)
        codec.write_image(path / f"img{i:02d}.png", img)
    for i in range(corrupt):
        (path / f"broken{i}.png").write_bytes(b"\x89PNG truncated")
    (path / "notes.txt").write_text("ignored")
    return path


class TestBench:
    def test_report(self, tmp_path, capsys):
        folder = make_folder(tmp_path / "imgs", 4, corrupt=1)
        report = tmp_path / "r.csv"
        rc = main(["bench", str(folder), "--report", str(report), "--no-timing",
                   "--baseline", "kmeans", "--k", "2"] + FAST)
        assert rc == 0
        captured = capsys.readouterr()
        assert "mean=" in captured.out and "variance=" in captured.out
        assert "1 image(s) failed" in captured.err
        rows = report.read_text().splitlines()
        assert rows[0].startswith("path,repeat,seed")
        body = [r for r in rows[1:] if not r.startswith("#")]
        assert len(body) == 5
        assert sum(1 for r in body if r.startswith("broken")) == 1
        assert [r.split(",")[0] for r in body] == sorted(r.split(",")[0] for r in body)

    def test_empty_directory(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert main(["bench", str(tmp_path / "empty")] + FAST) == 1

    def test_baseline_needs_k(self, tmp_path):
        folder = make_folder(tmp_path / "imgs", 1)
        assert usage_exit(["bench", str(folder), "--baseline", "kmeans"]) == 2

    def test_repeats(self, tmp_path):
        folder = make_folder(tmp_path / "imgs", 2)
        report = tmp_path / "r.csv"
        main(["bench", str(folder), "--report", str(report), "--repeats", "3", "--no-timing"] + FAST)
        assert len(report.read_text().splitlines()) == 1 + 6 + 1

    def test_seed_derivation(self):
        d = "sha256:" + "00" * 7 + "05" + "ff" * 24
        assert derive_seed(3, d) == 3 ^ 5
        assert derive_seed(3, d, 2) == (3 ^ 5) + 2


def test_parser_lists_all_commands():
    text = build_parser().format_help()
    for cmd in ("segment", "cluster", "synth", "eval-db", "bench"):
        assert cmd in text
