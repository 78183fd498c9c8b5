import csv
import json

import numpy as np
import pytest

from sparsetomo import io
from sparsetomo.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def sino_file(tmp_path):
    assert run("phantom", "--kind", "threedot", "--size", 32, "-o", tmp_path / "p.tomo") == 0
    assert run("project", "-i", tmp_path / "p.tomo", "--range", 90, "-o", tmp_path / "s.tomo") == 0
    return tmp_path


def test_end_to_end_fbp_pipeline(sino_file, capsys):
    d = sino_file
    assert run("noise", "-i", d / "s.tomo", "--intensity", "10^4", "--seed", 2, "-o", d / "n.tomo") == 0
    assert run("reconstruct", "-i", d / "n.tomo", "--method", "fbp", "--filter", "ramlak", "-o", d / "r.tomo") == 0
    assert run("evaluate", "-i", d / "r.tomo", "--ref", d / "p.tomo", "-o", d / "e.csv") == 0
    rows = list(csv.DictReader(open(d / "e.csv")))
    assert len(rows) == 1 and np.isfinite(float(rows[0]["psnr_db"]))
    err = capsys.readouterr().err
    logged = [json.loads(line.split(" config ", 1)[1]) for line in err.splitlines() if " config " in line]
    recon = next(c for c in logged if c.get("method") == "fbp")
    assert recon["max_iters"] == 100 and recon["filter_kind"] == "ramlak"


def test_iterative_outputs(sino_file):
    d = sino_file
    code = run(
        "reconstruct", "-i", d / "s.tomo", "--method", "sfsirt", "--max-iters", 3, "--trace", d / "t.csv",
        "--truth", d / "p.tomo", "--support-csv", d / "w.csv", "--gmdl-csv", d / "g.csv",
        "--dump-pgm", d / "r.pgm", "-o", d / "r.tomo",
    )
    assert code == 0
    trace = list(csv.DictReader(open(d / "t.csv")))
    assert [r["k"] for r in trace] == ["0", "1", "2"] and all(r["psnr"] for r in trace)
    assert (d / "r.pgm").read_bytes().startswith(b"P5")
    assert io.read_container(d / "r.tomo").size_n == 32


@pytest.mark.parametrize(
    "flags",
    [
        ["--method", "sfbp", "--filter", "hann"],
        ["--method", "sfsirt", "--filter", "cosine"],
        ["--method", "sirt", "--filter", "cosine"],
        ["--method", "fbp", "--freeze-support"],
        ["--method", "sirt", "--gmdl-norm", "rss"],
        ["--method", "fbp", "--max-iters", "5"],
        ["--method", "bogus"],
        ["--method", "fbp", "--no-such-flag"],
        ["--method", "sirt", "--max-iters", "0"],
    ],
)
def test_bad_flags_fail_with_one_line(sino_file, capsys, flags):
    d = sino_file
    capsys.readouterr()
    assert run("reconstruct", "-i", d / "s.tomo", *flags, "-o", d / "x.tomo") != 0
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("sparsetomo: error:")
    assert not (d / "x.tomo").exists()


def test_missing_input_is_error(tmp_path, capsys):
    assert run("reconstruct", "-i", tmp_path / "nope", "--method", "fbp", "-o", tmp_path / "x") != 0
    assert "error" in capsys.readouterr().err


def test_bench_two_methods_one_seed(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("# tiny\nphantoms = threedot\nintensities = 10^3\nranges = 90\nseeds = 0\nmethods = fbp, sfbp\nsize = 32\n")
    assert run("bench", "--config", cfg, "-o", tmp_path / "b.csv") == 0
    rows = list(csv.reader(open(tmp_path / "b.csv")))
    assert rows[0] == ["method", "scenario", "seed", "psnr_db", "ssim", "iterations", "wall_ms", "status"]
    assert len(rows) == 3 and [r[0] for r in rows[1:]] == ["fbp", "sfbp"]


def test_bench_no_timing_is_bit_identical(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("phantoms=box\nseeds=0,1\nmethods=sirt,fbp\nsize=24\nmax_iters=3\n")
    assert run("bench", "--config", cfg, "--no-timing", "-o", tmp_path / "1.csv") == 0
    assert run("bench", "--config", cfg, "--no-timing", "-o", tmp_path / "2.csv") == 0
    assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "2.csv").read_bytes()


def test_stack(sino_file):
    d = sino_file
    (d / "slices").mkdir()
    for i in range(3):
        run("noise", "-i", d / "s.tomo", "--intensity", 1e4, "--seed", i, "-o", d / "slices" / f"z{i:02d}.tomo")
    assert run("stack", "--slices", d / "slices", "--method", "sfbp", "-o", d / "out") == 0
    assert sorted(p.name for p in (d / "out").iterdir()) == ["z00.tomo", "z01.tomo", "z02.tomo"]


def test_project_requires_image(sino_file, capsys):
    d = sino_file
    assert run("project", "-i", d / "s.tomo", "--range", 90, "-o", d / "y.tomo") != 0
