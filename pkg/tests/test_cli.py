import numpy as np
import pytest

from specrem import cli
from specrem.errors import ConvergenceError
from specrem.fileio import read_mask, write_image
from specrem.imagecore import RasterImage
from specrem.pipeline import parse_report


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    assert cli.main(["synth", "--out", str(root / "train"), "--n", "30", "--seed", "1"]) == 0
    assert cli.main(["synth", "--out", str(root / "test"), "--n", "4", "--seed", "2"]) == 0
    assert cli.main(["train", "--data", str(root / "train"), "--out", str(root / "m.txt")]) == 0
    return root


def test_synth_writes_pairs(corpus):
    names = sorted(p.name for p in (corpus / "test").iterdir())
    assert names[:2] == ["synth_0000.png", "synth_0000_gt.png"] and len(names) == 8


def test_pipeline_and_evaluate_agree(corpus, tmp_path):
    out = tmp_path / "out"
    code = cli.main(["pipeline", "--in", str(corpus / "test"), "--out", str(out),
                     "--model", str(corpus / "m.txt"), "--overlay", "--report", str(tmp_path / "r.csv")])
    assert code == 0
    assert len(list(out.glob("*_overlay.png"))) == 4
    assert cli.main(["evaluate", "--pred", str(out), "--gt", str(corpus / "test"),
                     "--out", str(tmp_path / "e.csv")]) == 0
    assert (tmp_path / "r.csv").read_bytes() == (tmp_path / "e.csv").read_bytes()
    assert parse_report((tmp_path / "e.csv").read_text())["ALL"]["dice"] >= 0.7


def test_detect_then_inpaint(corpus, tmp_path):
    assert cli.main(["detect", "--in", str(corpus / "test"), "--out", str(tmp_path / "m"),
                     "--mode", "hsv", "--threshold-mode", "percentile", "--fraction", "0.006"]) == 0
    mask = read_mask(tmp_path / "m" / "synth_0000_mask.png")
    assert mask.sum() == int(0.006 * mask.size)
    assert cli.main(["inpaint", "--in", str(corpus / "test"), "--masks", str(tmp_path / "m"),
                     "--out", str(tmp_path / "c"), "--seed", "3", "--coeffs", "0.5,0.5"]) == 0
    assert len(list((tmp_path / "c").glob("*_clean.png"))) == 4


def test_detect_single_file(corpus, tmp_path):
    src = corpus / "test" / "synth_0001.png"
    assert cli.main(["detect", "--in", str(src), "--out", str(tmp_path), "--mode", "rgb"]) == 0
    assert (tmp_path / "synth_0001_mask.png").is_file()


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["detect", "--in", "x", "--out", "y"],  # auto without a model
    ["detect", "--in", "x", "--out", "y", "--mode", "hsv", "--fraction", "2"],
    ["synth", "--out", "y", "--n", "1", "--blobs", "a"],
    ["synth", "--out", "y", "--n", "-1"],
    ["inpaint", "--in", "x", "--masks", "m", "--out", "y", "--coeffs", "-1"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == cli.EXIT_USAGE


def test_data_errors(tmp_path, corpus):
    assert cli.main(["train", "--data", str(tmp_path / "none"), "--out", "m"]) == cli.EXIT_DATA
    bad = tmp_path / "bad.txt"
    bad.write_text("svmmodel v1\ngamma 1\n")
    assert cli.main(["detect", "--in", str(corpus / "test"), "--out", str(tmp_path / "o"),
                     "--model", str(bad)]) == cli.EXIT_DATA
    single = tmp_path / "single"
    single.mkdir()
    write_image(RasterImage(np.zeros((8, 8, 3))), single / "a.png")
    assert cli.main(["train", "--data", str(single), "--out", str(tmp_path / "m")]) == cli.EXIT_DATA


def test_non_convergence_exit_code(corpus, tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise ConvergenceError("gap stayed at 0.5", 0.5)

    monkeypatch.setattr(cli, "train_from_entries", fail)
    assert cli.main(["train", "--data", str(corpus / "train"), "--out", str(tmp_path / "m")]) == 3
