import numpy as np
import pytest
from PIL import Image

from specrem.dataset import load_dataset
from specrem.errors import DataError
from specrem.fileio import read_image, read_mask, write_image, write_mask
from specrem.imagecore import RasterImage, rgb_to_hsv
from specrem.synth import SyntheticSpec, core_mask, generate_synthetic, render_frame


# file I/O ---------------------------------------------------------------


def test_png_and_ppm_round_trip(tmp_path):
    data = np.random.default_rng(0).integers(0, 256, (5, 7, 3)) / 255.0
    for name in ("a.png", "a.ppm"):
        write_image(RasterImage(data), tmp_path / name)
        assert np.array_equal(read_image(tmp_path / name).data, data)
    assert (tmp_path / "a.ppm").read_bytes().startswith(b"P6")


def test_mask_threshold(tmp_path):
    Image.fromarray(np.array([[0, 127, 128, 255]], np.uint8)).save(tmp_path / "m.png")
    assert read_mask(tmp_path / "m.png").tolist() == [[False, False, True, True]]
    write_mask(np.array([[True, False]]), tmp_path / "w.png")
    assert np.asarray(Image.open(tmp_path / "w.png")).tolist() == [[255, 0]]


def test_unreadable_image(tmp_path):
    (tmp_path / "bad.png").write_bytes(b"not a png")
    with pytest.raises(DataError):
        read_image(tmp_path / "bad.png")


# dataset ----------------------------------------------------------------


def _frame(path, h=8, w=8):
    write_image(RasterImage(np.zeros((h, w, 3))), path)


def test_pairs_frames_with_ground_truth(tmp_path):
    _frame(tmp_path / "b.png")
    _frame(tmp_path / "a.png")
    write_mask(np.zeros((8, 8), bool), tmp_path / "a_gt.png")
    _frame(tmp_path / "a_clean.png")
    write_mask(np.zeros((8, 8), bool), tmp_path / "a_mask.png")
    entries = load_dataset(tmp_path)
    assert [e.id for e in entries] == ["a", "b"]
    assert entries[0].has_gt and not entries[1].has_gt


def test_empty_directory(tmp_path):
    assert load_dataset(tmp_path) == []


def test_size_mismatch_is_skipped(tmp_path):
    _frame(tmp_path / "a.png", 64, 64)
    write_mask(np.zeros((32, 32), bool), tmp_path / "a_gt.png")
    _frame(tmp_path / "b.png")
    (tmp_path / "c.png").write_bytes(b"garbage")
    errors = []
    entries = load_dataset(tmp_path, errors)
    assert [e.id for e in entries] == ["b"]
    assert [ident for ident, _ in errors] == ["a", "c"]
    assert "32x32" in errors[0][1]


def test_missing_directory(tmp_path):
    with pytest.raises(DataError):
        load_dataset(tmp_path / "nope")


# synthetic corpus -------------------------------------------------------


def test_zero_frames_writes_nothing(tmp_path):
    assert generate_synthetic(SyntheticSpec(), 0, tmp_path / "out") == []
    assert not (tmp_path / "out").exists()


def test_fixed_seed_is_byte_identical(tmp_path):
    spec = SyntheticSpec(width=48, height=40, blob_radius=(2, 4), seed=9)
    generate_synthetic(spec, 3, tmp_path / "a")
    generate_synthetic(spec, 3, tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["synth_0000.png", "synth_0000_gt.png", "synth_0001.png", "synth_0001_gt.png",
                     "synth_0002.png", "synth_0002_gt.png"]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_blob_cores_are_bright_and_unsaturated():
    spec = SyntheticSpec(seed=3, blob_count=(2, 5))
    for i in range(10):
        frame = render_frame(spec, i)
        hsv = rgb_to_hsv(frame.image).data
        # 8-bit quantization may shave up to half a level off the brightness
        assert np.all(hsv[frame.gt, 2] >= 0.82 - 0.5 / 255)
        assert np.all(hsv[frame.gt, 1] < 0.15)


def test_ground_truth_is_blob_core_set():
    spec = SyntheticSpec(seed=4, blob_count=(1, 5))
    for i in range(6):
        frame = render_frame(spec, i)
        h, w = frame.gt.shape
        assert np.array_equal(frame.gt, core_mask(frame.blobs, h, w))
        for blob in frame.blobs:
            assert blob.radius + 1 <= blob.row <= h - 2 - blob.radius
            assert blob.radius + 1 <= blob.col <= w - 2 - blob.radius
            rows, cols = np.mgrid[0:h, 0:w]
            core = np.hypot(rows - blob.row, cols - blob.col) <= blob.radius
            # every core pixel carries exactly the blob color
            expected = np.rint(np.array(blob.color) * 255) / 255
            assert np.allclose(frame.image.data[core], expected)


@pytest.mark.parametrize("kwargs", [
    {"brightness": (0.7, 0.9)},
    {"saturation": (0.0, 0.2)},
    {"blob_count": (3, 1)},
    {"blob_radius": (0, 2)},
    {"width": 4},
    {"edge_weight": 1.0},
])
def test_synthetic_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SyntheticSpec(**kwargs)
