import numpy as np
import pytest

from cem.io import DataFormatError, load_dataset, mask_pixels, read_pgm, save_dataset, write_pgm


def write(tmp_path, text):
    p = tmp_path / "d.csv"
    p.write_text(text)
    return p


def test_single_row(tmp_path):
    X, y = load_dataset(write(tmp_path, "0.0,0.5,1\n"))
    np.testing.assert_array_equal(X, [[0.0, 0.5]])
    np.testing.assert_array_equal(y, [1])


def test_wrong_width_cites_line(tmp_path):
    p = write(tmp_path, "0.0,0.5,1\n0.1,0.2,0.3,0\n")
    with pytest.raises(DataFormatError, match="line 2"):
        load_dataset(p)
    with pytest.raises(DataFormatError, match="line 1"):
        load_dataset(write(tmp_path, "0.1,0.2,0.3,0\n"), n_features=2)


@pytest.mark.parametrize(
    "text, line",
    [("0.1,abc,1\n", "line 1"), ("0.1,0.2,1\n0.3,0.4,x\n", "line 2"), ("0.1,0.2,1.5\n", "line 1"), ("0.1,1.7,0\n", "line 1")],
)
def test_bad_rows(tmp_path, text, line):
    with pytest.raises(DataFormatError, match=line):
        load_dataset(write(tmp_path, text), lo=0.0, hi=1.0)


def test_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(30, 5))
    X[0, 0] = 1 / 3
    y = rng.integers(0, 3, size=30)
    save_dataset(tmp_path / "t.csv", X, y)
    X2, y2 = load_dataset(tmp_path / "t.csv")
    assert X2.tobytes() == X.tobytes()
    np.testing.assert_array_equal(y2, y)


def test_pgm(tmp_path):
    delta = np.zeros(6)
    delta[1] = 0.5
    delta[4] = 1.0
    write_pgm(tmp_path / "m.pgm", delta, (2, 3), scale=1.0)
    text = (tmp_path / "m.pgm").read_text()
    assert text.startswith("P2\n3 2\n255\n")
    np.testing.assert_array_equal(read_pgm(tmp_path / "m.pgm"), [[0, 128, 0], [0, 255, 0]])
    with pytest.raises(ValueError):
        mask_pixels(delta, (4, 4), 1.0)
