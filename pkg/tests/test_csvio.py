import json
import os

import numpy as np
import pytest

from esqpt_lab.csvio import (
    FORMAT_TAG,
    FormatError,
    read_csv,
    write_csv,
    write_manifest,
)

HASH = "a" * 64


def test_round_trip_is_bit_exact(tmp_path):
    path = str(tmp_path / "data.csv")
    cols = {
        "epsilon": np.array([-1.0, 1.0 / 3.0, 0.1 + 0.2]),
        "count": np.array([3, 4, 5], dtype=np.int64),
        "regime": np.array(["middle", "middle", "saturated"]),
    }
    write_csv(path, cols, HASH)
    back, cfg = read_csv(path)
    assert cfg == HASH
    assert np.array_equal(back["epsilon"], cols["epsilon"])   # repr exact
    assert np.array_equal(back["count"].astype(int), cols["count"])
    assert list(back["regime"]) == list(cols["regime"])


def test_header_layout(tmp_path):
    path = str(tmp_path / "h.csv")
    write_csv(path, {"x": np.array([1.5])}, HASH)
    lines = open(path).read().splitlines()
    assert lines[0] == f"# {FORMAT_TAG}"
    assert lines[1] == f"# config={HASH}"
    assert lines[2] == "x"
    assert lines[3] == "1.5"


def test_reread_rejects_foreign_files(tmp_path):
    path = str(tmp_path / "alien.csv")
    with open(path, "w") as fh:
        fh.write("x,y\n1,2\n")
    with pytest.raises(FormatError):
        read_csv(path)
    with open(path, "w") as fh:
        fh.write(f"# {FORMAT_TAG}\nx\n1\n")   # missing config line
    with pytest.raises(FormatError):
        read_csv(path)


def test_writes_are_deterministic(tmp_path):
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    cols = {"v": np.linspace(0, 1, 50) ** 3}
    write_csv(a, cols, HASH)
    write_csv(b, cols, HASH)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_no_temp_files_left_behind(tmp_path):
    path = str(tmp_path / "clean.csv")
    write_csv(path, {"x": np.array([1.0])}, HASH)
    write_csv(path, {"x": np.array([2.0])}, HASH)   # overwrite in place
    assert sorted(os.listdir(tmp_path)) == ["clean.csv"]
    assert read_csv(path)[0]["x"][0] == 2.0


def test_column_validation(tmp_path):
    path = str(tmp_path / "bad.csv")
    with pytest.raises(ValueError):
        write_csv(path, {}, HASH)
    with pytest.raises(ValueError):
        write_csv(path, {"a": np.array([1.0, 2.0]),
                         "b": np.array([1.0])}, HASH)
    with pytest.raises(ValueError):
        write_csv(path, {"a": np.ones((2, 2))}, HASH)
    assert not os.path.exists(path)


def test_manifest_round_trip(tmp_path):
    path = str(tmp_path / "run_manifest.json")
    payload = {"command": "dos", "config_sha256": HASH,
               "outputs": ["dos.csv"]}
    write_manifest(path, payload)
    text = open(path).read()
    assert text.endswith("\n")
    assert json.loads(text) == payload
