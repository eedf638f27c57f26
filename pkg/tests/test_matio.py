import numpy as np
import pytest

from geolab.errors import DimensionMismatch
from geolab.matio import (
    format_matrix_text,
    matrix_from_json_dict,
    matrix_to_json_dict,
    parse_matrix_text,
    read_matrix_json,
    read_matrix_text,
    write_matrix_json,
    write_matrix_text,
)


def test_text_round_trip_is_bit_exact(rng):
    m = rng.standard_normal((5, 3)) * 10.0 ** rng.integers(-200, 200, size=(5, 3))
    back = parse_matrix_text(format_matrix_text(m))
    assert back.shape == m.shape
    assert (back == m).all()  # 17 significant digits reproduce every double


def test_text_format_header():
    text = format_matrix_text(np.zeros((2, 4)))
    assert text.splitlines()[0] == "2 4"


def test_text_parse_errors():
    with pytest.raises(DimensionMismatch):
        parse_matrix_text("")
    with pytest.raises(DimensionMismatch):
        parse_matrix_text("2 2\n1 2\n")
    with pytest.raises(DimensionMismatch):
        parse_matrix_text("1 3\n1 2\n")


def test_text_file_round_trip(tmp_path, rng):
    m = rng.standard_normal((4, 4))
    path = tmp_path / "m.txt"
    write_matrix_text(m, path)
    assert (read_matrix_text(path) == m).all()


def test_json_round_trip(tmp_path, rng):
    m = rng.standard_normal((3, 6))
    d = matrix_to_json_dict(m)
    assert d["rows"] == 3 and d["cols"] == 6 and len(d["data"]) == 18
    assert (matrix_from_json_dict(d) == m).all()
    path = tmp_path / "m.json"
    write_matrix_json(m, path)
    assert (read_matrix_json(path) == m).all()


def test_json_length_mismatch():
    with pytest.raises(DimensionMismatch):
        matrix_from_json_dict({"rows": 2, "cols": 2, "data": [1.0, 2.0]})
