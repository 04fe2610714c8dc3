import json

import numpy as np
import pytest

from bernoulli_cs import io
from bernoulli_cs.errors import InvalidInputError


def test_floats_round_trip(tmp_path, rng):
    x = rng.standard_normal(50) * 10.0 ** rng.integers(-300, 300, 50)
    io.write_vector(tmp_path / "v.csv", x)
    np.testing.assert_array_equal(io.read_vector(tmp_path / "v.csv"), x)


def test_complex_vector(tmp_path, rng):
    z = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    io.write_vector(tmp_path / "z.csv", z)
    assert (tmp_path / "z.csv").read_text().startswith("re,im\n")
    np.testing.assert_array_equal(io.read_vector(tmp_path / "z.csv", "complex"), z)
    with pytest.raises(InvalidInputError):
        io.read_vector(tmp_path / "z.csv", "real")


def test_alpha_file(tmp_path):
    io.write_alpha(tmp_path / "a.csv", [0.1, 1 / 3])
    assert (tmp_path / "a.csv").read_text() == "index,alpha\n0,0.10000000000000001\n1,0.33333333333333331\n"
    np.testing.assert_array_equal(io.read_alpha(tmp_path / "a.csv"), [0.1, 1 / 3])


def test_weights_footer(tmp_path):
    io.write_weights(tmp_path / "w.csv", [0.5, 1.0], [0.25, 0.75], {"L2": 2.0, "J": 2, "m": 1})
    alpha, w, footer = io.read_weights(tmp_path / "w.csv")
    np.testing.assert_array_equal(w, [0.25, 0.75])
    assert footer == {"L2": "2", "J": "2", "m": "1"}


def test_json_seventeen_digits():
    text = io.dumps({"a": 0.1, "b": [1, 2.5], "c": None, "d": True, "e": {}})
    assert '"a": 0.10000000000000001' in text
    assert json.loads(text) == {"a": 0.1, "b": [1, 2.5], "c": None, "d": True, "e": {}}


def test_bad_alpha_header(tmp_path):
    (tmp_path / "bad.csv").write_text("j,value\n0,1\n")
    with pytest.raises(InvalidInputError):
        io.read_alpha(tmp_path / "bad.csv")
