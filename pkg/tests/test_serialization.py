import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kepler_orbit.serialization import ConfigError, dumps_json, format_float, parse_config, read_state_rows, write_csv


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_roundtrip(v):
    assert float(format_float(v)) == v


def test_special_floats():
    assert format_float(float("nan")) == "nan"
    assert format_float(float("-inf")) == "-inf"


def test_csv_roundtrip():
    rows = np.random.default_rng(1).normal(size=(5, 6))
    buf = io.StringIO()
    write_csv(buf, ("x1", "x2", "x3", "p1", "p2", "p3"), rows)
    buf.seek(0)
    assert np.array_equal(read_state_rows(buf), rows)


def test_csv_with_extra_columns_and_no_header():
    text = "t,p1,p2,p3,x1,x2,x3\n0,4,5,6,1,2,3\n"
    assert np.array_equal(read_state_rows(io.StringIO(text)), [[1, 2, 3, 4, 5, 6]])
    assert np.array_equal(read_state_rows(io.StringIO("# c\n1,2,3,4,5,6\n")), [[1, 2, 3, 4, 5, 6]])
    assert read_state_rows(io.StringIO("")).shape == (0, 6)


@pytest.mark.parametrize(
    "text",
    ["x1,x2\n1,2\n", "1,2,3\n", "x1,x2,x3,p1,p2,p3\n1,2,3,4,5\n", "x1,x2,x3,p1,p2,p3\n1,2,3,4,5,a\n"],
)
def test_csv_errors(text):
    with pytest.raises(ConfigError):
        read_state_rows(io.StringIO(text))


def test_json_is_deterministic():
    a = dumps_json({"b": np.float64(1.5), "a": np.arange(3), "c": (1, 2)})
    b = dumps_json({"c": [1, 2], "a": [0, 1, 2], "b": 1.5})
    assert a == b
    assert json.loads(a)["a"] == [0, 1, 2]


def test_parse_config():
    cfg = parse_config("# run\nchart = standard\nn-points=5 # comment\n\n")
    assert cfg == {"chart": "standard", "n_points": "5"}
    with pytest.raises(ConfigError):
        parse_config("just words")
    with pytest.raises(ConfigError):
        parse_config("= 3")
