import math

from hypothesis import given, settings
from hypothesis import strategies as st
import numpy as np
import pytest

from runlength_lab.tables import ExperimentTable

floats = st.floats(allow_nan=False, allow_infinity=False)
row = st.tuples(floats, st.integers(1, 10**9), st.integers(-1, 500), st.sampled_from(["r_n", "R_n", "a,b", 'q"x']), floats)


@settings(max_examples=100, deadline=None)
@given(st.lists(row, max_size=30), st.dictionaries(st.text("abcxyz_", min_size=1), st.integers() | st.text()))
def test_round_trip(rows, meta):
    t = ExperimentTable(rows, meta)
    assert ExperimentTable.from_csv(t.to_csv()) == t
    assert ExperimentTable.from_json(t.to_json()) == t


def test_rows_sorted_and_numpy_scalars():
    t = ExperimentTable([(0.5, 10, 1, "b", np.float64(2.0)), (0.5, np.int64(10), 0, "a", 1.0)])
    assert [r[3] for r in t.rows] == ["a", "b"]
    assert type(t.rows[0][1]) is int and type(t.rows[1][4]) is float
    assert "np." not in t.to_csv()


def test_csv_layout():
    t = ExperimentTable([(0.5, 10, 0, "r_n", 0.1)], {"seed": 3})
    text = t.to_csv()
    assert text.startswith("# seed=3\n")
    assert "alpha,n,trial,statistic,value\r\n" in text
    assert text.endswith("0.5,10,0,r_n,0.1\r\n")


def test_custom_columns_and_select():
    t = ExperimentTable([(0, 0.75, 1), (1, 0.5, 1)], {}, ("k", "point", "digit"))
    assert t.column("point") == [0.75, 0.5]
    assert t.select(k=1) == [(1, 0.5, 1)]
    with pytest.raises(ValueError):
        ExperimentTable([(1, 2)], {}, ("k", "point", "digit"))


def test_nan_survives_csv():
    t = ExperimentTable([(0.5, 1, 0, "ratio", math.nan)])
    back = ExperimentTable.from_csv(t.to_csv())
    assert math.isnan(back.rows[0][4])


def test_write_read(tmp_path):
    t = ExperimentTable([(0.5, 10, 0, "r_n", 3.0)], {"k": [1, 2]})
    for fmt in ("csv", "json"):
        p = t.write(tmp_path / f"t.{fmt}", fmt)
        assert ExperimentTable.read(p) == t
