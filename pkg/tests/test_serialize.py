import json

import numpy as np
from hypothesis import given, strategies as st

from multibubble.serialize import clean, from_csv, history_csv, to_csv, to_json
from multibubble.optimizer import HistoryEntry


def test_clean_rounds_and_converts():
    out = clean({"a": np.float64(1 / 3), "b": np.arange(3), "c": (np.bool_(True), np.nan), 4: "s"})
    assert out == {"a": 0.333333333, "b": [0, 1, 2], "c": [True, None], "4": "s"}


def test_json_is_sorted_and_stable():
    text = to_json({"z": 1.0, "a": [1e-20, 2.5]})
    assert list(json.loads(text)) == ["a", "z"]
    assert text == to_json({"a": [1e-20, 2.5], "z": 1.0})


def test_csv_roundtrip_of_report_shape():
    obj = {"value": 0.598413421, "hessian": [[-1.0, 0.5], [0.5, -1.0]], "complex": {"edges": [[1, 2]],
           "triangles": [], "b0": 1}, "flag": True}
    assert from_csv(to_csv(obj)) == clean(obj)


leaf = st.one_of(st.integers(-10**6, 10**6), st.floats(-1e6, 1e6, allow_nan=False), st.booleans())
keys = st.text("abcxyz_", min_size=1, max_size=5)
tree = st.recursive(leaf, lambda kids: st.one_of(st.lists(kids, min_size=1, max_size=4),
                                                 st.dictionaries(keys, kids, min_size=1, max_size=4)),
                    max_leaves=20)


@given(st.dictionaries(keys, tree, min_size=1, max_size=5))
def test_csv_roundtrip_property(obj):
    assert from_csv(to_csv(obj)) == clean(obj)


def test_history_csv():
    rows = history_csv([HistoryEntry(0, 100.0, 1, 0.5, 0.4, 1e-3)]).splitlines()
    assert rows[0] == "start,penalty,iteration,objective,perimeter,measure_error"
    assert rows[1] == "0,100,1,0.5,0.4,0.001"
