import json

import numpy as np
import pytest

from traplab.dataio import (
    SchemaConfig,
    dumps,
    fmt,
    group_records,
    load_csv,
    shortfalls,
    write_csv,
)
from traplab.errors import DomainError


def write(tmp_path, text, name="hh.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_three_row_fixture(tmp_path):
    p = write(tmp_path, "household_id,consumption,region,area,weight\n"
                        "h1,300.5,Nord,rural,2.5\nh2,500,Centre,urban,1\nh3,0,Nord,urban,\n")
    res = load_csv(p)
    assert not res.rejects
    r = res.records
    assert [x.household_id for x in r] == ["h1", "h2", "h3"]
    assert [x.consumption for x in r] == [300.5, 500.0, 0.0]
    assert [x.weight for x in r] == [2.5, 1.0, 1.0]
    assert r[0].region == "Nord" and r[1].area == "urban"


def test_empty_file(tmp_path):
    p = write(tmp_path, "household_id,consumption,region,area\n")
    assert load_csv(p).records == []


def test_rejects(tmp_path):
    p = write(tmp_path, "household_id,consumption,region,area,weight\n"
                        "h1,-5,Nord,rural,1\nh2,,Nord,rural,1\nh3,abc,Nord,rural,1\nh4,10,Nord,rural,0\nh5,10,Nord,rural,1\n")
    res = load_csv(p)
    assert len(res.records) == 1
    reasons = [r.reason for r in res.rejects]
    assert "negative" in reasons[0] and "missing" in reasons[1]
    assert "unparseable" in reasons[2] and "weight" in reasons[3]
    assert [r.line for r in res.rejects] == [2, 3, 4, 5]


def test_missing_column(tmp_path):
    p = write(tmp_path, "id,consumption\n1,2\n")
    with pytest.raises(DomainError):
        load_csv(p)


def test_schema_from_json(tmp_path):
    sp = write(tmp_path, json.dumps({"id": "hid", "consumption": "dep", "weight": None, "unit": "annual"}), "s.json")
    schema = SchemaConfig.from_json(sp)
    assert schema.default_poverty_line == 153530.0
    p = write(tmp_path, "hid,dep,region,area\nA,1000,R,U\n")
    assert load_csv(p, schema).records[0].consumption == 1000.0
    with pytest.raises(DomainError):
        SchemaConfig(unit="weekly")


def test_shortfalls_and_grouping(tmp_path):
    p = write(tmp_path, "household_id,consumption,region,area\n"
                        "a,300,N,rural\nb,500,N,urban\nc,421,C,rural\nd,100,C,urban\n")
    recs = load_csv(p).records
    s = shortfalls(recs, 421.0)["all"]
    np.testing.assert_allclose(np.sort(s.y), [121.0, 321.0])
    by_area = shortfalls(recs, 421.0, "area")
    assert list(by_area) == ["rural", "urban"]
    assert sum(len(v) for v in group_records(recs, "area").values()) == len(recs)
    assert by_area["rural"].n == 1 and by_area["urban"].n == 1


def test_all_nonpoor_gives_empty_sample(tmp_path):
    p = write(tmp_path, "household_id,consumption,region,area\na,900,N,rural\n")
    assert shortfalls(load_csv(p).records, 421.0)["all"].n == 0


def test_serialization():
    doc = {"b": float("nan"), "a": np.float64(0.1), "c": [np.int64(3), float("inf")]}
    text = dumps(doc)
    assert json.loads(text) == {"a": 0.1, "b": None, "c": [3, "inf"]}
    assert text.index('"a"') < text.index('"b"')
    assert fmt(0.1) == "0.10000000000000001"
    assert float(fmt(1 / 3)) == 1 / 3


def test_write_csv(tmp_path):
    out = tmp_path / "o.csv"
    write_csv(out, ["x", "y"], [[1.0, "k"], [0.5, float("nan")]])
    assert out.read_text() == "x,y\n1,k\n0.5,nan\n"
