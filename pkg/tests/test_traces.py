import pytest

from needlefinder.errors import FormatError
from needlefinder.traces import SampleStore, TraceRecord, ingest


def rec(pp="f:entry:0", **vars_):
    return TraceRecord(pp, vars_)


def test_wire_format_round_trip(tmp_path):
    records = [rec(x=1, y=-2), rec(x=3, y=4), rec("f:exit:0", br0=1)]
    p = tmp_path / "t.trace"
    p.write_text("".join(r.to_line() + "\n" for r in records))
    store = ingest(p)
    assert store.total_records == 3
    assert store.points() == ["f:entry:0", "f:exit:0"]
    assert store.values("f:entry:0", "x") == [1, 3]
    assert store.values("f:entry:0", "y") == [-2, 4]


def test_serialize_ingest_identity(tmp_path):
    store = SampleStore()
    for i in range(10):
        store.add(rec(x=i, y=i * i))
    p = tmp_path / "t.trace"
    p.write_text(store.serialize())
    back = ingest(p)
    assert back.values("f:entry:0", "y") == store.values("f:entry:0", "y")
    assert back.serialize() == store.serialize()


def test_malformed_lines_skipped_below_threshold(tmp_path):
    lines = [rec(x=i).to_line() for i in range(95)] + ["garbage"] * 5
    p = tmp_path / "t.trace"
    p.write_text("\n".join(lines) + "\n")
    store = ingest(p)
    assert store.skipped == 5
    assert store.total_records == 95


def test_malformed_majority_raises(tmp_path):
    lines = [rec(x=i).to_line() for i in range(5)] + ["{not json"] * 5
    p = tmp_path / "t.trace"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatError):
        ingest(p)


@pytest.mark.parametrize(
    "line",
    [
        '{"pp": "f:entry:0"}',  # missing vars
        '{"vars": {"x": 1}}',  # missing pp
        '{"pp": "f:entry:0", "vars": {"x": 1.5}}',  # non-integer value
        '{"pp": "f:entry:0", "vars": {"x": 9223372036854775808}}',  # out of 64-bit range
        '["pp", "vars"]',  # wrong shape
    ],
)
def test_malformed_shapes_are_counted_not_fatal(tmp_path, line):
    good = "\n".join(rec(x=i).to_line() for i in range(20))
    p = tmp_path / "t.trace"
    p.write_text(good + "\n" + line + "\n")
    assert ingest(p).skipped == 1


def test_key_clash_within_point_is_skipped():
    store = SampleStore()
    assert store.add(rec(x=1, y=2))
    assert not store.add(rec(x=1))  # missing column for this point
    assert store.total_records == 1


def test_merge_accumulates():
    a, b = SampleStore(), SampleStore()
    a.add(rec(x=1))
    b.add(rec(x=2))
    b.skipped = 3
    a.merge(b)
    assert a.values("f:entry:0", "x") == [1, 2]
    assert a.skipped == 3


def test_blank_lines_ignored(tmp_path):
    p = tmp_path / "t.trace"
    p.write_text(rec(x=1).to_line() + "\n\n\n" + rec(x=2).to_line() + "\n")
    store = ingest(p)
    assert store.total_records == 2
    assert store.skipped == 0
