import pytest
from hypothesis import given
from hypothesis import strategies as st

from assetfail.asset_data import Status
from assetfail.evaluation.metrics import ConfusionMatrix, metrics, round_half_up
from conftest import PAPER_TABLES


@pytest.mark.parametrize("name", sorted(PAPER_TABLES))
def test_paper_tables(name):
    (tp, fn, fp, tn), rows = PAPER_TABLES[name]
    shown = metrics(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)).display()
    got = [shown[k].as_tuple() for k in ("Asset Failed Status", "Asset Working Status", "Average")]
    assert got == [tuple(r) for r in rows]


def test_macro_uses_unrounded_values():
    r = metrics(ConfusionMatrix(tp=41, fp=11, tn=133, fn=15))
    assert r.macro.precision == pytest.approx((41 / 52 + 133 / 148) / 2)
    assert r.macro.precision == pytest.approx(0.8436, abs=5e-5)
    # Averaging the rounded 0.79 and 0.90 would print 0.85 instead.
    assert round_half_up((0.79 + 0.90) / 2) == 0.85
    assert r.display()["Average"].precision == 0.84


def test_round_half_up():
    assert round_half_up(0.125) == 0.13
    assert round_half_up(0.135) == 0.14
    assert round_half_up(0.8849) == 0.88


def test_zero_denominators_flagged():
    r = metrics(ConfusionMatrix(tp=0, fp=0, tn=10, fn=0))
    assert r.failed.precision == 0.0 and "failed.precision" in r.flags
    assert r.working.recall == 1.0


def test_from_labels():
    cm = ConfusionMatrix.from_labels(["Failed", "Failed", "Working", "Working", "Working"],
                                     [Status.FAILED, Status.WORKING, Status.FAILED,
                                      Status.WORKING, Status.WORKING])
    assert (cm.tp, cm.fn, cm.fp, cm.tn) == (1, 1, 1, 2)
    with pytest.raises(ValueError):
        ConfusionMatrix(-1, 0, 0, 0)


def test_table_text():
    text = metrics(ConfusionMatrix(tp=45, fp=5, tn=144, fn=6)).table()
    assert text.splitlines()[-1].split()[-3:] == ["0.93", "0.92", "0.93"]


@given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=60))
def test_counts_and_ranges(pairs):
    cm = ConfusionMatrix.from_labels([Status.FAILED if a else Status.WORKING for a, _ in pairs],
                                     [Status.FAILED if p else Status.WORKING for _, p in pairs])
    assert cm.total == len(pairs)
    r = metrics(cm)
    for m in (r.failed, r.working, r.macro):
        assert all(0.0 <= v <= 1.0 for v in m.as_tuple())
    for m in (r.failed, r.working):
        if m.precision + m.recall > 0:
            assert m.f1 == pytest.approx(2 * m.precision * m.recall / (m.precision + m.recall))
