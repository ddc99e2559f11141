import pytest

from app.schemas.results import EpisodeResult
from app.services.stats import eval_stats, improvement_pct, summarize


def test_five_element_quartiles():
    s = summarize([4.0, 1.0, 100.0, 3.0, 2.0])
    assert (s.min, s.q1, s.median, s.q3, s.max) == (1.0, 2.0, 3.0, 4.0, 100.0)
    assert s.mean == 22.0


def test_quartiles_interpolate_between_order_statistics():
    s = summarize([1.0, 2.0, 3.0, 4.0])
    assert s.q1 == pytest.approx(1.75)
    assert s.median == pytest.approx(2.5)
    assert s.q3 == pytest.approx(3.25)


def test_single_run_collapses():
    result = EpisodeResult(avg_queue_length=0.7, avg_wait_time=9.3, vehicles_entered=10, vehicles_departed=8)
    stats = eval_stats([result])
    assert stats.n == 1
    q = stats.avg_queue_length
    assert q.min == q.q1 == q.median == q.q3 == q.max == q.mean == 0.7


def test_empty_sample():
    with pytest.raises(ValueError):
        summarize([])


def test_improvement_pct():
    assert improvement_pct(10.0, 4.0) == pytest.approx(60.0)
    assert improvement_pct(10.0, 12.0) == pytest.approx(-20.0)
    assert improvement_pct(0.0, 0.0) == 0.0
