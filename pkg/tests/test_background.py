import threading
import time

import pytest

from cosched.processing.background import WORKERS_ENV, BackgroundEvaluator, argmax_first, workers_from_env


class TestBackgroundEvaluator:
    def test_map_keeps_submission_order(self):
        def slow_square(i):
            time.sleep(0.001 * (10 - i))
            return i * i

        with BackgroundEvaluator(workers=4) as evaluator:
            assert evaluator.map(slow_square, range(10)) == [i * i for i in range(10)]

    def test_single_worker_runs_inline(self):
        evaluator = BackgroundEvaluator(workers=1)
        names = evaluator.map(lambda _: threading.current_thread().name, range(3))
        assert set(names) == {threading.current_thread().name}
        assert evaluator._executor is None

    def test_stop_releases_the_pool(self):
        evaluator = BackgroundEvaluator(workers=2)
        evaluator.map(lambda x: x, [1, 2, 3])
        assert evaluator._executor is not None
        evaluator.stop()
        assert evaluator._executor is None

    def test_workers_at_least_one(self):
        assert BackgroundEvaluator(workers=0).workers == 1


class TestWorkersFromEnv:
    def test_unset(self, monkeypatch):
        monkeypatch.delenv(WORKERS_ENV, raising=False)
        assert workers_from_env() == 1
        assert workers_from_env(3) == 3

    @pytest.mark.parametrize("raw,expected", [("4", 4), ("0", 1), ("-2", 1), ("many", 2)])
    def test_values(self, monkeypatch, raw, expected):
        monkeypatch.setenv(WORKERS_ENV, raw)
        assert workers_from_env(2) == expected


def test_argmax_first_breaks_ties_low():
    assert argmax_first([1.0, 3.0, 3.0, 2.0]) == 1
    assert argmax_first([5.0]) == 0
    assert argmax_first([-1.0, -1.0]) == 0
