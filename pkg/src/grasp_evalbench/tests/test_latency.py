import pytest

from src.grasp_evalbench.evaluate import SamplerSpec
from src.grasp_evalbench.latency import (
    bench_latency,
    find_row,
    fit_call_cost,
    time_spec,
)


def test_trials_floor(state, samples):
    with pytest.raises(ValueError):
        time_spec(state, SamplerSpec("consistency", 1), samples[0], trials=10)


def test_rows_follow_specs(logger, state, samples):
    specs = [SamplerSpec("consistency", 1), SamplerSpec("ddpm", 2)]
    rows = bench_latency(state, specs, samples[0])
    keys = [(r.sampler_id, r.steps) for r in rows]
    assert keys == [("consistency", 1), ("ddpm", 2)]
    for row in rows:
        assert row.trials == 30
        assert 0 < row.median <= row.p95
    assert find_row(rows, specs[1]) is rows[1]
    assert find_row(rows, SamplerSpec("ddpm", 9)) is None


def test_latency_grows_with_network_calls(logger, state, samples):
    specs = [SamplerSpec("consistency", p) for p in (1, 3, 10)]
    specs.append(SamplerSpec("ddpm", 1000))
    p1, p3, p10, ddpm = bench_latency(state, specs, samples[0])
    assert p1.median < p3.median < p10.median
    assert ddpm.median / p3.median > 50


def test_network_calls():
    calls = [SamplerSpec("consistency", p).network_calls for p in (1, 2, 3)]
    assert calls == [1, 1, 2]
    assert SamplerSpec("consistency", 10).network_calls == 9
    assert SamplerSpec("ddpm", 1000).network_calls == 1000


def test_call_cost_needs_distinct_counts(state, samples):
    specs = [SamplerSpec("consistency", 1), SamplerSpec("consistency", 2)]
    rows = bench_latency(state, specs, samples[0])
    with pytest.raises(ValueError):
        fit_call_cost(rows, specs)
    with pytest.raises(ValueError):
        fit_call_cost(rows[:1], [specs[0], SamplerSpec("consistency", 5)])


def test_latency_follows_call_count(logger, wide_state, samples):
    specs = [SamplerSpec("consistency", p) for p in (1, 3, 5, 7, 10)]
    rows = bench_latency(wide_state, specs, samples[0], trials=60)
    cost = fit_call_cost(rows, specs)
    assert cost.per_call > 0
    for spec, row in zip(specs, rows):
        assert row.median == pytest.approx(cost.predict(spec), rel=0.5)
    ratio = rows[-1].median / rows[0].median
    assert 3 <= ratio <= 15


def test_latency_is_repeatable(logger, wide_state, samples):
    spec = SamplerSpec("consistency", 3)
    first = time_spec(wide_state, spec, samples[0], trials=100, seed=1)
    second = time_spec(wide_state, spec, samples[0], trials=100, seed=1)
    assert second.median == pytest.approx(first.median, rel=0.2)
