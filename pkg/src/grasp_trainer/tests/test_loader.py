import numpy as np
import pytest

from src.grasp_trainer.loader import (
    BatchLoader,
    batch_at,
    clean_up,
    steps_per_epoch,
)


@pytest.fixture
def rows():
    x0 = np.arange(50, dtype=float).reshape(10, 5)
    y = np.arange(10, dtype=float)[:, None] * np.ones((1, 3))
    return x0, y


def test_steps_per_epoch():
    assert steps_per_epoch(10, 4) == 3
    assert steps_per_epoch(8, 4) == 2
    assert steps_per_epoch(1, 8) == 1


def test_epoch_visits_every_row_once(rows):
    x0, y = rows
    seen = np.concatenate(
        [batch_at(x0, y, 4, seed=1, step=s).x0 for s in range(3)]
    )
    assert len(seen) == 10
    np.testing.assert_array_equal(np.sort(seen[:, 0]), x0[:, 0])


def test_batches_keep_rows_paired(rows):
    x0, y = rows
    batch = batch_at(x0, y, 4, seed=1, step=5)
    np.testing.assert_array_equal(batch.x0[:, 0] / 5, batch.y[:, 0])


def test_epochs_are_reshuffled(rows):
    x0, y = rows
    first = batch_at(x0, y, 10, seed=1, step=0).x0
    second = batch_at(x0, y, 10, seed=1, step=1).x0
    assert not np.array_equal(first, second)
    again = batch_at(x0, y, 10, seed=1, step=0).x0
    np.testing.assert_array_equal(first, again)


def test_loader_matches_batch_at(logger, rows):
    x0, y = rows
    loader = BatchLoader(x0, y, 4, seed=2, start_step=0, total_steps=7).start()
    try:
        items = list(loader)
    finally:
        clean_up(logger, [loader])
    assert [s for s, _ in items] == list(range(7))
    for step, batch in items:
        np.testing.assert_array_equal(batch.x0, batch_at(x0, y, 4, 2, step).x0)


def test_resumed_loader_sees_the_same_tail(logger, rows):
    x0, y = rows
    full = BatchLoader(x0, y, 4, 2, 0, 9, queue_size=1).start()
    tail = BatchLoader(x0, y, 4, 2, 4, 9, queue_size=1).start()
    try:
        full_items, tail_items = list(full)[4:], list(tail)
    finally:
        clean_up(logger, [full, tail])
    assert [s for s, _ in tail_items] == [s for s, _ in full_items]
    for (_, a), (_, b) in zip(full_items, tail_items):
        np.testing.assert_array_equal(a.x0, b.x0)


def test_early_stop_joins_worker(logger, rows):
    x0, y = rows
    loader = BatchLoader(x0, y, 2, 0, 0, 1000, queue_size=1).start()
    for step, _ in loader:
        if step == 2:
            break
    clean_up(logger, [loader, None])
    assert not loader.is_alive()


def test_worker_error_reaches_consumer(logger):
    x0, y = np.zeros((6, 5)), np.zeros((0, 3))
    loader = BatchLoader(x0, y, 2, 0, 0, 3).start()
    try:
        with pytest.raises(IndexError):
            list(loader)
    finally:
        clean_up(logger, [loader])


def test_empty_rows_rejected():
    with pytest.raises(ValueError):
        BatchLoader(np.zeros((0, 5)), np.zeros((0, 3)), 2, 0, 0, 3)
