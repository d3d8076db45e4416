import numpy as np

from logcave.rng import data_keyed_seed, make_rng


def test_same_key_same_stream():
    a = make_rng(3, 7).random(10)
    b = make_rng(3, 7).random(10)
    np.testing.assert_array_equal(a, b)


def test_distinct_streams_differ():
    a = make_rng(3, 7).random(10)
    b = make_rng(3, 8).random(10)
    c = make_rng(4, 7).random(10)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_long_keys_are_folded():
    a = make_rng(1, 2, 3, 4).random(5)
    b = make_rng(1, 2, 3, 4).random(5)
    c = make_rng(1, 2, 3, 5).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_data_keyed_seed_permutation_invariant():
    pts = make_rng(0, 1).standard_normal((30, 2))
    perm = make_rng(0, 2).permutation(30)
    assert data_keyed_seed(5, pts) == data_keyed_seed(5, pts[perm])
    assert data_keyed_seed(5, pts) != data_keyed_seed(6, pts)
    assert data_keyed_seed(5, pts) != data_keyed_seed(5, pts + 1e-9)
