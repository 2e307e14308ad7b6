import numpy as np

from influence_game import _kernel
from influence_game.rng import (
    Xoshiro256StarStar,
    child_seed,
    derive_seeds,
    mix64,
    seed_at,
    state_from_seed,
)


def test_same_seed_same_stream():
    a = Xoshiro256StarStar(42)
    b = Xoshiro256StarStar(42)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_different_seeds_differ():
    a = Xoshiro256StarStar(1)
    b = Xoshiro256StarStar(2)
    assert [a.next_u64() for _ in range(8)] != [b.next_u64() for _ in range(8)]


def test_python_and_kernel_streams_match():
    state = state_from_seed(123456789)
    py = Xoshiro256StarStar(123456789)
    for _ in range(500):
        assert int(_kernel._next_u64(state)) == py.next_u64()


def test_kernel_random_and_randbelow_match_python():
    state = state_from_seed(77)
    py = Xoshiro256StarStar(77)
    for _ in range(200):
        assert float(_kernel._random(state)) == py.random()
    state = state_from_seed(78)
    py = Xoshiro256StarStar(78)
    for n in (1, 2, 3, 7, 900, 2**40):
        for _ in range(50):
            assert int(_kernel._randbelow(state, n)) == py.randbelow(n)


def test_random_in_unit_interval():
    rng = Xoshiro256StarStar(9)
    values = [rng.random() for _ in range(10_000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert abs(np.mean(values) - 0.5) < 0.02


def test_randbelow_covers_range_roughly_uniformly():
    rng = Xoshiro256StarStar(5)
    n = 10
    counts = np.zeros(n)
    draws = 50_000
    for _ in range(draws):
        counts[rng.randbelow(n)] += 1
    assert counts.min() > 0
    # each bucket within 6 sigma of the binomial expectation
    sigma = (draws * (1 / n) * (1 - 1 / n)) ** 0.5
    assert np.abs(counts - draws / n).max() < 6 * sigma


def test_derive_seeds_deterministic_distinct_prefix():
    a = derive_seeds(31337, 100)
    b = derive_seeds(31337, 100)
    assert a == b
    assert len(set(a)) == 100
    assert derive_seeds(31337, 1)[0] == a[0]
    assert derive_seeds(31337, 17) == a[:17]


def test_child_seed_distinct_over_large_range():
    seeds = {child_seed(8, i) for i in range(20_000)}
    assert len(seeds) == 20_000


def test_seed_at_path_composition():
    assert seed_at(5, 3, 1) == child_seed(child_seed(5, 3), 1)


def test_mix64_is_stable_and_masked():
    assert mix64(0) == mix64(0)
    assert 0 <= mix64(2**64 - 1) < 2**64
    assert len({mix64(i) for i in range(10_000)}) == 10_000


def test_shuffle_is_a_permutation_and_deterministic():
    rng = Xoshiro256StarStar(2)
    values = list(range(50))
    rng.shuffle(values)
    assert sorted(values) == list(range(50))
    rng2 = Xoshiro256StarStar(2)
    values2 = list(range(50))
    rng2.shuffle(values2)
    assert values == values2
    assert values != list(range(50))
