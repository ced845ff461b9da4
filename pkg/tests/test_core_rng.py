import numpy as np

from src.core.rng import as_generator, as_seed_sequence, child_seed, spawn_seeds


def state(ss: np.random.SeedSequence) -> np.ndarray:
    return ss.generate_state(4)


def test_spawn_seeds_match_numpy_spawn():
    ours = spawn_seeds(7, 3)
    theirs = np.random.SeedSequence(7).spawn(3)

    for a, b in zip(ours, theirs, strict=True):
        np.testing.assert_array_equal(state(a), state(b))


def test_spawn_seeds_leave_the_root_untouched():
    root = np.random.SeedSequence(7)

    first = spawn_seeds(root, 2)
    second = spawn_seeds(root, 2)

    assert root.n_children_spawned == 0
    np.testing.assert_array_equal(state(first[1]), state(second[1]))


def test_spawned_root_keeps_its_key():
    parent = np.random.SeedSequence(7)
    left, right = parent.spawn(2)

    from_left = spawn_seeds(left, 2)
    from_right = spawn_seeds(right, 2)

    assert from_left[0].spawn_key == (0, 0)
    assert not np.array_equal(state(from_left[0]), state(from_right[0]))
    np.testing.assert_array_equal(state(from_left[1]), state(left.spawn(2)[1]))


def test_child_seed_is_the_indexed_child():
    np.testing.assert_array_equal(
        state(child_seed(5, 2)), state(np.random.SeedSequence(5).spawn(3)[2])
    )


def test_coercions():
    gen = np.random.default_rng(0)
    assert as_generator(gen) is gen
    ss = np.random.SeedSequence(1)
    assert as_seed_sequence(ss) is ss
    assert as_seed_sequence(3).entropy == 3
