from hypothesis import given
from hypothesis import strategies as st

from smoothnet.seeding import derive_seed, make_rng


def test_derive_seed_is_stable_and_key_sensitive():
    a = derive_seed(1, "flood", 64, 1, 0)
    assert a == derive_seed(1, "flood", 64, 1, 0)
    assert len({a, derive_seed(2, "flood", 64, 1, 0), derive_seed(1, "flood", 64, 1, 1), derive_seed(1, "walk", 64, 1, 0)}) == 4
    # Keys are typed: the string "1" and the integer 1 are different streams.
    assert derive_seed(1, 1) != derive_seed(1, "1")
    assert 0 <= a < 2**64


@given(st.integers(0, 2**64 - 1), st.lists(st.integers(0, 10**6), max_size=4))
def test_make_rng_reproducible(root, keys):
    assert make_rng(root, *keys).random() == make_rng(root, *keys).random()
