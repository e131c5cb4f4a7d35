import numpy as np
import pytest

from strata_bench.seeds import rng_for


def test_same_tokens_same_stream():
    a = rng_for(42, "stratum", "stage_I").random(8)
    b = rng_for(42, "stratum", "stage_I").random(8)
    assert np.array_equal(a, b)


def test_different_tokens_different_streams():
    a = rng_for(42, "stratum", "stage_I").random(8)
    b = rng_for(42, "stratum", "stage_II").random(8)
    c = rng_for(43, "stratum", "stage_I").random(8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_streams_do_not_depend_on_draw_order():
    first = rng_for(7, "cell", 3).random()
    _ = rng_for(7, "cell", 0).random(1000)
    again = rng_for(7, "cell", 3).random()
    assert first == again


def test_int_and_str_tokens():
    assert rng_for(1, 2, "x").random() == rng_for(1, 2, "x").random()
    with pytest.raises(TypeError):
        rng_for(1, 2.5)


def test_large_seeds_supported():
    big = 2**62 + 12345
    assert rng_for(big, "a").random() == rng_for(big, "a").random()
